#include "cbcast/trace.hpp"

#include <istream>
#include <limits>
#include <sstream>

namespace cbcast {

namespace {

const char* kind_name(TraceEvent::Kind k) {
  switch (k) {
    case TraceEvent::Kind::Broadcast: return "broadcast";
    case TraceEvent::Kind::Deliver: return "deliver";
    default: return "receive";
  }
}

TraceEvent::Kind kind_from_name(const std::string& s) {
  if (s == "broadcast") return TraceEvent::Kind::Broadcast;
  if (s == "deliver") return TraceEvent::Kind::Deliver;
  if (s == "receive") return TraceEvent::Kind::Receive;
  throw std::invalid_argument("unknown trace event kind: " + s);
}

}  // namespace

Json message_to_wire(const Message<Json>& m) {
  return Json{{"vc", m.vc.entries()}, {"sender", m.sender}, {"raw", m.raw}};
}

Message<Json> message_from_wire(const Json& j) {
  if (!j.is_object()) {
    throw std::invalid_argument("message must be a JSON object");
  }
  if (!j.contains("vc") || !j.contains("sender") || !j.contains("raw")) {
    throw std::invalid_argument("message needs vc, sender, and raw fields");
  }
  const Json& vc = j.at("vc");
  if (!vc.is_array() || vc.empty()) {
    throw std::invalid_argument("message vc must be a non-empty array");
  }
  std::vector<std::uint64_t> entries;
  entries.reserve(vc.size());
  for (const Json& e : vc) {
    if (!e.is_number_unsigned()) {
      throw std::invalid_argument("message vc entries must be non-negative integers");
    }
    entries.push_back(e.get<std::uint64_t>());
  }
  const Json& sender = j.at("sender");
  if (!sender.is_number_unsigned() || sender.get<std::uint64_t>() >= entries.size()) {
    throw std::invalid_argument("message sender must index the clock");
  }
  Message<Json> m;
  m.vc = VectorClock(std::move(entries));
  m.sender = sender.get<ProcessId>();
  m.raw = j.at("raw");
  return m;
}

Json trace_event_to_json(const TraceEvent& e) {
  return Json{{"kind", kind_name(e.kind)},
              {"pid", e.pid},
              {"msg", message_to_wire(e.msg)}};
}

TraceEvent trace_event_from_json(const Json& j) {
  if (!j.is_object()) {
    throw std::invalid_argument("trace event must be a JSON object");
  }
  if (!j.contains("kind") || !j.contains("pid") || !j.contains("msg")) {
    throw std::invalid_argument("trace event needs kind, pid, and msg fields");
  }
  if (!j.at("kind").is_string()) {
    throw std::invalid_argument("trace event kind must be a string");
  }
  if (!j.at("pid").is_number_unsigned() ||
      j.at("pid").get<std::uint64_t>() > std::numeric_limits<ProcessId>::max()) {
    throw std::invalid_argument("trace event pid must be a small non-negative integer");
  }
  TraceEvent e;
  e.kind = kind_from_name(j.at("kind").get<std::string>());
  e.pid = j.at("pid").get<ProcessId>();
  e.msg = message_from_wire(j.at("msg"));
  return e;
}

std::string trace_to_jsonl(const std::vector<TraceEvent>& trace) {
  std::string out;
  for (const TraceEvent& e : trace) {
    out += trace_event_to_json(e).dump();
    out += '\n';
  }
  return out;
}

std::vector<TraceEvent> parse_trace(std::istream& in) {
  std::vector<TraceEvent> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    Json j = Json::parse(line, nullptr, false);
    if (j.is_discarded()) {
      throw TraceParseError(lineno, "not valid JSON");
    }
    try {
      out.push_back(trace_event_from_json(j));
      out.back().line = lineno;
    } catch (const std::invalid_argument& e) {
      throw TraceParseError(lineno, e.what());
    }
  }
  return out;
}

std::vector<TraceEvent> parse_trace_text(const std::string& text) {
  std::istringstream in(text);
  return parse_trace(in);
}

ExecutionState<Json> execution_from_trace(
    const std::vector<TraceEvent>& trace) {
  if (trace.empty()) return ExecutionState<Json>{};
  const std::size_t n = trace.front().msg.vc.size();
  ExecutionState<Json> x = execution_new<Json>(n);
  for (std::size_t i = 0; i < trace.size(); ++i) {
    const TraceEvent& e = trace[i];
    const std::size_t where = e.line != 0 ? e.line : i + 1;
    if (e.msg.vc.size() != n) {
      throw TraceParseError(where, "clock length " +
                                       std::to_string(e.msg.vc.size()) +
                                       " disagrees with cluster size " +
                                       std::to_string(n));
    }
    if (e.pid >= n) {
      throw TraceParseError(where, "pid " + std::to_string(e.pid) +
                                       " out of range for cluster size " +
                                       std::to_string(n));
    }
    ProcessState<Json>& p = x.procs[e.pid];
    switch (e.kind) {
      case TraceEvent::Kind::Broadcast:
        p.history.push_front(BroadcastEvent<Json>{e.msg});
        break;
      case TraceEvent::Kind::Deliver:
        p.history.push_front(DeliverEvent<Json>{e.pid, e.msg});
        break;
      case TraceEvent::Kind::Receive:
        break;  // receipts never land on histories
    }
  }
  for (ProcessState<Json>& p : x.procs) {
    p.vc = hist_vc(p.history, n);
  }
  return x;
}

Json violation_to_json(const Violation& v) {
  return Json{{"kind", to_string(v.kind)},
              {"pid", v.pid},
              {"m1", Json{{"sender", v.m1.sender}, {"seq", v.m1.seq}}},
              {"m2", Json{{"sender", v.m2.sender}, {"seq", v.m2.seq}}},
              {"explanation", v.explanation}};
}

}  // namespace cbcast
