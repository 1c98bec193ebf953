#pragma once

#include <cstdint>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "cbcast/checker.hpp"
#include "cbcast/protocol.hpp"

namespace cbcast {

using Json = nlohmann::json;

/// Wire encoding of a message: {"vc": [ints], "sender": int, "raw": <json>}.
Json message_to_wire(const Message<Json>& m);

/// Decodes and validates a wire message. Throws std::invalid_argument on a
/// structurally bad object (missing/badly typed fields, sender out of range,
/// empty clock).
Message<Json> message_from_wire(const Json& j);

/// One line of a trace file: a broadcast, receipt, or delivery observed at a
/// process, in global occurrence order. Receipts appear in traces for
/// completeness but never land on histories.
struct TraceEvent {
  enum class Kind : std::uint8_t { Broadcast, Deliver, Receive };
  Kind kind = Kind::Broadcast;
  ProcessId pid = 0;
  Message<Json> msg;
  std::size_t line = 0;  // source line when parsed from a file, else 0
};

Json trace_event_to_json(const TraceEvent& e);
TraceEvent trace_event_from_json(const Json& j);

/// Serializes a trace as JSON lines, one event per line, trailing newline.
std::string trace_to_jsonl(const std::vector<TraceEvent>& trace);

/// Parse failure, carrying the 1-based line number of the offending line.
class TraceParseError : public std::runtime_error {
 public:
  TraceParseError(std::size_t line, const std::string& what)
      : std::runtime_error("trace line " + std::to_string(line) + ": " + what),
        line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

/// Reads a JSON-lines trace; blank lines are allowed and skipped.
std::vector<TraceEvent> parse_trace(std::istream& in);
std::vector<TraceEvent> parse_trace_text(const std::string& text);

/// Rebuilds the per-process histories (and hist-derived clocks) from a trace
/// so the checkers can run on it. The cluster size comes from the clock
/// length of the first event; every event must agree on it and carry an
/// in-range pid. Broadcast and deliver events land on histories; receive
/// events do not. An empty trace yields an empty execution.
ExecutionState<Json> execution_from_trace(const std::vector<TraceEvent>& trace);

Json violation_to_json(const Violation& v);

}  // namespace cbcast
