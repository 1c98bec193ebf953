// Python face of the library: clock algebra, the process state machine, the
// checkers, and the deterministic simulator. Payloads cross the boundary as
// ordinary python values, serialized through JSON.

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <optional>
#include <string>

#include "cbcast/simulator.hpp"
#include "cbcast/trace.hpp"

namespace py = pybind11;
using namespace cbcast;

namespace {

Json json_from_py(const py::handle& obj) {
  const auto dumped =
      py::module_::import("json").attr("dumps")(obj).cast<std::string>();
  return Json::parse(dumped);
}

py::object json_to_py(const Json& j) {
  return py::module_::import("json").attr("loads")(py::str(j.dump()));
}

py::list violations_to_py(const std::vector<Violation>& violations) {
  py::list out;
  for (const auto& v : violations) out.append(json_to_py(violation_to_json(v)));
  return out;
}

/// Owns one ProcessState and sequences the pure transitions behind a
/// python-friendly mutable object.
class PyProcess {
 public:
  PyProcess(std::size_t n, ProcessId id) : state_(process_new<Json>(n, id)) {}

  std::vector<std::uint64_t> vc() const { return state_.vc.entries(); }
  ProcessId id() const { return state_.id; }
  std::size_t delay_queue_length() const { return state_.delay_queue.size(); }
  std::size_t history_length() const { return state_.history.size(); }

  Message<Json> broadcast_payload(const py::handle& payload) {
    auto result = broadcast(json_from_py(payload), state_);
    state_ = std::move(result.state);
    return result.message;
  }

  void receive_message(const Message<Json>& m) { state_ = receive(m, state_); }

  std::optional<Message<Json>> deliver_one() {
    auto result = deliver(state_);
    if (!result) return std::nullopt;
    state_ = std::move(result->state);
    return result->message;
  }

  bool agreement() const { return agreement_holds(state_); }

  py::list lcd_violations() const {
    return violations_to_py(check_lcd(state_.id, state_.history));
  }

 private:
  ProcessState<Json> state_;
};

py::dict run_simulation(std::size_t procs, std::uint64_t seed,
                        std::size_t steps, double p_drop, double p_duplicate,
                        bool with_trace) {
  SimConfig cfg;
  cfg.n_procs = procs;
  cfg.seed = seed;
  cfg.max_steps = steps;
  cfg.p_drop = p_drop;
  cfg.p_duplicate = p_duplicate;
  Simulation sim(cfg);
  sim.run();
  const auto violations = check_all(sim.execution());

  py::dict out;
  Json summary = sim.stats().to_json();
  summary["violations"] = violations.size();
  summary["config"] = sim.config().to_json();
  out["summary"] = json_to_py(summary);
  out["violations"] = violations_to_py(violations);
  if (with_trace) out["trace"] = trace_to_jsonl(sim.trace());
  return out;
}

py::dict check_trace_text_py(const std::string& text) {
  const auto trace = parse_trace_text(text);
  const auto x = execution_from_trace(trace);
  const auto violations = check_all(x);
  std::size_t lcd = 0, cd = 0, corr = 0;
  for (const auto& v : violations) {
    switch (v.kind) {
      case ViolationKind::Lcd: ++lcd; break;
      case ViolationKind::Cd: ++cd; break;
      case ViolationKind::Correspondence: ++corr; break;
    }
  }
  py::dict out;
  out["events"] = trace.size();
  out["violations"] = violations_to_py(violations);
  out["lcd"] = lcd;
  out["cd"] = cd;
  out["correspondence"] = corr;
  return out;
}

py::dict replay_scenarios_py() {
  const auto replay = replay_scenarios();
  py::dict chain, fifo, transitive;
  chain["m1_vc"] = replay.chain_m1_vc.entries();
  chain["m2_vc"] = replay.chain_m2_vc.entries();
  chain["m3_vc"] = replay.chain_m3_vc.entries();
  fifo["first_vc"] = replay.fifo_first_vc.entries();
  fifo["second_vc"] = replay.fifo_second_vc.entries();
  fifo["second_buffered"] = replay.fifo_second_buffered;
  fifo["receiver_vc"] = replay.fifo_receiver_vc.entries();
  transitive["reply_vc"] = replay.transitive_reply_vc.entries();
  transitive["reply_buffered"] = replay.transitive_reply_buffered;
  transitive["receiver_vc"] = replay.transitive_receiver_vc.entries();
  py::dict out;
  out["chain"] = chain;
  out["fifo"] = fifo;
  out["transitive"] = transitive;
  return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "causal broadcast: vector clocks, the process state machine, "
            "delivery checkers, and a deterministic simulator";

  py::class_<VectorClock>(m, "VectorClock")
      .def(py::init<std::vector<std::uint64_t>>(), py::arg("entries"))
      .def_static("zeros", &VectorClock::zeros, py::arg("n"))
      .def("__len__", &VectorClock::size)
      .def("__getitem__", &VectorClock::at)
      .def("__eq__",
           [](const VectorClock& a, const VectorClock& b) { return a == b; })
      .def("__repr__",
           [](const VectorClock& v) { return "VectorClock(" + v.to_string() + ")"; })
      .def_property_readonly("entries", &VectorClock::entries)
      .def("ticked", &VectorClock::ticked, py::arg("i"))
      .def("sum", &VectorClock::sum);

  m.def("combine", &combine, py::arg("a"), py::arg("b"),
        "pointwise maximum of two clocks");
  m.def("less_equal", &less_equal, py::arg("a"), py::arg("b"));
  m.def("less", &less, py::arg("a"), py::arg("b"),
        "the strict clock partial order");
  m.def("concurrent", &concurrent, py::arg("a"), py::arg("b"));

  py::class_<MessageId>(m, "MessageId")
      .def_readonly("sender", &MessageId::sender)
      .def_readonly("seq", &MessageId::seq)
      .def("__eq__",
           [](const MessageId& a, const MessageId& b) { return a == b; })
      .def("__repr__", &MessageId::to_string);

  py::class_<Message<Json>>(m, "Message")
      .def_property_readonly(
          "vc", [](const Message<Json>& m) { return m.vc.entries(); })
      .def_readonly("sender", &Message<Json>::sender)
      .def_property_readonly(
          "raw", [](const Message<Json>& m) { return json_to_py(m.raw); })
      .def_property_readonly("id", &Message<Json>::id)
      .def("__repr__", [](const Message<Json>& m) {
        return "Message(" + m.id().to_string() + ", vc=" + m.vc.to_string() +
               ")";
      });

  m.def(
      "deliverable",
      [](const Message<Json>& msg, const VectorClock& p_vc) {
        return deliverable(msg, p_vc);
      },
      py::arg("msg"), py::arg("process_vc"),
      "whether the message could be delivered at a process with this clock");

  py::class_<PyProcess>(m, "Process")
      .def(py::init<std::size_t, ProcessId>(), py::arg("n"), py::arg("id"))
      .def_property_readonly("vc", &PyProcess::vc)
      .def_property_readonly("id", &PyProcess::id)
      .def_property_readonly("delay_queue_length",
                             &PyProcess::delay_queue_length)
      .def_property_readonly("history_length", &PyProcess::history_length)
      .def("broadcast", &PyProcess::broadcast_payload, py::arg("payload"),
           "stamp and self-deliver a payload; returns the wire message")
      .def("receive", &PyProcess::receive_message, py::arg("msg"),
           "inject a message from the network into the delay queue")
      .def("deliver", &PyProcess::deliver_one,
           "deliver the next deliverable message, if any")
      .def("agreement_holds", &PyProcess::agreement)
      .def("check_lcd", &PyProcess::lcd_violations);

  m.def("simulate", &run_simulation, py::arg("procs") = 3, py::arg("seed") = 0,
        py::arg("steps") = 100, py::arg("p_drop") = 0.0,
        py::arg("p_duplicate") = 0.0, py::arg("with_trace") = false,
        "run a seeded randomized execution and check it");

  m.def("check_trace", &check_trace_text_py, py::arg("jsonl"),
        "check a JSON-lines trace for causal delivery violations");

  m.def("replay_figures", &replay_scenarios_py,
        "the scripted golden scenarios and their clocks");
}
