#include "cbcast/simulator.hpp"

#include <algorithm>
#include <stdexcept>

namespace cbcast {

void SimConfig::validate() const {
  if (n_procs == 0) throw std::invalid_argument("n_procs must be at least 1");
  if (max_steps == 0) throw std::invalid_argument("max_steps must be at least 1");
  auto probability = [](double p, const char* name) {
    if (!(p >= 0.0 && p <= 1.0)) {
      throw std::invalid_argument(std::string(name) + " must be in [0,1]");
    }
  };
  probability(p_drop, "p_drop");
  probability(p_duplicate, "p_duplicate");
  auto weight = [](double w, const char* name) {
    if (!(w >= 0.0)) {
      throw std::invalid_argument(std::string(name) + " must be non-negative");
    }
  };
  weight(broadcast_weight, "broadcast_weight");
  weight(receive_weight, "receive_weight");
  weight(deliver_weight, "deliver_weight");
  if (broadcast_weight + receive_weight + deliver_weight <= 0.0) {
    throw std::invalid_argument("at least one scheduling weight must be positive");
  }
}

Json SimConfig::to_json() const {
  return Json{{"n_procs", n_procs},
              {"seed", seed},
              {"max_steps", max_steps},
              {"p_drop", p_drop},
              {"p_duplicate", p_duplicate},
              {"broadcast_weight", broadcast_weight},
              {"receive_weight", receive_weight},
              {"deliver_weight", deliver_weight},
              {"rng", kRngAlgorithm}};
}

Json RunStats::to_json() const {
  return Json{{"steps", steps},
              {"broadcasts", broadcasts},
              {"delivered", delivered},
              {"dropped", dropped},
              {"duplicated", duplicated},
              {"max_dq_len", max_dq_len},
              {"mean_dq_len_after_delivery", mean_dq_len_after_delivery()}};
}

Simulation::Simulation(SimConfig cfg) : cfg_(cfg), rng_(cfg.seed) {
  cfg_.validate();
  x_ = execution_new<Json>(cfg_.n_procs);
}

std::size_t Simulation::total_queued() const {
  std::size_t total = 0;
  for (const auto& p : x_.procs) total += p.delay_queue.size();
  return total;
}

// rng_() % n is deterministic everywhere, unlike uniform_int_distribution;
// the modulo bias is irrelevant for scheduling draws.
std::size_t Simulation::draw_index(std::size_t n) {
  return static_cast<std::size_t>(draw_u64() % n);
}

double Simulation::draw_unit() {
  return static_cast<double>(draw_u64() >> 11) * 0x1.0p-53;
}

Simulation::Category Simulation::draw_category(bool b_en, bool r_en,
                                               bool d_en) {
  double total = 0.0;
  if (b_en) total += cfg_.broadcast_weight;
  if (r_en) total += cfg_.receive_weight;
  if (d_en) total += cfg_.deliver_weight;
  if (total <= 0.0) {
    // Weights can zero out an enabled category; fall back to uniform over
    // the enabled ones so enabled work still gets scheduled.
    std::vector<Category> enabled;
    if (b_en) enabled.push_back(Category::Broadcast);
    if (r_en) enabled.push_back(Category::Receive);
    if (d_en) enabled.push_back(Category::Deliver);
    return enabled[draw_index(enabled.size())];
  }
  double u = draw_unit() * total;
  if (b_en) {
    if (u < cfg_.broadcast_weight) return Category::Broadcast;
    u -= cfg_.broadcast_weight;
  }
  if (r_en) {
    if (u < cfg_.receive_weight) return Category::Receive;
    u -= cfg_.receive_weight;
  }
  return Category::Deliver;
}

void Simulation::note_queue_lengths() {
  for (const auto& p : x_.procs) {
    stats_.max_dq_len = std::max(stats_.max_dq_len, p.delay_queue.size());
  }
}

StepRecord Simulation::do_broadcast() {
  const ProcessId pid = static_cast<ProcessId>(draw_index(cfg_.n_procs));
  ProcessState<Json>& p = x_.procs[pid];
  auto result = broadcast(Json(payload_counter_++), p);
  p = std::move(result.state);
  ++stats_.broadcasts;
  ++stats_.delivered;  // self-delivery
  stats_.dq_len_after_delivery_sum += p.delay_queue.size();
  trace_.push_back(TraceEvent{TraceEvent::Kind::Broadcast, pid, result.message});
  trace_.push_back(TraceEvent{TraceEvent::Kind::Deliver, pid, result.message});
  // Fan out to every other process; each leg independently lossy.
  for (ProcessId dest = 0; dest < cfg_.n_procs; ++dest) {
    if (dest == pid) continue;
    if (draw_unit() < cfg_.p_drop) {
      ++stats_.dropped;
      continue;
    }
    x_.network.emplace_back(dest, result.message);
    if (draw_unit() < cfg_.p_duplicate) {
      x_.network.emplace_back(dest, result.message);
      ++stats_.duplicated;
    }
  }
  return StepRecord{StepRecord::Action::Broadcast, pid, result.message.id()};
}

StepRecord Simulation::do_receive(std::size_t network_index) {
  auto [dest, m] = x_.network[network_index];
  x_.network.erase(x_.network.begin() + static_cast<std::ptrdiff_t>(network_index));
  x_.procs[dest] = receive(m, x_.procs[dest]);
  note_queue_lengths();
  trace_.push_back(TraceEvent{TraceEvent::Kind::Receive, dest, m});
  return StepRecord{StepRecord::Action::Receive, dest, m.id()};
}

StepRecord Simulation::do_deliver(ProcessId pid) {
  auto result = deliver(x_.procs[pid]);
  if (!result) {
    return StepRecord{StepRecord::Action::DeliverNoop, pid, std::nullopt};
  }
  x_.procs[pid] = std::move(result->state);
  ++stats_.delivered;
  stats_.dq_len_after_delivery_sum += x_.procs[pid].delay_queue.size();
  trace_.push_back(
      TraceEvent{TraceEvent::Kind::Deliver, pid, result->message});
  return StepRecord{StepRecord::Action::Deliver, pid, result->message.id()};
}

StepRecord Simulation::x_step() {
  const bool b_en = broadcasts_enabled_;
  const bool r_en = !x_.network.empty();
  const bool d_en = total_queued() > 0;
  if (!b_en && !r_en && !d_en) {
    return StepRecord{};  // quiescent
  }
  StepRecord rec;
  switch (draw_category(b_en, r_en, d_en)) {
    case Category::Broadcast:
      rec = do_broadcast();
      break;
    case Category::Receive:
      rec = do_receive(draw_index(x_.network.size()));
      break;
    case Category::Deliver:
      rec = do_deliver(static_cast<ProcessId>(draw_index(cfg_.n_procs)));
      break;
  }
  ++stats_.steps;
  note_queue_lengths();
  return rec;
}

const RunStats& Simulation::run() {
  for (std::size_t i = stats_.steps; i < cfg_.max_steps; ++i) {
    if (x_step().action == StepRecord::Action::Quiescent) break;
  }
  return stats_;
}

std::size_t Simulation::drain() {
  broadcasts_enabled_ = false;
  std::size_t delivered = 0;
  // Each pass either shrinks the network or delivers something, so the pass
  // count is bounded by the outstanding work; exceeding it means a stuck
  // scheduler, not a protocol state.
  const std::size_t pass_budget =
      cfg_.n_procs * x_.network.size() + total_queued() + 2;
  for (std::size_t pass = 0;; ++pass) {
    if (pass > pass_budget) {
      throw std::logic_error("drain made no progress within its budget");
    }
    bool progressed = false;
    while (!x_.network.empty()) {
      do_receive(0);
      progressed = true;
    }
    for (ProcessId pid = 0; pid < cfg_.n_procs; ++pid) {
      while (do_deliver(pid).action == StepRecord::Action::Deliver) {
        ++delivered;
        progressed = true;
      }
    }
    if (!progressed) break;
  }
  return delivered;
}

namespace {

// Applies a broadcast at pid, returning the message; no network model, the
// scripts below hand messages around explicitly.
Message<Json> script_broadcast(ExecutionState<Json>& x, ProcessId pid,
                               const char* payload) {
  auto result = broadcast(Json(payload), x.procs[pid]);
  x.procs[pid] = std::move(result.state);
  return result.message;
}

void script_receive(ExecutionState<Json>& x, ProcessId pid,
                    const Message<Json>& m) {
  x.procs[pid] = receive(m, x.procs[pid]);
}

// Delivers one message at pid, which the scripts expect to succeed.
Message<Json> script_deliver(ExecutionState<Json>& x, ProcessId pid) {
  auto result = deliver(x.procs[pid]);
  if (!result) throw std::logic_error("scripted delivery found nothing");
  x.procs[pid] = std::move(result->state);
  return result->message;
}

bool deliver_blocked(ExecutionState<Json>& x, ProcessId pid) {
  return !deliver(x.procs[pid]).has_value();
}

}  // namespace

ScenarioReplay replay_scenarios() {
  ScenarioReplay out;

  // Chain: 0 broadcasts m1; 1 delivers it and replies with m2; 2 broadcasts
  // m3 independently. Everyone ends up delivering everything.
  {
    auto x = execution_new<Json>(3);
    const auto m1 = script_broadcast(x, 0, "m1");
    script_receive(x, 1, m1);
    script_deliver(x, 1);
    const auto m2 = script_broadcast(x, 1, "m2");
    const auto m3 = script_broadcast(x, 2, "m3");
    // Process 2 sees the reply before the message it depends on.
    script_receive(x, 2, m2);
    script_receive(x, 2, m1);
    script_deliver(x, 2);  // m1
    script_deliver(x, 2);  // m2
    script_receive(x, 0, m3);
    script_deliver(x, 0);
    script_receive(x, 0, m2);
    script_deliver(x, 0);
    script_receive(x, 1, m3);
    script_deliver(x, 1);
    out.chain = std::move(x);
    out.chain_m1_vc = m1.vc;
    out.chain_m2_vc = m2.vc;
    out.chain_m3_vc = m3.vc;
  }

  // Same-sender reordering: process 2 receives the sender's second message
  // first and must buffer it until the first arrives.
  {
    auto x = execution_new<Json>(3);
    const auto first = script_broadcast(x, 0, "first");
    const auto second = script_broadcast(x, 0, "second");
    script_receive(x, 1, first);
    script_deliver(x, 1);
    script_receive(x, 1, second);
    script_deliver(x, 1);
    script_receive(x, 2, second);
    out.fifo_second_buffered = deliver_blocked(x, 2) &&
                               x.procs[2].delay_queue.size() == 1;
    script_receive(x, 2, first);
    script_deliver(x, 2);  // first
    script_deliver(x, 2);  // second
    out.fifo_receiver_vc = x.procs[2].vc;
    out.fifo = std::move(x);
    out.fifo_first_vc = first.vc;
    out.fifo_second_vc = second.vc;
  }

  // Cross-sender dependency: process 1 replies after delivering both of 0's
  // messages; process 2 receives the reply before 0's second message and
  // must buffer it.
  {
    auto x = execution_new<Json>(3);
    const auto first = script_broadcast(x, 0, "first");
    const auto second = script_broadcast(x, 0, "second");
    script_receive(x, 1, first);
    script_deliver(x, 1);
    script_receive(x, 1, second);
    script_deliver(x, 1);
    const auto reply = script_broadcast(x, 1, "reply");
    script_receive(x, 2, first);
    script_deliver(x, 2);
    script_receive(x, 2, reply);
    out.transitive_reply_buffered = deliver_blocked(x, 2) &&
                                    x.procs[2].delay_queue.size() == 1;
    script_receive(x, 2, second);
    script_deliver(x, 2);  // second
    script_deliver(x, 2);  // reply
    out.transitive_receiver_vc = x.procs[2].vc;
    out.transitive = std::move(x);
    out.transitive_reply_vc = reply.vc;
  }

  return out;
}

}  // namespace cbcast
