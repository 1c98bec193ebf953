#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "cbcast/checker.hpp"
#include "cbcast/trace.hpp"

namespace cbcast {

/// Parameters of one deterministic randomized run. The PRNG algorithm is
/// pinned (mt19937_64, with in-house bounded draws) so that a (config, seed)
/// pair reproduces the same trace bytes on any platform or compiler.
struct SimConfig {
  std::size_t n_procs = 3;
  std::uint64_t seed = 0;
  std::size_t max_steps = 100;
  double p_drop = 0.0;       // per-recipient loss probability
  double p_duplicate = 0.0;  // per-recipient duplication probability
  double broadcast_weight = 1.0;
  double receive_weight = 2.0;
  double deliver_weight = 2.0;

  static constexpr const char* kRngAlgorithm = "mt19937_64";

  /// Throws std::invalid_argument on a nonsensical configuration.
  void validate() const;

  Json to_json() const;
};

/// What one global step did.
struct StepRecord {
  enum class Action : std::uint8_t {
    Broadcast,
    Receive,
    Deliver,
    DeliverNoop,  // deliver drawn on a process with nothing deliverable
    Quiescent,    // nothing enabled; only reachable with broadcasts disabled
  };
  Action action = Action::Quiescent;
  ProcessId pid = 0;
  std::optional<MessageId> msg;
};

struct RunStats {
  std::size_t steps = 0;       // x_step calls that did something (incl. noops)
  std::size_t broadcasts = 0;
  std::size_t delivered = 0;   // deliver events recorded, self-delivery included
  std::size_t dropped = 0;     // fan-out entries lost to p_drop
  std::size_t duplicated = 0;  // extra fan-out entries from p_duplicate
  std::size_t max_dq_len = 0;
  std::uint64_t dq_len_after_delivery_sum = 0;

  double mean_dq_len_after_delivery() const {
    return delivered == 0
               ? 0.0
               : static_cast<double>(dq_len_after_delivery_sum) /
                     static_cast<double>(delivered);
  }

  Json to_json() const;
};

/// Seeded global-step executor over an ExecutionState with an adversarial
/// in-flight network: broadcasts fan out to every other process, entries are
/// received in PRNG order, and each fan-out entry is independently dropped or
/// duplicated per the config. Single-threaded; run one instance per thread.
class Simulation {
 public:
  explicit Simulation(SimConfig cfg);

  const SimConfig& config() const { return cfg_; }
  const ExecutionState<Json>& execution() const { return x_; }
  const std::vector<TraceEvent>& trace() const { return trace_; }
  const RunStats& stats() const { return stats_; }

  std::size_t network_size() const { return x_.network.size(); }
  std::size_t total_queued() const;

  /// One weighted-random step among the enabled action categories. A
  /// category that is not enabled (receive with an empty network, deliver
  /// with every queue empty) is never drawn; if none is enabled the step
  /// reports quiescence and changes nothing.
  StepRecord x_step();

  /// Runs x_step up to the configured budget (stopping early on quiescence)
  /// and returns the stats.
  const RunStats& run();

  /// Stops broadcasting and alternates receives and deliveries until the
  /// network is empty and nothing more is deliverable. Returns how many
  /// messages were delivered while draining. With p_drop == 0 this leaves
  /// every delay queue empty; with losses, messages with lost dependencies
  /// legitimately stay queued. Guarded against non-termination.
  std::size_t drain();

 private:
  enum class Category : std::uint8_t { Broadcast, Receive, Deliver };

  std::uint64_t draw_u64() { return rng_(); }
  std::size_t draw_index(std::size_t n);
  double draw_unit();
  Category draw_category(bool b_en, bool r_en, bool d_en);

  StepRecord do_broadcast();
  StepRecord do_receive(std::size_t network_index);
  StepRecord do_deliver(ProcessId pid);

  void note_queue_lengths();

  SimConfig cfg_;
  ExecutionState<Json> x_;
  std::mt19937_64 rng_;
  std::vector<TraceEvent> trace_;
  RunStats stats_;
  std::uint64_t payload_counter_ = 0;
  bool broadcasts_enabled_ = true;
};

/// Scripted (non-random) three-process runs exercising the protocol's
/// canonical situations, with the values golden tests pin down.
struct ScenarioReplay {
  // Causal chain: one process broadcasts, a second delivers it and replies,
  // a third broadcasts independently.
  ExecutionState<Json> chain;
  VectorClock chain_m1_vc, chain_m2_vc, chain_m3_vc;

  // Same-sender reordering: the sender's second message reaches one receiver
  // first and must wait for the first.
  ExecutionState<Json> fifo;
  VectorClock fifo_first_vc, fifo_second_vc;
  bool fifo_second_buffered = false;
  VectorClock fifo_receiver_vc;  // final clock of the receiver that reordered

  // Cross-sender dependency: a reply overtakes the message it depends on at
  // a third process and must wait for it.
  ExecutionState<Json> transitive;
  VectorClock transitive_reply_vc;
  bool transitive_reply_buffered = false;
  VectorClock transitive_receiver_vc;
};

ScenarioReplay replay_scenarios();

}  // namespace cbcast
