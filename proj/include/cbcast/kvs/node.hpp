#pragma once

#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <deque>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "cbcast/kvs/store.hpp"
#include "cbcast/protocol.hpp"

namespace cbcast::kvs {

struct NodeMetrics {
  double mean_dq_after_delivery = 0.0;
  std::uint64_t delivered_count = 0;  // messages delivered off the delay queue
  std::size_t queued_count = 0;       // current delay-queue length

  Json to_json() const {
    return Json{{"mean_dq_after_delivery", mean_dq_after_delivery},
                {"delivered_count", delivered_count},
                {"queued_count", queued_count}};
  }
};

/// Transport-free replicated KV node: one protocol process plus the store it
/// replicates. Every transition together with its store application runs as
/// one critical section behind an internal mutex, so HTTP handlers, drain
/// threads, and tests can share an instance; network I/O stays outside.
///
/// Messages produced by local client writes pile up in an outbound queue for
/// whatever transport hosts this node.
class NodeCore {
 public:
  NodeCore(std::size_t n, ProcessId id);

  std::size_t cluster_size() const { return n_; }
  ProcessId id() const { return id_; }

  /// Client write: broadcasts the command, applies it locally, queues the
  /// message for peers, and returns the message clock.
  VectorClock put(const std::string& key, Json value);
  VectorClock erase(const std::string& key);

  std::optional<Json> get(const std::string& key) const;

  /// Peer ingress: injects a message into the delay queue (duplicates and
  /// self-sends are dropped by the protocol) and wakes the drain thread.
  /// Throws std::invalid_argument when the clock length is not the cluster
  /// size.
  void receive_message(const Message<Json>& m);

  /// Delivers at most one message and applies it to the store, in the same
  /// critical section. False when nothing is deliverable.
  bool deliver_apply_one();

  /// Drives deliveries to quiescence; returns how many were applied.
  std::size_t deliver_apply_all();

  /// Pops up to max pending outbound messages (all of them for max == 0).
  std::vector<Message<Json>> take_outbound(std::size_t max);
  bool has_outbound() const;

  /// Blocks until something changes (ingress, client write) or the timeout
  /// lapses; lets host threads idle without polling.
  void wait_for_change(std::chrono::milliseconds timeout) const;
  /// Wakes any waiter; used during shutdown.
  void poke() const;

  NodeMetrics metrics() const;
  Json canonical_store() const;
  ProcessState<Json> state_snapshot() const;

 private:
  VectorClock broadcast_command(const KvCommand& cmd);

  const std::size_t n_;
  const ProcessId id_;

  mutable std::mutex mu_;
  mutable std::condition_variable cv_;
  ProcessState<Json> proc_;
  Store store_;
  std::deque<Message<Json>> outbound_;
  std::uint64_t delivered_count_ = 0;
  std::uint64_t dq_len_after_delivery_sum_ = 0;
};

}  // namespace cbcast::kvs
