#include "cbcast/kvs/node.hpp"

namespace cbcast::kvs {

NodeCore::NodeCore(std::size_t n, ProcessId id)
    : n_(n), id_(id), proc_(process_new<Json>(n, id)) {}

VectorClock NodeCore::broadcast_command(const KvCommand& cmd) {
  std::lock_guard lock(mu_);
  auto result = broadcast(cmd.to_json(), proc_);
  proc_ = std::move(result.state);
  apply_command(store_, result.message);
  outbound_.push_back(result.message);
  cv_.notify_all();
  return result.message.vc;
}

VectorClock NodeCore::put(const std::string& key, Json value) {
  return broadcast_command(KvCommand::put(key, std::move(value)));
}

VectorClock NodeCore::erase(const std::string& key) {
  return broadcast_command(KvCommand::del(key));
}

std::optional<Json> NodeCore::get(const std::string& key) const {
  std::lock_guard lock(mu_);
  return store_.get(key);
}

void NodeCore::receive_message(const Message<Json>& m) {
  if (m.vc.size() != n_) {
    throw std::invalid_argument("message clock length " +
                                std::to_string(m.vc.size()) +
                                " does not match cluster size " +
                                std::to_string(n_));
  }
  std::lock_guard lock(mu_);
  proc_ = receive(m, proc_);
  cv_.notify_all();
}

bool NodeCore::deliver_apply_one() {
  std::lock_guard lock(mu_);
  auto result = deliver(proc_);
  if (!result) return false;
  proc_ = std::move(result->state);
  apply_command(store_, result->message);
  ++delivered_count_;
  dq_len_after_delivery_sum_ += proc_.delay_queue.size();
  return true;
}

std::size_t NodeCore::deliver_apply_all() {
  std::size_t n = 0;
  while (deliver_apply_one()) ++n;
  return n;
}

std::vector<Message<Json>> NodeCore::take_outbound(std::size_t max) {
  std::lock_guard lock(mu_);
  std::size_t take = outbound_.size();
  if (max != 0 && max < take) take = max;
  std::vector<Message<Json>> out(outbound_.begin(),
                                 outbound_.begin() + static_cast<std::ptrdiff_t>(take));
  outbound_.erase(outbound_.begin(),
                  outbound_.begin() + static_cast<std::ptrdiff_t>(take));
  return out;
}

bool NodeCore::has_outbound() const {
  std::lock_guard lock(mu_);
  return !outbound_.empty();
}

void NodeCore::wait_for_change(std::chrono::milliseconds timeout) const {
  std::unique_lock lock(mu_);
  cv_.wait_for(lock, timeout);
}

void NodeCore::poke() const { cv_.notify_all(); }

NodeMetrics NodeCore::metrics() const {
  std::lock_guard lock(mu_);
  NodeMetrics m;
  m.delivered_count = delivered_count_;
  m.queued_count = proc_.delay_queue.size();
  m.mean_dq_after_delivery =
      delivered_count_ == 0
          ? 0.0
          : static_cast<double>(dq_len_after_delivery_sum_) /
                static_cast<double>(delivered_count_);
  return m;
}

Json NodeCore::canonical_store() const {
  std::lock_guard lock(mu_);
  return store_.canonical();
}

ProcessState<Json> NodeCore::state_snapshot() const {
  std::lock_guard lock(mu_);
  return proc_;
}

}  // namespace cbcast::kvs
