#pragma once

#include <compare>
#include <cstdint>
#include <deque>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <variant>

#include "cbcast/vector_clock.hpp"

namespace cbcast {

/// Identity of a broadcast message: each sender's own clock entry is unique
/// per broadcast, so (sender, vc[sender]) names a message globally.
struct MessageId {
  ProcessId sender = 0;
  std::uint64_t seq = 0;

  auto operator<=>(const MessageId&) const = default;

  std::string to_string() const {
    return "m(" + std::to_string(sender) + "," + std::to_string(seq) + ")";
  }
};

/// A broadcast message: opaque payload plus the causal metadata attached by
/// the sender (its clock as of the broadcast, post-increment).
template <typename R>
struct Message {
  VectorClock vc;
  ProcessId sender = 0;
  R raw{};

  /// The sender's own entry, i.e. this message's per-sender sequence number.
  std::uint64_t seq() const { return vc.at(sender); }

  MessageId id() const { return MessageId{sender, seq()}; }
};

template <typename R>
struct BroadcastEvent {
  Message<R> message;
};

template <typename R>
struct DeliverEvent {
  ProcessId pid = 0;  // the process on whose history the event resides
  Message<R> message;
};

template <typename R>
using Event = std::variant<BroadcastEvent<R>, DeliverEvent<R>>;

/// Per-process event log, newest-first: new events are pushed at the front.
template <typename R>
using History = std::deque<Event<R>>;

enum class EventKind : std::uint8_t { Broadcast, Deliver };

/// Value identity of an event: kind, the history it belongs to, and the
/// message identity. Payloads play no part.
struct EventKey {
  EventKind kind = EventKind::Broadcast;
  ProcessId pid = 0;
  MessageId msg;

  auto operator<=>(const EventKey&) const = default;

  std::string to_string() const {
    return std::string(kind == EventKind::Broadcast ? "broadcast" : "deliver") +
           "@" + std::to_string(pid) + ":" + msg.to_string();
  }
};

template <typename R>
EventKey event_key(const Event<R>& e) {
  if (const auto* b = std::get_if<BroadcastEvent<R>>(&e)) {
    return EventKey{EventKind::Broadcast, b->message.sender, b->message.id()};
  }
  const auto& d = std::get<DeliverEvent<R>>(e);
  return EventKey{EventKind::Deliver, d.pid, d.message.id()};
}

/// Supremum of the clocks on Deliver events in h (zeros if there are none).
/// Broadcast events do not contribute. n is the cluster size, needed because
/// an empty history carries no length information.
template <typename R>
VectorClock hist_vc(const History<R>& h, std::size_t n) {
  VectorClock acc = VectorClock::zeros(n);
  for (const Event<R>& e : h) {
    if (const auto* d = std::get_if<DeliverEvent<R>>(&e)) {
      acc = combine(acc, d->message.vc);
    }
  }
  return acc;
}

/// Protocol state of one process. Transitions are pure: every operation
/// returns a fresh state and leaves its input untouched, so callers own
/// sequencing (and may freely share values across threads).
///
/// Invariant maintained by all transitions: hist_vc(history) == vc.
template <typename R>
struct ProcessState {
  VectorClock vc;
  ProcessId id = 0;
  std::deque<Message<R>> delay_queue;  // front = next examined
  History<R> history;                  // front = newest

  std::size_t cluster_size() const { return vc.size(); }
};

template <typename R>
ProcessState<R> process_new(std::size_t n, ProcessId id) {
  if (id >= n) {
    throw std::invalid_argument("process id " + std::to_string(id) +
                                " out of range for cluster size " +
                                std::to_string(n));
  }
  ProcessState<R> p;
  p.vc = VectorClock::zeros(n);
  p.id = id;
  return p;
}

/// Deliverability test: m is deliverable at a process whose clock is p_vc iff
/// m is the next-in-sequence message from its sender (entry exactly one
/// greater) and carries no dependency on messages from third parties that the
/// process has not delivered (every other entry <=).
template <typename R>
bool deliverable(const Message<R>& m, const VectorClock& p_vc) {
  if (m.vc.size() != p_vc.size()) {
    throw std::invalid_argument("deliverable: clock length mismatch");
  }
  for (std::size_t k = 0; k < p_vc.size(); ++k) {
    if (k == m.sender) {
      if (m.vc[k] != p_vc[k] + 1) return false;
    } else {
      if (m.vc[k] > p_vc[k]) return false;
    }
  }
  return true;
}

/// Removes and returns the first deliverable message in queue order; the
/// relative order of the remaining messages is preserved.
template <typename R>
std::optional<std::pair<Message<R>, std::deque<Message<R>>>> dequeue(
    const VectorClock& p_vc, std::deque<Message<R>> dq) {
  for (auto it = dq.begin(); it != dq.end(); ++it) {
    if (deliverable(*it, p_vc)) {
      Message<R> m = std::move(*it);
      dq.erase(it);
      return std::make_pair(std::move(m), std::move(dq));
    }
  }
  return std::nullopt;
}

/// Adds a message from the network to the tail of the delay queue.
///
/// Drops, leaving the state unchanged:
///  - self-sent messages (broadcast already delivered them atomically);
///  - duplicates: messages already delivered (per-sender sequence number at
///    or below the process clock's sender entry) or already queued.
/// A duplicate could never satisfy the deliverability test, so dropping it
/// only bounds queue growth; it cannot change delivery order.
template <typename R>
ProcessState<R> receive(const Message<R>& m, const ProcessState<R>& p) {
  if (m.vc.size() != p.cluster_size()) {
    throw std::invalid_argument("receive: clock length mismatch");
  }
  if (m.sender == p.id) return p;
  if (m.seq() <= p.vc.at(m.sender)) return p;  // already delivered
  for (const Message<R>& q : p.delay_queue) {
    if (q.id() == m.id()) return p;  // already queued
  }
  ProcessState<R> out = p;
  out.delay_queue.push_back(m);
  return out;
}

template <typename R>
struct DeliverResult {
  Message<R> message;
  ProcessState<R> state;
};

/// Pops the first deliverable message off the delay queue, if any, combining
/// its clock into the process clock and recording the delivery on the
/// history. Returns nothing when no queued message is deliverable.
template <typename R>
std::optional<DeliverResult<R>> deliver(const ProcessState<R>& p) {
  auto popped = dequeue(p.vc, p.delay_queue);
  if (!popped) return std::nullopt;
  auto& [m, rest] = *popped;
  ProcessState<R> out;
  out.vc = combine(m.vc, p.vc);
  out.id = p.id;
  out.delay_queue = std::move(rest);
  out.history = p.history;
  out.history.push_front(DeliverEvent<R>{p.id, m});
  return DeliverResult<R>{std::move(m), std::move(out)};
}

template <typename R>
struct BroadcastResult {
  Message<R> message;
  ProcessState<R> state;
};

/// Wraps raw content in a message stamped with the incremented local clock
/// and delivers it locally in the same step: the message goes to the head of
/// the delay queue, the broadcast is recorded on the history, and deliver()
/// is invoked, which must select exactly that message (a fresh self-sent
/// message is always immediately deliverable). The caller puts the returned
/// message on the network.
///
/// The internal deliver failing would mean a corrupted state, not a
/// recoverable condition, so it raises std::logic_error.
template <typename R>
BroadcastResult<R> broadcast(R raw, const ProcessState<R>& p) {
  Message<R> m{p.vc.ticked(p.id), p.id, std::move(raw)};
  ProcessState<R> staged = p;
  staged.delay_queue.push_front(m);
  staged.history.push_front(BroadcastEvent<R>{m});
  auto delivered = deliver(staged);
  if (!delivered || delivered->message.id() != m.id()) {
    throw std::logic_error("broadcast: own message was not deliverable");
  }
  return BroadcastResult<R>{std::move(m), std::move(delivered->state)};
}

template <typename R>
struct OpReceive {
  Message<R> message;
};

template <typename R>
struct OpBroadcast {
  R raw{};
};

struct OpDeliver {};

template <typename R>
using Op = std::variant<OpReceive<R>, OpBroadcast<R>, OpDeliver>;

/// Dispatches one transition, discarding emitted messages. An OpDeliver with
/// nothing deliverable yields the input state unchanged.
template <typename R>
ProcessState<R> step(const Op<R>& op, const ProcessState<R>& p) {
  if (const auto* r = std::get_if<OpReceive<R>>(&op)) {
    return receive(r->message, p);
  }
  if (const auto* b = std::get_if<OpBroadcast<R>>(&op)) {
    return broadcast(b->raw, p).state;
  }
  auto delivered = deliver(p);
  return delivered ? std::move(delivered->state) : p;
}

/// The clock/history agreement invariant: the process clock must equal the
/// supremum of the clocks on its delivered messages.
template <typename R>
bool agreement_holds(const ProcessState<R>& p) {
  return hist_vc(p.history, p.cluster_size()) == p.vc;
}

}  // namespace cbcast
