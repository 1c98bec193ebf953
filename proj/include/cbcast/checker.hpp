#pragma once

#include <algorithm>
#include <cstdint>
#include <deque>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "cbcast/protocol.hpp"

namespace cbcast {

/// Global snapshot for verification and simulation: one ProcessState per id
/// plus the multiset of in-flight (destination, message) pairs. Not part of
/// the runtime protocol; processes never see this object.
template <typename R>
struct ExecutionState {
  std::vector<ProcessState<R>> procs;              // procs[i].id == i
  std::vector<std::pair<ProcessId, Message<R>>> network;  // in-flight

  std::size_t cluster_size() const { return procs.size(); }
};

template <typename R>
ExecutionState<R> execution_new(std::size_t n) {
  ExecutionState<R> x;
  x.procs.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    x.procs.push_back(process_new<R>(n, static_cast<ProcessId>(i)));
  }
  return x;
}

enum class ViolationKind : std::uint8_t { Lcd, Cd, Correspondence };

inline const char* to_string(ViolationKind k) {
  switch (k) {
    case ViolationKind::Lcd: return "lcd";
    case ViolationKind::Cd: return "cd";
    default: return "correspondence";
  }
}

/// One concrete counterexample to a checked property.
struct Violation {
  ViolationKind kind = ViolationKind::Lcd;
  ProcessId pid = 0;
  MessageId m1;  // the message that should have come first
  MessageId m2;
  std::string explanation;
};

/// True iff both events occur in h and e1 occurred before e2. Histories are
/// newest-first, so "before" means e1 sits at a larger index than e2.
/// Irreflexive; false when either event is absent.
template <typename R>
bool process_order(const History<R>& h, const Event<R>& e1,
                   const Event<R>& e2) {
  const EventKey k1 = event_key(e1);
  const EventKey k2 = event_key(e2);
  if (k1 == k2) return false;
  std::optional<std::size_t> pos1, pos2;
  for (std::size_t i = 0; i < h.size(); ++i) {
    const EventKey k = event_key(h[i]);
    if (k == k1) pos1 = i;
    if (k == k2) pos2 = i;
  }
  return pos1 && pos2 && *pos1 > *pos2;
}

namespace detail {

/// Deliveries on h for process pid, oldest first.
template <typename R>
std::vector<Message<R>> deliveries_in_order(ProcessId pid,
                                            const History<R>& h) {
  std::vector<Message<R>> out;
  for (auto it = h.rbegin(); it != h.rend(); ++it) {
    if (const auto* d = std::get_if<DeliverEvent<R>>(&*it)) {
      if (d->pid == pid) out.push_back(d->message);
    }
  }
  return out;
}

}  // namespace detail

/// Local causal delivery, checked exhaustively: every ordered pair of
/// messages delivered at pid whose clocks are ordered must have been
/// delivered in that order. Quadratic in the number of deliveries, which is
/// fine at the intended scale (histories of at most a few thousand events).
template <typename R>
std::vector<Violation> check_lcd(ProcessId pid, const History<R>& h) {
  std::vector<Violation> out;
  const auto delivered = detail::deliveries_in_order(pid, h);
  for (std::size_t i = 0; i < delivered.size(); ++i) {
    for (std::size_t j = i + 1; j < delivered.size(); ++j) {
      // delivered[i] came first; flag iff the later message is vc-smaller.
      if (less(delivered[j].vc, delivered[i].vc)) {
        out.push_back(Violation{
            ViolationKind::Lcd, pid, delivered[j].id(), delivered[i].id(),
            "process " + std::to_string(pid) + " delivered " +
                delivered[j].id().to_string() + " (vc " +
                delivered[j].vc.to_string() + ") after " +
                delivered[i].id().to_string() + " (vc " +
                delivered[i].vc.to_string() + ") despite the clock order"});
      }
    }
  }
  return out;
}

/// Happens-before as explicit graph reachability, independent of vector
/// clocks: nodes are the events of all histories, edges are consecutive
/// process order plus broadcast-to-delivery, and hb is the transitive
/// closure. This is the oracle the clock-based implementation is checked
/// against.
template <typename R>
class HappensBefore {
 public:
  explicit HappensBefore(const ExecutionState<R>& x) {
    // Collect nodes. Histories are required to be duplicate-free; the
    // protocol guarantees it, and hand-built inputs are rejected here.
    std::map<MessageId, std::vector<std::size_t>> delivers_by_msg;
    for (const ProcessState<R>& p : x.procs) {
      const History<R>& h = p.history;
      std::size_t prev = SIZE_MAX;
      // Oldest first so that edges point forward in time.
      for (auto it = h.rbegin(); it != h.rend(); ++it) {
        const EventKey key = event_key(*it);
        auto [slot, fresh] = index_.emplace(key, nodes_.size());
        if (!fresh) {
          throw std::invalid_argument("duplicate event in execution: " +
                                      key.to_string());
        }
        nodes_.push_back(key);
        edges_.emplace_back();
        const std::size_t cur = slot->second;
        if (key.kind == EventKind::Deliver) {
          delivers_by_msg[key.msg].push_back(cur);
        }
        if (prev != SIZE_MAX) edges_[prev].push_back(cur);
        prev = cur;
      }
    }
    // Broadcast -> every delivery of the same message.
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
      if (nodes_[i].kind != EventKind::Broadcast) continue;
      auto slot = delivers_by_msg.find(nodes_[i].msg);
      if (slot == delivers_by_msg.end()) continue;
      edges_[i].insert(edges_[i].end(), slot->second.begin(),
                       slot->second.end());
    }
    reach_.assign(nodes_.size(), {});
  }

  bool contains(const EventKey& key) const { return index_.count(key) != 0; }

  /// Reachability over one or more edges. hb(e, e) is false unless the input
  /// contains a cycle (impossible for protocol-generated executions).
  bool reaches(const EventKey& from, const EventKey& to) const {
    auto f = index_.find(from);
    auto t = index_.find(to);
    if (f == index_.end() || t == index_.end()) return false;
    return reach_set(f->second)[t->second];
  }

  std::vector<EventKey> events() const { return nodes_; }

 private:
  const std::vector<bool>& reach_set(std::size_t src) const {
    std::vector<bool>& seen = reach_[src];
    if (!seen.empty()) return seen;
    seen.assign(nodes_.size(), false);
    std::vector<std::size_t> stack(edges_[src].begin(), edges_[src].end());
    while (!stack.empty()) {
      const std::size_t v = stack.back();
      stack.pop_back();
      if (seen[v]) continue;
      seen[v] = true;
      for (std::size_t w : edges_[v]) {
        if (!seen[w]) stack.push_back(w);
      }
    }
    return seen;
  }

  std::vector<EventKey> nodes_;
  std::vector<std::vector<std::size_t>> edges_;
  std::map<EventKey, std::size_t> index_;
  mutable std::vector<std::vector<bool>> reach_;  // lazily filled per source
};

/// One-shot hb query. Throws if either event is absent from the execution.
template <typename R>
bool happens_before(const ExecutionState<R>& x, const Event<R>& e1,
                    const Event<R>& e2) {
  HappensBefore<R> hb(x);
  const EventKey k1 = event_key(e1);
  const EventKey k2 = event_key(e2);
  if (!hb.contains(k1)) {
    throw std::invalid_argument("event not in execution: " + k1.to_string());
  }
  if (!hb.contains(k2)) {
    throw std::invalid_argument("event not in execution: " + k2.to_string());
  }
  return hb.reaches(k1, k2);
}

namespace detail {

/// All broadcast messages of the execution (one Broadcast event each).
template <typename R>
std::vector<Message<R>> broadcast_messages(const ExecutionState<R>& x) {
  std::vector<Message<R>> out;
  for (const ProcessState<R>& p : x.procs) {
    for (auto it = p.history.rbegin(); it != p.history.rend(); ++it) {
      if (const auto* b = std::get_if<BroadcastEvent<R>>(&*it)) {
        out.push_back(b->message);
      }
    }
  }
  return out;
}

}  // namespace detail

/// Causal delivery over a whole execution: for every process and every pair
/// of messages it delivered, a happens-before order between their broadcasts
/// must match the delivery order. hb comes from the graph closure, never from
/// clocks. Quadratic per process over its deliveries.
template <typename R>
std::vector<Violation> check_cd(const ExecutionState<R>& x,
                                const HappensBefore<R>& hb) {
  std::vector<Violation> out;
  for (const ProcessState<R>& p : x.procs) {
    const auto delivered = detail::deliveries_in_order(p.id, p.history);
    for (std::size_t i = 0; i < delivered.size(); ++i) {
      for (std::size_t j = i + 1; j < delivered.size(); ++j) {
        const EventKey b_early{EventKind::Broadcast, delivered[i].sender,
                               delivered[i].id()};
        const EventKey b_late{EventKind::Broadcast, delivered[j].sender,
                              delivered[j].id()};
        if (hb.reaches(b_late, b_early)) {
          out.push_back(Violation{
              ViolationKind::Cd, p.id, delivered[j].id(), delivered[i].id(),
              "process " + std::to_string(p.id) + " delivered " +
                  delivered[j].id().to_string() + " after " +
                  delivered[i].id().to_string() +
                  " although its broadcast happens-before the other"});
        }
      }
    }
  }
  return out;
}

template <typename R>
std::vector<Violation> check_cd(const ExecutionState<R>& x) {
  return check_cd(x, HappensBefore<R>(x));
}

/// The clock/causality correspondence, tested on both directions for every
/// ordered pair of broadcast messages: hb(broadcast m, broadcast m') must
/// hold exactly when vc(m) < vc(m').
template <typename R>
std::vector<Violation> check_vc_hb_correspondence(
    const ExecutionState<R>& x, const HappensBefore<R>& hb) {
  std::vector<Violation> out;
  const auto msgs = detail::broadcast_messages(x);
  for (std::size_t i = 0; i < msgs.size(); ++i) {
    for (std::size_t j = 0; j < msgs.size(); ++j) {
      if (i == j) continue;
      const EventKey bi{EventKind::Broadcast, msgs[i].sender, msgs[i].id()};
      const EventKey bj{EventKind::Broadcast, msgs[j].sender, msgs[j].id()};
      const bool ordered_by_hb = hb.reaches(bi, bj);
      const bool ordered_by_vc = less(msgs[i].vc, msgs[j].vc);
      if (ordered_by_hb != ordered_by_vc) {
        out.push_back(Violation{
            ViolationKind::Correspondence, msgs[i].sender, msgs[i].id(),
            msgs[j].id(),
            "hb(" + msgs[i].id().to_string() + "," + msgs[j].id().to_string() +
                ")=" + (ordered_by_hb ? "true" : "false") + " but vc order " +
                msgs[i].vc.to_string() + " < " + msgs[j].vc.to_string() + " = " +
                (ordered_by_vc ? "true" : "false")});
      }
    }
  }
  return out;
}

template <typename R>
std::vector<Violation> check_vc_hb_correspondence(const ExecutionState<R>& x) {
  return check_vc_hb_correspondence(x, HappensBefore<R>(x));
}

/// LCD on every process, CD, and the correspondence oracle in one pass.
template <typename R>
std::vector<Violation> check_all(const ExecutionState<R>& x) {
  std::vector<Violation> out;
  for (const ProcessState<R>& p : x.procs) {
    auto v = check_lcd(p.id, p.history);
    out.insert(out.end(), v.begin(), v.end());
  }
  const HappensBefore<R> hb(x);
  auto cd = check_cd(x, hb);
  out.insert(out.end(), cd.begin(), cd.end());
  auto corr = check_vc_hb_correspondence(x, hb);
  out.insert(out.end(), corr.begin(), corr.end());
  return out;
}

}  // namespace cbcast
