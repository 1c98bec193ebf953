#pragma once

#include <map>
#include <optional>
#include <string>

#include "cbcast/kvs/command.hpp"
#include "cbcast/protocol.hpp"

namespace cbcast::kvs {

/// Provenance of a write: the clock and sender of the message that carried
/// it. Orders concurrent writes deterministically.
struct WriteTag {
  VectorClock vc;
  ProcessId sender = 0;
};

/// Total-order extension of the clock partial order used for last-writer-
/// wins: compare clock sums, break ties by sender id. Causally later writes
/// always have strictly larger sums, so causal order is respected and the
/// outcome is the same on every replica regardless of delivery interleaving
/// of concurrent writes.
bool tag_wins(const WriteTag& challenger, const WriteTag& incumbent);

struct StoreEntry {
  Json value;
  WriteTag tag;
  bool tombstone = false;  // deletes leave tagged tombstones, kept forever
};

/// The replicated map. Mutations arrive only as delivered messages; reads
/// see the winning write per key.
class Store {
 public:
  /// Current value, or nothing when the key is absent or deleted.
  std::optional<Json> get(const std::string& key) const;

  /// Applies a delivered Put/Delete message under last-writer-wins.
  void apply(const Message<Json>& m);

  /// Full state (values, tags, tombstones) as canonical JSON: object keys
  /// sorted, clock arrays verbatim. Equal replicas serialize identically.
  Json canonical() const;

  std::size_t live_size() const;
  std::size_t entry_count() const { return entries_.size(); }

 private:
  std::map<std::string, StoreEntry> entries_;
};

/// Free-function form of Store::apply.
inline void apply_command(Store& store, const Message<Json>& m) {
  store.apply(m);
}

}  // namespace cbcast::kvs
