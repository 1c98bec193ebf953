#include "cbcast/kvs/store.hpp"

namespace cbcast::kvs {

bool tag_wins(const WriteTag& challenger, const WriteTag& incumbent) {
  const std::uint64_t cs = challenger.vc.sum();
  const std::uint64_t is = incumbent.vc.sum();
  if (cs != is) return cs > is;
  return challenger.sender > incumbent.sender;
}

std::optional<Json> Store::get(const std::string& key) const {
  auto it = entries_.find(key);
  if (it == entries_.end() || it->second.tombstone) return std::nullopt;
  return it->second.value;
}

void Store::apply(const Message<Json>& m) {
  const KvCommand cmd = KvCommand::from_json(m.raw);
  const WriteTag tag{m.vc, m.sender};
  auto it = entries_.find(cmd.key);
  if (it != entries_.end() && !tag_wins(tag, it->second.tag)) {
    return;  // an already-applied write outranks this one
  }
  StoreEntry entry;
  entry.tag = tag;
  if (cmd.kind == KvCommand::Kind::Put) {
    entry.value = cmd.value;
  } else {
    entry.tombstone = true;
  }
  entries_[cmd.key] = std::move(entry);
}

Json Store::canonical() const {
  Json out = Json::object();
  for (const auto& [key, entry] : entries_) {
    out[key] = Json{{"value", entry.value},
                    {"tag", Json{{"vc", entry.tag.vc.entries()},
                                 {"sender", entry.tag.sender}}},
                    {"tombstone", entry.tombstone}};
  }
  return out;
}

std::size_t Store::live_size() const {
  std::size_t n = 0;
  for (const auto& [key, entry] : entries_) {
    if (!entry.tombstone) ++n;
  }
  return n;
}

}  // namespace cbcast::kvs
