#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

namespace cbcast {

/// Process identifier; doubles as an index into vector clocks (zero-indexed).
using ProcessId = std::uint32_t;

/// A fixed-length vector of per-process event counters. The length is the
/// cluster size and is fixed at construction; every binary operation demands
/// operands of equal length and throws std::invalid_argument otherwise.
///
/// Counters are 64-bit. Overflow would take 2^64 broadcasts from one process
/// and is treated as a bug (checked by assertion in debug builds).
///
/// Values are immutable: tick() returns a new clock. Safe to share across
/// threads.
class VectorClock {
 public:
  VectorClock() = default;
  explicit VectorClock(std::vector<std::uint64_t> entries)
      : entries_(std::move(entries)) {}

  /// All-zero clock for a cluster of n processes. n == 0 is an invalid
  /// configuration and throws std::invalid_argument.
  static VectorClock zeros(std::size_t n);

  std::size_t size() const { return entries_.size(); }
  std::uint64_t operator[](std::size_t k) const { return entries_[k]; }

  /// Bounds-checked access; throws std::out_of_range.
  std::uint64_t at(std::size_t k) const;

  const std::vector<std::uint64_t>& entries() const { return entries_; }

  /// Copy of this clock with entry i incremented by one.
  VectorClock ticked(ProcessId i) const;

  /// Sum of all entries (total events covered); used by deterministic
  /// tie-breaking orders layered on top of the partial order.
  std::uint64_t sum() const;

  std::string to_string() const;

  friend bool operator==(const VectorClock&, const VectorClock&) = default;

 private:
  std::vector<std::uint64_t> entries_;
};

/// Pointwise maximum of two clocks of equal length.
VectorClock combine(const VectorClock& a, const VectorClock& b);

/// a <= b pointwise.
bool less_equal(const VectorClock& a, const VectorClock& b);

/// Strict partial order: a <= b pointwise and a != b.
bool less(const VectorClock& a, const VectorClock& b);

/// Neither a <= b nor b <= a: the clocks are causally independent.
bool concurrent(const VectorClock& a, const VectorClock& b);

}  // namespace cbcast
