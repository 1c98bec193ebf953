#include "cbcast/vector_clock.hpp"

#include <algorithm>
#include <cassert>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace cbcast {

namespace {

void require_same_length(const VectorClock& a, const VectorClock& b) {
  if (a.size() != b.size()) {
    throw std::invalid_argument("vector clock length mismatch: " +
                                std::to_string(a.size()) + " vs " +
                                std::to_string(b.size()));
  }
}

}  // namespace

VectorClock VectorClock::zeros(std::size_t n) {
  if (n == 0) {
    throw std::invalid_argument("cluster size must be at least 1");
  }
  return VectorClock(std::vector<std::uint64_t>(n, 0));
}

std::uint64_t VectorClock::at(std::size_t k) const {
  if (k >= entries_.size()) {
    throw std::out_of_range("vector clock index " + std::to_string(k) +
                            " out of range for length " +
                            std::to_string(entries_.size()));
  }
  return entries_[k];
}

VectorClock VectorClock::ticked(ProcessId i) const {
  if (i >= entries_.size()) {
    throw std::out_of_range("tick index " + std::to_string(i) +
                            " out of range for length " +
                            std::to_string(entries_.size()));
  }
  VectorClock out(*this);
  assert(out.entries_[i] != std::numeric_limits<std::uint64_t>::max());
  ++out.entries_[i];
  return out;
}

std::uint64_t VectorClock::sum() const {
  std::uint64_t total = 0;
  for (std::uint64_t e : entries_) total += e;
  return total;
}

std::string VectorClock::to_string() const {
  std::ostringstream os;
  os << '[';
  for (std::size_t k = 0; k < entries_.size(); ++k) {
    if (k != 0) os << ',';
    os << entries_[k];
  }
  os << ']';
  return os.str();
}

VectorClock combine(const VectorClock& a, const VectorClock& b) {
  require_same_length(a, b);
  std::vector<std::uint64_t> out(a.size());
  for (std::size_t k = 0; k < a.size(); ++k) {
    out[k] = std::max(a[k], b[k]);
  }
  return VectorClock(std::move(out));
}

bool less_equal(const VectorClock& a, const VectorClock& b) {
  require_same_length(a, b);
  for (std::size_t k = 0; k < a.size(); ++k) {
    if (a[k] > b[k]) return false;
  }
  return true;
}

bool less(const VectorClock& a, const VectorClock& b) {
  return less_equal(a, b) && a != b;
}

bool concurrent(const VectorClock& a, const VectorClock& b) {
  return !less_equal(a, b) && !less_equal(b, a);
}

}  // namespace cbcast
