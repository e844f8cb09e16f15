// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cstddef>
#include <vector>

#include "lidbench/data.hpp"

namespace lidbench {

struct Neighbor {
  PointId id = 0;
  double dist = 0.0;

  /// Ascending distance, ties by ascending id.
  friend bool operator<(const Neighbor& a, const Neighbor& b) {
    return a.dist < b.dist || (a.dist == b.dist && a.id < b.id);
  }
  friend bool operator>(const Neighbor& a, const Neighbor& b) { return b < a; }
  friend bool operator==(const Neighbor&, const Neighbor&) = default;
};

/// Bounded max-heap retaining the `capacity` smallest neighbors.
class TopK {
 public:
  explicit TopK(std::size_t capacity) : capacity_(capacity) { heap_.reserve(capacity + 1); }

  bool full() const { return heap_.size() >= capacity_; }
  std::size_t size() const { return heap_.size(); }
  const Neighbor& worst() const { return heap_.front(); }

  /// Returns true if the candidate was retained.
  bool push(PointId id, double dist) {
    const Neighbor n{id, dist};
    if (capacity_ == 0) return false;
    if (heap_.size() < capacity_) {
      heap_.push_back(n);
      std::push_heap(heap_.begin(), heap_.end());
      return true;
    }
    if (!(n < heap_.front())) return false;
    std::pop_heap(heap_.begin(), heap_.end());
    heap_.back() = n;
    std::push_heap(heap_.begin(), heap_.end());
    return true;
  }

  std::vector<Neighbor> sorted() && {
    std::sort_heap(heap_.begin(), heap_.end());
    return std::move(heap_);
  }

 private:
  std::size_t capacity_;
  std::vector<Neighbor> heap_;
};

}  // namespace lidbench
