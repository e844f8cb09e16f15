// SPDX-License-Identifier: Apache-2.0
//
// Exact k-NN graph with best-first beam search from the dataset medoid.
#pragma once

#include <algorithm>
#include <functional>
#include <limits>
#include <queue>
#include <vector>

#include "lidbench/index.hpp"
#include "lidbench/neighbors.hpp"
#include "lidbench/parallel.hpp"

namespace lidbench {

class KnnGraphIndex final : public Index {
 public:
  /// `degree` is clamped to n - 1, which yields the complete graph.
  KnnGraphIndex(std::shared_ptr<const Dataset> train, std::size_t degree)
      : Index(std::move(train)) {
    if (degree == 0) throw ValidationError("knngraph degree must be >= 1");
    const std::size_t n = this->train().size();
    degree_ = std::min(degree, n - 1);
    edges_.resize(n * degree_);
    std::vector<double> row_sums(n, 0.0);
    // One pass over all pairs yields both the neighbor lists and the
    // distance sums that pick the medoid.
    detail::parallel_for(n, [&](std::size_t i) {
      TopK top(degree_);
      double sum = 0.0;
      const auto xi = this->train().row(i);
      for (std::size_t j = 0; j < n; ++j) {
        if (j == i) continue;
        const double d = dist(xi, PointId(j));
        sum += d;
        top.push(PointId(j), d);
      }
      row_sums[i] = sum;
      const auto sorted = std::move(top).sorted();
      for (std::size_t e = 0; e < sorted.size(); ++e) edges_[i * degree_ + e] = sorted[e].id;
    });
    entry_ = PointId(std::min_element(row_sums.begin(), row_sums.end()) - row_sums.begin());
  }

  using Index::search;
  Algorithm algorithm() const override { return Algorithm::knngraph; }
  std::uint64_t stored_scalars() const override { return edges_.size() + 1; }

  std::size_t degree() const { return degree_; }
  PointId entry_point() const { return entry_; }
  std::span<const PointId> neighbors(PointId v) const {
    return {edges_.data() + std::size_t(v) * degree_, degree_};
  }

  /// Beam search keeping max(ef, k) results; stops when the closest frontier
  /// node is farther than the worst retained result.
  SearchResult search(std::span<const float> query, std::size_t k,
                      const SearchParams& params) const override {
    check_query(query, k);
    const std::size_t capacity = std::max(params.ef ? params.ef : k, k);
    SearchResult r;
    auto& visited = detail::VisitedSet::local(train().size());
    std::priority_queue<Neighbor, std::vector<Neighbor>, std::greater<>> frontier;
    TopK results(capacity);

    visited.insert(entry_);
    const Neighbor start{entry_, dist(query, entry_)};
    ++r.dist_comps;
    frontier.push(start);
    ++r.aux;
    results.push(start.id, start.dist);

    while (!frontier.empty()) {
      const Neighbor current = frontier.top();
      frontier.pop();
      ++r.aux;
      if (current.dist > results.worst().dist) break;
      for (PointId v : neighbors(current.id)) {
        if (!visited.insert(v)) continue;
        const double d = dist(query, v);
        ++r.dist_comps;
        if (results.push(v, d)) {
          frontier.push({v, d});
          ++r.aux;
        }
      }
    }
    auto sorted = std::move(results).sorted();
    sorted.resize(std::min(sorted.size(), k));
    for (const auto& n : sorted) r.ids.push_back(n.id);
    return r;
  }

 private:
  std::size_t degree_ = 0;
  std::vector<PointId> edges_;
  PointId entry_ = 0;
};

}  // namespace lidbench
