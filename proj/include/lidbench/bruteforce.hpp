// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "lidbench/index.hpp"
#include "lidbench/neighbors.hpp"

namespace lidbench {

/// Linear scan baseline: exact top-k in oracle tie order, n distances per query.
class BruteForceIndex final : public Index {
 public:
  using Index::Index;
  using Index::search;

  Algorithm algorithm() const override { return Algorithm::bruteforce; }
  std::uint64_t stored_scalars() const override { return 0; }

  SearchResult search(std::span<const float> query, std::size_t k,
                      const SearchParams&) const override {
    check_query(query, k);
    TopK top(k);
    for (std::size_t j = 0; j < train().size(); ++j) top.push(PointId(j), dist(query, PointId(j)));
    SearchResult r;
    for (const auto& n : std::move(top).sorted()) r.ids.push_back(n.id);
    r.dist_comps = train().size();
    return r;
  }
};

}  // namespace lidbench
