// SPDX-License-Identifier: Apache-2.0
//
// Inverted file: k-means coarse quantizer, one posting list per centroid.
#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <vector>

#include "lidbench/index.hpp"
#include "lidbench/neighbors.hpp"
#include "lidbench/parallel.hpp"

namespace lidbench {

class IvfIndex final : public Index {
 public:
  static constexpr std::size_t kMaxLloydIterations = 25;

  IvfIndex(std::shared_ptr<const Dataset> train, std::size_t nlist, std::uint64_t seed)
      : Index(std::move(train)), nlist_(nlist) {
    if (nlist_ == 0 || nlist_ > this->train().size())
      throw ValidationError("ivf nlist=" + std::to_string(nlist_) + " must be in [1, n=" +
                            std::to_string(this->train().size()) + "]");
    train_kmeans(seed);
  }

  using Index::search;
  Algorithm algorithm() const override { return Algorithm::ivf; }
  std::uint64_t stored_scalars() const override {
    return nlist_ * train().dim() + train().size();
  }

  std::size_t nlist() const { return nlist_; }
  std::span<const float> centroid(std::size_t c) const {
    return {centroids_.data() + c * train().dim(), train().dim()};
  }
  const std::vector<std::vector<PointId>>& lists() const { return lists_; }

  /// Centroid ids ordered by (distance to query, id).
  std::vector<std::size_t> rank_centroids(std::span<const float> query) const {
    std::vector<Neighbor> ranked(nlist_);
    for (std::size_t c = 0; c < nlist_; ++c)
      ranked[c] = {PointId(c), distance_unchecked(train().metric(), query, centroid(c))};
    std::sort(ranked.begin(), ranked.end());
    std::vector<std::size_t> order(nlist_);
    for (std::size_t c = 0; c < nlist_; ++c) order[c] = ranked[c].id;
    return order;
  }

  SearchResult search(std::span<const float> query, std::size_t k,
                      const SearchParams& params) const override {
    check_query(query, k);
    const auto order = rank_centroids(query);
    const std::size_t probes = std::min(params.nprobe, nlist_);
    SearchResult r;
    r.dist_comps = nlist_;
    TopK top(k);
    for (std::size_t p = 0; p < probes; ++p) {
      for (PointId id : lists_[order[p]]) top.push(id, dist(query, id));
      r.dist_comps += lists_[order[p]].size();
    }
    for (const auto& n : std::move(top).sorted()) r.ids.push_back(n.id);
    return r;
  }

 private:
  double to_centroid(std::size_t i, std::size_t c) const {
    return distance_unchecked(train().metric(), train().row(i), centroid(c));
  }

  void set_centroid(std::size_t c, std::span<const float> v) {
    std::copy(v.begin(), v.end(), centroids_.begin() + std::ptrdiff_t(c * train().dim()));
  }

  /// Nearest centroid per point, ties to the lower centroid id.
  std::vector<std::size_t> assign(std::vector<double>& best_dist) const {
    const std::size_t n = train().size();
    std::vector<std::size_t> out(n);
    best_dist.assign(n, 0.0);
    detail::parallel_for(n, [&](std::size_t i) {
      double best = std::numeric_limits<double>::infinity();
      std::size_t arg = 0;
      for (std::size_t c = 0; c < nlist_; ++c) {
        const double d = to_centroid(i, c);
        if (d < best) {
          best = d;
          arg = c;
        }
      }
      out[i] = arg;
      best_dist[i] = best;
    });
    return out;
  }

  void seed_plus_plus(std::mt19937_64& rng) {
    const std::size_t n = train().size();
    std::uniform_int_distribution<std::size_t> uniform(0, n - 1);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::vector<double> d2(n, std::numeric_limits<double>::infinity());
    std::size_t chosen = uniform(rng);
    for (std::size_t c = 0; c < nlist_; ++c) {
      set_centroid(c, train().row(chosen));
      double total = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        const double d = to_centroid(i, c);
        d2[i] = std::min(d2[i], d * d);
        total += d2[i];
      }
      if (c + 1 == nlist_) break;
      if (total <= 0.0) {
        chosen = uniform(rng);
        continue;
      }
      double target = unit(rng) * total;
      chosen = n - 1;
      for (std::size_t i = 0; i < n; ++i) {
        target -= d2[i];
        if (target < 0.0 && d2[i] > 0.0) {
          chosen = i;
          break;
        }
      }
    }
  }

  void train_kmeans(std::uint64_t seed) {
    const std::size_t n = train().size();
    const std::size_t d = train().dim();
    centroids_.assign(nlist_ * d, 0.0f);
    std::mt19937_64 rng(seed);
    seed_plus_plus(rng);

    std::vector<double> best_dist;
    std::vector<std::size_t> assignment = assign(best_dist);
    for (std::size_t iter = 0; iter < kMaxLloydIterations; ++iter) {
      std::vector<double> sums(nlist_ * d, 0.0);
      std::vector<std::size_t> counts(nlist_, 0);
      for (std::size_t i = 0; i < n; ++i) {
        const auto row = train().row(i);
        double* s = sums.data() + assignment[i] * d;
        for (std::size_t j = 0; j < d; ++j) s[j] += row[j];
        ++counts[assignment[i]];
      }
      // farthest points first, for reseeding empty clusters
      std::vector<PointId> by_distance(n);
      std::iota(by_distance.begin(), by_distance.end(), PointId(0));
      std::size_t next_far = 0;
      bool sorted = false;
      for (std::size_t c = 0; c < nlist_; ++c) {
        std::vector<float> mean(d);
        bool usable = counts[c] > 0;
        if (usable) {
          double norm2 = 0.0;
          for (std::size_t j = 0; j < d; ++j) {
            mean[j] = static_cast<float>(sums[c * d + j] / double(counts[c]));
            norm2 += double(mean[j]) * mean[j];
          }
          usable = train().metric() == Metric::euclidean || norm2 > 0.0;
        }
        if (usable) {
          set_centroid(c, mean);
          continue;
        }
        if (!sorted) {
          std::stable_sort(by_distance.begin(), by_distance.end(),
                           [&](PointId a, PointId b) { return best_dist[a] > best_dist[b]; });
          sorted = true;
        }
        set_centroid(c, train().row(by_distance[next_far % n]));
        ++next_far;
      }
      std::vector<std::size_t> next = assign(best_dist);
      const bool converged = next == assignment;
      assignment = std::move(next);
      if (converged) break;
    }
    lists_.assign(nlist_, {});
    for (std::size_t i = 0; i < n; ++i) lists_[assignment[i]].push_back(PointId(i));
  }

  std::size_t nlist_;
  std::vector<float> centroids_;
  std::vector<std::vector<PointId>> lists_;
};

}  // namespace lidbench
