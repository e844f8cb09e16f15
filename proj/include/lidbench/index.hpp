// SPDX-License-Identifier: Apache-2.0
//
// Common index abstraction: specs, parameter schemas, instrumented results.
#pragma once

#include <cstdint>
#include <limits>
#include <map>
#include <memory>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "lidbench/data.hpp"

namespace lidbench {

using Params = std::map<std::string, std::string>;

enum class Algorithm { bruteforce, ivf, rpforest, knngraph };

inline std::string_view to_string(Algorithm a) {
  switch (a) {
    case Algorithm::bruteforce: return "bruteforce";
    case Algorithm::ivf: return "ivf";
    case Algorithm::rpforest: return "rpforest";
    case Algorithm::knngraph: return "knngraph";
  }
  return "?";
}

inline Algorithm parse_algorithm(std::string_view s) {
  if (s == "bruteforce") return Algorithm::bruteforce;
  if (s == "ivf") return Algorithm::ivf;
  if (s == "rpforest") return Algorithm::rpforest;
  if (s == "knngraph") return Algorithm::knngraph;
  throw ValidationError("unknown algorithm '" + std::string(s) + "'");
}

/// Accepted parameter names per algorithm; `seed` is valid everywhere.
inline const std::set<std::string>& build_keys(Algorithm a) {
  static const std::map<Algorithm, std::set<std::string>> keys = {
      {Algorithm::bruteforce, {"seed"}},
      {Algorithm::ivf, {"seed", "nlist"}},
      {Algorithm::rpforest, {"seed", "num_trees", "leaf_size", "split_sample", "split_rounds"}},
      {Algorithm::knngraph, {"seed", "degree"}},
  };
  return keys.at(a);
}

inline const std::set<std::string>& search_keys(Algorithm a) {
  static const std::map<Algorithm, std::set<std::string>> keys = {
      {Algorithm::bruteforce, {}},
      {Algorithm::ivf, {"nprobe"}},
      {Algorithm::rpforest, {"search_k"}},
      {Algorithm::knngraph, {"ef"}},
  };
  return keys.at(a);
}

struct IndexSpec {
  Algorithm algorithm = Algorithm::bruteforce;
  Params build;
  std::uint64_t seed = 0;  // overridden by a `seed` entry in `build`
};

struct SearchResult {
  std::vector<PointId> ids;      // nearest first
  std::uint64_t dist_comps = 0;  // exact metric evaluations
  std::uint64_t aux = 0;         // traversal work not counted as distances
};

struct BuildStats {
  double build_seconds = 0.0;
  std::uint64_t stored_scalars = 0;

  friend bool operator==(const BuildStats&, const BuildStats&) = default;
};

/// Parsed search knobs; zero means "use the algorithm's default".
struct SearchParams {
  std::size_t nprobe = 1;
  std::size_t search_k = 0;
  std::size_t ef = 0;
};

namespace detail {

inline void check_keys(const Params& params, const std::set<std::string>& allowed,
                       std::string_view what, Algorithm a) {
  for (const auto& [key, _] : params)
    if (!allowed.count(key))
      throw ValidationError("unknown " + std::string(what) + " parameter '" + key + "' for " +
                            std::string(to_string(a)));
}

inline std::size_t positive_param(const Params& params, const std::string& key,
                                  std::size_t fallback) {
  auto it = params.find(key);
  if (it == params.end()) return fallback;
  const auto v = parse_int<std::size_t>(it->second);
  if (v == 0) throw ValidationError("parameter '" + key + "' must be >= 1");
  return v;
}

}  // namespace detail

inline SearchParams parse_search_params(Algorithm a, const Params& params) {
  detail::check_keys(params, search_keys(a), "search", a);
  SearchParams p;
  p.nprobe = detail::positive_param(params, "nprobe", 1);
  p.search_k = detail::positive_param(params, "search_k", 0);
  p.ef = detail::positive_param(params, "ef", 0);
  return p;
}

inline std::uint64_t effective_seed(const IndexSpec& spec) {
  auto it = spec.build.find("seed");
  return it == spec.build.end() ? spec.seed : detail::parse_int<std::uint64_t>(it->second);
}

/// An immutable index over a shared train set. Safe for concurrent search.
class Index {
 public:
  explicit Index(std::shared_ptr<const Dataset> train) : train_(std::move(train)) {
    if (!train_) throw ValidationError("index needs a train set");
  }
  virtual ~Index() = default;

  virtual Algorithm algorithm() const = 0;
  virtual std::uint64_t stored_scalars() const = 0;
  virtual SearchResult search(std::span<const float> query, std::size_t k,
                              const SearchParams& params) const = 0;

  SearchResult search(std::span<const float> query, std::size_t k, const Params& params) const {
    return search(query, k, parse_search_params(algorithm(), params));
  }

  const Dataset& train() const { return *train_; }
  const std::shared_ptr<const Dataset>& train_ptr() const { return train_; }

 protected:
  void check_query(std::span<const float> query, std::size_t k) const {
    if (query.size() != train_->dim()) throw ValidationError("query dimension mismatch");
    if (k == 0 || k > train_->size())
      throw ValidationError("query_k=" + std::to_string(k) + " out of range for " +
                            std::to_string(train_->size()) + " train points");
  }

  double dist(std::span<const float> query, PointId id) const {
    return distance_unchecked(train_->metric(), query, train_->row(id));
  }

 private:
  std::shared_ptr<const Dataset> train_;
};

namespace detail {

/// Per-thread visited marks; a new epoch invalidates all marks in O(1).
class VisitedSet {
 public:
  static VisitedSet& local(std::size_t n) {
    thread_local VisitedSet v;
    v.reset(n);
    return v;
  }

  /// Returns true the first time `id` is seen in this epoch.
  bool insert(PointId id) {
    if (marks_[id] == epoch_) return false;
    marks_[id] = epoch_;
    return true;
  }

 private:
  void reset(std::size_t n) {
    if (marks_.size() < n) marks_.resize(n, 0);
    if (++epoch_ == 0) {
      std::fill(marks_.begin(), marks_.end(), 0);
      epoch_ = 1;
    }
  }

  std::vector<std::uint32_t> marks_;
  std::uint32_t epoch_ = 0;
};

}  // namespace detail

}  // namespace lidbench
