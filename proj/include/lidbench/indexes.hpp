// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <chrono>
#include <cmath>
#include <memory>

#include "lidbench/bruteforce.hpp"
#include "lidbench/index.hpp"
#include "lidbench/ivf.hpp"
#include "lidbench/knngraph.hpp"
#include "lidbench/rpforest.hpp"

namespace lidbench {

struct BuiltIndex {
  std::unique_ptr<Index> index;
  BuildStats stats;
};

/// Builds the index described by `spec`. Deterministic given the seed;
/// build time is wall clock.
inline BuiltIndex build_index(std::shared_ptr<const Dataset> train, const IndexSpec& spec) {
  if (!train) throw ValidationError("build_index: no train set");
  detail::check_keys(spec.build, build_keys(spec.algorithm), "build", spec.algorithm);
  const std::uint64_t seed = effective_seed(spec);
  const auto& p = spec.build;
  const auto t0 = std::chrono::steady_clock::now();
  BuiltIndex built;
  switch (spec.algorithm) {
    case Algorithm::bruteforce:
      built.index = std::make_unique<BruteForceIndex>(std::move(train));
      break;
    case Algorithm::ivf: {
      const auto fallback = std::max<std::size_t>(1, std::size_t(std::sqrt(double(train->size()))));
      const auto nlist = detail::positive_param(p, "nlist", fallback);
      built.index = std::make_unique<IvfIndex>(std::move(train), nlist, seed);
      break;
    }
    case Algorithm::rpforest: {
      RpForestConfig cfg;
      cfg.num_trees = detail::positive_param(p, "num_trees", cfg.num_trees);
      cfg.leaf_size = detail::positive_param(p, "leaf_size", cfg.leaf_size);
      cfg.split_sample = detail::positive_param(p, "split_sample", cfg.split_sample);
      cfg.split_rounds = detail::positive_param(p, "split_rounds", cfg.split_rounds);
      built.index = std::make_unique<RpForestIndex>(std::move(train), cfg, seed);
      break;
    }
    case Algorithm::knngraph:
      built.index =
          std::make_unique<KnnGraphIndex>(std::move(train), detail::positive_param(p, "degree", 16));
      break;
  }
  built.stats.build_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  built.stats.stored_scalars = built.index->stored_scalars();
  return built;
}

}  // namespace lidbench
