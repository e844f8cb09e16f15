// SPDX-License-Identifier: Apache-2.0
//
// Experiment execution and evaluation: per-query timing and recall, Pareto
// frontiers, threshold rankings, and distributional statistics.
#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <map>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "lidbench/index.hpp"
#include "lidbench/lid.hpp"
#include "lidbench/workload.hpp"

namespace lidbench {

inline constexpr const char* kToolVersion = "lidbench 1.0.0";
inline constexpr double kRecallTieFactor = 1.0 + 1e-6;

struct QueryRecord {
  std::int64_t latency_ns = 1;
  double recall = 0.0;
  std::uint64_t dist_comps = 0;
  std::uint64_t aux = 0;

  friend bool operator==(const QueryRecord&, const QueryRecord&) = default;
};

struct RunSummary {
  double avg_recall = 0.0;
  double qps = 0.0;
  std::uint64_t total_dist_comps = 0;

  friend bool operator==(const RunSummary&, const RunSummary&) = default;
};

/// One (algorithm, build params, search params, workload) execution.
struct RunResult {
  std::string dataset;
  Fingerprint fingerprint = 0;  // of the indexed (residual) train set
  Difficulty difficulty = Difficulty::medium;
  std::size_t query_k = 10;
  std::uint64_t workload_seed = 0;
  Fingerprint source_fingerprint = 0;
  Algorithm algorithm = Algorithm::bruteforce;
  Params build_params;
  Params search_params;
  BuildStats build_stats;
  std::string tool_version = kToolVersion;
  std::vector<PointId> query_ids;  // source-dataset ids, parallel to records
  std::vector<QueryRecord> records;
  RunSummary summary;
  nlohmann::json extra = nlohmann::json::object();  // unrecognized keys read from file

  friend bool operator==(const RunResult&, const RunResult&) = default;
};

/// avg recall, QPS = m / total latency, and total distance computations,
/// accumulated in record order.
inline RunSummary summarize(std::span<const QueryRecord> records) {
  RunSummary s;
  if (records.empty()) return s;
  double recall_sum = 0.0;
  std::int64_t latency_sum = 0;
  for (const auto& r : records) {
    recall_sum += r.recall;
    latency_sum += r.latency_ns;
    s.total_dist_comps += r.dist_comps;
  }
  s.avg_recall = recall_sum / double(records.size());
  s.qps = double(records.size()) / (double(latency_sum) * 1e-9);
  return s;
}

/// Fraction of query_k achieved: a returned point counts when its distance is
/// within r_k * (1 + 1e-6), so points tied with the k-th neighbor are correct.
inline double recall(std::span<const PointId> returned, std::span<const Neighbor> truth,
                     std::size_t query_k, std::span<const float> query, const Dataset& train) {
  if (query_k == 0 || truth.empty()) throw ValidationError("recall needs query_k >= 1");
  const double threshold = truth.back().dist * kRecallTieFactor;
  std::size_t hits = 0;
  for (PointId id : returned)
    if (distance_unchecked(train.metric(), query, train.row(id)) <= threshold) ++hits;
  return double(std::min(hits, query_k)) / double(query_k);
}

/// Times every query on the calling thread in query order; per-query latency
/// is the minimum over `repetitions`. Recall is computed after timing.
template <class Clock = std::chrono::steady_clock>
RunResult run(const Index& index, const IndexSpec& spec, const BuildStats& build_stats,
              const Workload& workload, const Params& search_params,
              std::size_t repetitions = 1) {
  if (repetitions == 0) throw ValidationError("repetitions must be >= 1");
  if (index.train().fingerprint() != workload.ground_truth.fingerprint)
    throw ValidationError("index train set " + fingerprint_hex(index.train().fingerprint()) +
                          " does not match workload ground truth " +
                          fingerprint_hex(workload.ground_truth.fingerprint));
  const auto parsed = parse_search_params(index.algorithm(), search_params);
  const std::size_t m = workload.size();
  const std::size_t k = workload.query_k;

  std::vector<SearchResult> results(m);
  std::vector<std::int64_t> latencies(m, 0);
  for (std::size_t q = 0; q < m; ++q) {
    const auto query = workload.queries->row(q);
    std::int64_t best = 0;
    for (std::size_t rep = 0; rep < repetitions; ++rep) {
      const auto t0 = Clock::now();
      SearchResult r = index.search(query, k, parsed);
      const auto t1 = Clock::now();
      const auto ns = std::max<std::int64_t>(
          1, std::chrono::duration_cast<std::chrono::nanoseconds>(t1 - t0).count());
      if (rep == 0 || ns < best) best = ns;
      results[q] = std::move(r);
    }
    latencies[q] = best;
  }

  RunResult run;
  run.dataset = workload.dataset_name;
  run.fingerprint = workload.ground_truth.fingerprint;
  run.difficulty = workload.difficulty;
  run.query_k = k;
  run.workload_seed = workload.seed;
  run.source_fingerprint = workload.source_fingerprint;
  run.algorithm = index.algorithm();
  run.build_params = spec.build;
  run.build_params["seed"] = std::to_string(effective_seed(spec));
  run.search_params = search_params;
  run.build_stats = build_stats;
  run.query_ids = workload.query_ids;
  run.records.resize(m);
  for (std::size_t q = 0; q < m; ++q) {
    auto& rec = run.records[q];
    rec.latency_ns = latencies[q];
    rec.dist_comps = results[q].dist_comps;
    rec.aux = results[q].aux;
    rec.recall = recall(results[q].ids, workload.ground_truth.list(q), k,
                        workload.queries->row(q), index.train());
  }
  run.summary = summarize(run.records);
  return run;
}

struct TradeoffPoint {
  double recall = 0.0;
  double qps = 0.0;

  friend bool operator==(const TradeoffPoint&, const TradeoffPoint&) = default;
};

/// Indices of points not strictly dominated (another point at least as good in
/// both coordinates and better in one), ordered by recall ascending.
inline std::vector<std::size_t> pareto_indices(std::span<const TradeoffPoint> points) {
  std::vector<std::size_t> order(points.size());
  std::iota(order.begin(), order.end(), std::size_t(0));
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (points[a].recall != points[b].recall) return points[a].recall > points[b].recall;
    return points[a].qps > points[b].qps;
  });
  std::vector<std::size_t> keep;
  double best_higher = -std::numeric_limits<double>::infinity();
  for (std::size_t g = 0; g < order.size();) {
    std::size_t end = g;
    while (end < order.size() && points[order[end]].recall == points[order[g]].recall) ++end;
    const double group_max = points[order[g]].qps;
    if (group_max > best_higher)
      for (std::size_t i = g; i < end && points[order[i]].qps == group_max; ++i)
        keep.push_back(order[i]);
    best_higher = std::max(best_higher, group_max);
    g = end;
  }
  std::reverse(keep.begin(), keep.end());
  return keep;
}

inline std::vector<TradeoffPoint> pareto(std::span<const TradeoffPoint> points) {
  std::vector<TradeoffPoint> out;
  for (auto i : pareto_indices(points)) out.push_back(points[i]);
  return out;
}

enum class Measure { qps, dist_comps };

inline Measure parse_measure(std::string_view s) {
  if (s == "qps") return Measure::qps;
  if (s == "distcomps" || s == "dist_comps") return Measure::dist_comps;
  throw ValidationError("unknown measure '" + std::string(s) + "'");
}

struct RankedRun {
  double avg_recall = 0.0;
  double qps = 0.0;
  double dist_comps = 0.0;
};

struct RankingCell {
  std::optional<double> value;  // best qps (max) or dist_comps (min) meeting the threshold
  std::optional<double> ratio;  // value / best value across algorithms
};

struct RankingTable {
  Measure measure = Measure::qps;
  std::vector<double> thresholds;
  std::map<std::string, std::vector<RankingCell>> cells;  // algorithm -> per threshold
};

/// For each threshold, the best configuration of each algorithm reaching that
/// average recall, and its ratio to the best algorithm. Algorithms with no
/// qualifying run get an empty cell.
inline RankingTable ranking(const std::map<std::string, std::vector<RankedRun>>& runs,
                            std::vector<double> thresholds = {0.75, 0.9},
                            Measure measure = Measure::qps) {
  RankingTable table{measure, thresholds, {}};
  const bool larger_better = measure == Measure::qps;
  for (std::size_t t = 0; t < thresholds.size(); ++t) {
    std::optional<double> overall;
    for (const auto& [algo, list] : runs) {
      auto& cell = table.cells[algo];
      cell.resize(thresholds.size());
      for (const auto& r : list) {
        if (r.avg_recall < thresholds[t]) continue;
        const double v = larger_better ? r.qps : r.dist_comps;
        if (!cell[t].value || (larger_better ? v > *cell[t].value : v < *cell[t].value))
          cell[t].value = v;
      }
      if (cell[t].value &&
          (!overall || (larger_better ? *cell[t].value > *overall : *cell[t].value < *overall)))
        overall = cell[t].value;
    }
    for (auto& [algo, cell] : table.cells)
      if (cell[t].value) cell[t].ratio = *cell[t].value / *overall;
  }
  return table;
}

inline std::vector<double> recalls_of(const RunResult& run) {
  std::vector<double> out;
  for (const auto& r : run.records) out.push_back(r.recall);
  return out;
}

/// Per-query 1 / latency in queries per second.
inline std::vector<double> inverse_latencies(const RunResult& run) {
  std::vector<double> out;
  for (const auto& r : run.records) out.push_back(1e9 / double(r.latency_ns));
  return out;
}

/// Fixed-width bins on [0, 1]; the last bin includes 1.
inline std::vector<std::size_t> recall_histogram(const RunResult& run, std::size_t bins = 20) {
  const auto recalls = recalls_of(run);
  return make_histogram(recalls, 0.0, 1.0, bins).counts;
}

/// Fraction of queries whose recall is exactly 0 or exactly 1.
inline double bimodality(const RunResult& run) {
  if (run.records.empty()) return 0.0;
  std::size_t extreme = 0;
  for (const auto& r : run.records)
    if (r.recall == 0.0 || r.recall == 1.0) ++extreme;
  return double(extreme) / double(run.records.size());
}

/// LID per query of `run`, looked up by source-dataset id.
inline std::vector<double> query_lids(const RunResult& run, const LidProfile& profile) {
  if (run.source_fingerprint != 0 && profile.fingerprint != run.source_fingerprint)
    throw ValidationError("profile fingerprint does not match the run's source dataset");
  std::vector<double> out;
  for (PointId id : run.query_ids) {
    if (id >= profile.size() || !profile.finite(id))
      throw ValidationError("query " + std::to_string(id) + " has no finite LID in the profile");
    out.push_back(profile.values[id]);
  }
  return out;
}

struct RecallLidGrid {
  double lid_lo = 0.0;
  double lid_hi = 0.0;
  std::size_t x_bins = 0;  // LID
  std::size_t y_bins = 0;  // recall
  std::vector<std::size_t> counts;  // x-major: counts[x * y_bins + y]
  std::vector<std::size_t> lid_marginal;
  std::vector<std::size_t> recall_marginal;
  std::vector<double> lids;
  std::vector<double> recalls;

  std::size_t at(std::size_t x, std::size_t y) const { return counts[x * y_bins + y]; }
};

/// Rectangular 2-D histogram over [min LID, max LID] x [0, 1] with marginals.
inline RecallLidGrid recall_vs_lid_bins(const RunResult& run, const LidProfile& profile,
                                        std::size_t x_bins = 30, std::size_t y_bins = 20) {
  if (x_bins == 0 || y_bins == 0) throw ValidationError("bin counts must be >= 1");
  RecallLidGrid g;
  g.lids = query_lids(run, profile);
  g.recalls = recalls_of(run);
  if (g.lids.empty()) throw ValidationError("run has no queries");
  g.x_bins = x_bins;
  g.y_bins = y_bins;
  g.lid_lo = *std::min_element(g.lids.begin(), g.lids.end());
  g.lid_hi = *std::max_element(g.lids.begin(), g.lids.end());
  g.counts.assign(x_bins * y_bins, 0);
  g.lid_marginal.assign(x_bins, 0);
  g.recall_marginal.assign(y_bins, 0);
  for (std::size_t i = 0; i < g.lids.size(); ++i) {
    const auto x = bin_index(g.lids[i], g.lid_lo, g.lid_hi, x_bins);
    const auto y = bin_index(g.recalls[i], 0.0, 1.0, y_bins);
    ++g.counts[x * y_bins + y];
    ++g.lid_marginal[x];
    ++g.recall_marginal[y];
  }
  return g;
}

/// Ranks starting at 1; tied values share their average rank.
inline std::vector<double> average_ranks(std::span<const double> v) {
  std::vector<std::size_t> order(v.size());
  std::iota(order.begin(), order.end(), std::size_t(0));
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
  std::vector<double> ranks(v.size());
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j < order.size() && v[order[j]] == v[order[i]]) ++j;
    const double avg = 0.5 * double(i + 1 + j);
    for (std::size_t t = i; t < j; ++t) ranks[order[t]] = avg;
    i = j;
  }
  return ranks;
}

/// Spearman rank correlation (Pearson on average ranks). Returns 0 when either
/// side is constant.
inline double spearman(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2)
    throw ValidationError("spearman needs two equal-length samples of size >= 2");
  const auto rx = average_ranks(x);
  const auto ry = average_ranks(y);
  const double n = double(x.size());
  const double mean = (n + 1) / 2;
  double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < rx.size(); ++i) {
    sxy += (rx[i] - mean) * (ry[i] - mean);
    sxx += (rx[i] - mean) * (rx[i] - mean);
    syy += (ry[i] - mean) * (ry[i] - mean);
  }
  if (sxx == 0 || syy == 0) return 0.0;
  return sxy / std::sqrt(sxx * syy);
}

}  // namespace lidbench
