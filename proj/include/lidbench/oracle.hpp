// SPDX-License-Identifier: Apache-2.0
//
// Exact k-NN ground truth by linear scan.
#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "lidbench/data.hpp"
#include "lidbench/neighbors.hpp"
#include "lidbench/parallel.hpp"

namespace lidbench {

/// Per-query sorted k-NN lists against a fingerprinted train set.
struct GroundTruth {
  std::size_t k = 0;
  Metric metric = Metric::euclidean;
  Fingerprint fingerprint = 0;
  bool exclude_self = false;
  std::vector<Neighbor> neighbors;  // num_queries() x k, row-major

  std::size_t num_queries() const { return k == 0 ? 0 : neighbors.size() / k; }
  std::span<const Neighbor> list(std::size_t q) const { return {neighbors.data() + q * k, k}; }

  friend bool operator==(const GroundTruth&, const GroundTruth&) = default;
};

/// The k nearest train points to `query`, skipping `skip` if given.
inline std::vector<Neighbor> knn_scan(const Dataset& train, std::span<const float> query,
                                      std::size_t k, std::optional<PointId> skip = std::nullopt) {
  TopK top(k);
  for (std::size_t j = 0; j < train.size(); ++j) {
    if (skip && *skip == j) continue;
    top.push(PointId(j), distance_unchecked(train.metric(), query, train.row(j)));
  }
  return std::move(top).sorted();
}

/// With exclude_self, query row i is identified with train id i and that
/// candidate is dropped.
inline GroundTruth exact_knn(const Dataset& train, const Dataset& queries, std::size_t k,
                             bool exclude_self) {
  if (queries.dim() != train.dim()) throw ValidationError("query/train dimension mismatch");
  if (queries.metric() != train.metric()) throw ValidationError("query/train metric mismatch");
  const std::size_t available = exclude_self ? train.size() - 1 : train.size();
  if (k == 0 || k > available)
    throw ValidationError("k=" + std::to_string(k) + " out of range for " +
                          std::to_string(train.size()) + " train points");
  if (exclude_self && queries.size() > train.size())
    throw ValidationError("exclude_self requires queries to be train rows");

  GroundTruth gt;
  gt.k = k;
  gt.metric = train.metric();
  gt.fingerprint = train.fingerprint();
  gt.exclude_self = exclude_self;
  gt.neighbors.resize(queries.size() * k);
  detail::parallel_for(queries.size(), [&](std::size_t q) {
    auto row = knn_scan(train, queries.row(q), k,
                        exclude_self ? std::optional<PointId>(PointId(q)) : std::nullopt);
    std::copy(row.begin(), row.end(), gt.neighbors.begin() + q * k);
  });
  return gt;
}

inline double kth_distance(const GroundTruth& gt, std::size_t query) {
  return gt.list(query).back().dist;
}

inline nlohmann::json to_json(const GroundTruth& gt) {
  nlohmann::json ids = nlohmann::json::array(), dists = nlohmann::json::array();
  for (std::size_t q = 0; q < gt.num_queries(); ++q) {
    nlohmann::json qi = nlohmann::json::array(), qd = nlohmann::json::array();
    for (const auto& n : gt.list(q)) {
      qi.push_back(n.id);
      qd.push_back(n.dist);
    }
    ids.push_back(std::move(qi));
    dists.push_back(std::move(qd));
  }
  return {{"k", gt.k},
          {"metric", to_string(gt.metric)},
          {"fingerprint", fingerprint_hex(gt.fingerprint)},
          {"exclude_self", gt.exclude_self},
          {"ids", std::move(ids)},
          {"distances", std::move(dists)}};
}

inline GroundTruth ground_truth_from_json(const nlohmann::json& j) {
  try {
    GroundTruth gt;
    gt.k = j.at("k").get<std::size_t>();
    gt.metric = parse_metric(j.at("metric").get<std::string>());
    gt.fingerprint = parse_fingerprint(j.at("fingerprint").get<std::string>());
    gt.exclude_self = j.at("exclude_self").get<bool>();
    const auto& ids = j.at("ids");
    const auto& dists = j.at("distances");
    if (gt.k == 0 || ids.size() != dists.size()) throw ValidationError("malformed ground truth");
    for (std::size_t q = 0; q < ids.size(); ++q) {
      if (ids[q].size() != gt.k || dists[q].size() != gt.k)
        throw ValidationError("ground truth list " + std::to_string(q) + " has wrong length");
      for (std::size_t i = 0; i < gt.k; ++i)
        gt.neighbors.push_back({ids[q][i].get<PointId>(), dists[q][i].get<double>()});
    }
    return gt;
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("ground truth schema: ") + e.what());
  }
}

/// Rejects ground truth whose fingerprint does not match `train`.
inline void check_binding(const GroundTruth& gt, const Dataset& train) {
  if (gt.fingerprint != train.fingerprint())
    throw ValidationError("ground truth fingerprint " + fingerprint_hex(gt.fingerprint) +
                          " does not match dataset " + fingerprint_hex(train.fingerprint()));
}

}  // namespace lidbench
