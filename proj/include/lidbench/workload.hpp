// SPDX-License-Identifier: Apache-2.0
//
// LID-stratified query selection (easy / medium / hard / diverse) and the
// query/train split with its ground truth.
#pragma once

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "lidbench/data.hpp"
#include "lidbench/lid.hpp"
#include "lidbench/oracle.hpp"

namespace lidbench {

enum class Difficulty { easy, medium, hard, diverse };

inline std::string_view to_string(Difficulty d) {
  switch (d) {
    case Difficulty::easy: return "easy";
    case Difficulty::medium: return "medium";
    case Difficulty::hard: return "hard";
    case Difficulty::diverse: return "diverse";
  }
  return "?";
}

inline Difficulty parse_difficulty(std::string_view s) {
  if (s == "easy") return Difficulty::easy;
  if (s == "medium") return Difficulty::medium;
  if (s == "hard") return Difficulty::hard;
  if (s == "diverse") return Difficulty::diverse;
  throw ValidationError("unknown difficulty '" + std::string(s) + "'");
}

namespace detail {

/// Finite-LID point ids sorted ascending by (lid, id).
inline std::vector<PointId> rank_finite(const LidProfile& profile) {
  std::vector<PointId> ids;
  for (std::size_t i = 0; i < profile.size(); ++i)
    if (profile.finite(i)) ids.push_back(PointId(i));
  std::stable_sort(ids.begin(), ids.end(), [&](PointId a, PointId b) {
    return profile.values[a] < profile.values[b];
  });
  return ids;
}

inline void check_m(std::size_t m, std::size_t finite) {
  if (m == 0) throw ValidationError("query count m must be >= 1");
  if (m > finite)
    throw ValidationError("m=" + std::to_string(m) + " exceeds the " + std::to_string(finite) +
                          " finite-LID points");
}

}  // namespace detail

/// The m lowest finite LIDs, ascending; ties by id.
inline std::vector<PointId> select_easy(const LidProfile& profile, std::size_t m = 10000) {
  auto ranked = detail::rank_finite(profile);
  detail::check_m(m, ranked.size());
  ranked.resize(m);
  return ranked;
}

/// Contiguous window of m ranks starting at floor((n_finite - m) / 2).
inline std::vector<PointId> select_medium(const LidProfile& profile, std::size_t m = 10000) {
  const auto ranked = detail::rank_finite(profile);
  detail::check_m(m, ranked.size());
  const std::size_t start = (ranked.size() - m) / 2;
  return {ranked.begin() + std::ptrdiff_t(start), ranked.begin() + std::ptrdiff_t(start + m)};
}

struct HardSelection {
  std::vector<PointId> ids;  // descending LID; ties by ascending id
  double threshold = 0.0;    // smallest selected LID
};

inline HardSelection select_hard(const LidProfile& profile, std::size_t m = 10000) {
  auto ranked = detail::rank_finite(profile);
  detail::check_m(m, ranked.size());
  std::stable_sort(ranked.begin(), ranked.end(), [&](PointId a, PointId b) {
    return profile.values[a] > profile.values[b];
  });
  ranked.resize(m);
  return {ranked, profile.values[ranked.back()]};
}

/// Buckets finite points by floor(LID); each of the m draws picks a nonempty
/// bucket uniformly, then a member uniformly. Draws repeat.
inline std::vector<PointId> select_diverse(const LidProfile& profile, std::size_t m = 5000,
                                           std::uint64_t seed = 0) {
  std::map<long long, std::vector<PointId>> buckets;
  for (std::size_t i = 0; i < profile.size(); ++i)
    if (profile.finite(i))
      buckets[static_cast<long long>(std::floor(profile.values[i]))].push_back(PointId(i));
  if (buckets.empty()) throw ValidationError("diverse selection: no finite-LID points");
  if (m == 0) throw ValidationError("query count m must be >= 1");

  std::vector<const std::vector<PointId>*> nonempty;
  for (const auto& [_, members] : buckets) nonempty.push_back(&members);
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> pick_bucket(0, nonempty.size() - 1);
  std::vector<PointId> out;
  out.reserve(m);
  for (std::size_t draw = 0; draw < m; ++draw) {
    const auto& members = *nonempty[pick_bucket(rng)];
    std::uniform_int_distribution<std::size_t> pick_member(0, members.size() - 1);
    out.push_back(members[pick_member(rng)]);
  }
  return out;
}

/// A query set with its residual train set (queries removed) and ground truth
/// against that residual.
struct Workload {
  Difficulty difficulty = Difficulty::medium;
  std::string dataset_name;
  Fingerprint source_fingerprint = 0;
  std::uint64_t seed = 0;
  std::size_t query_k = 10;
  std::vector<PointId> query_ids;     // ids in the source dataset
  std::vector<PointId> train_ids;     // residual row -> source id; not persisted
  std::shared_ptr<const Dataset> train;
  std::shared_ptr<const Dataset> queries;
  GroundTruth ground_truth;

  std::size_t size() const { return query_ids.size(); }
};

inline Workload build_workload(const Dataset& data, std::span<const PointId> ids,
                               Difficulty difficulty, std::size_t query_k = 10,
                               std::uint64_t seed = 0) {
  if (ids.empty()) throw ValidationError("workload needs at least one query id");
  if (query_k == 0) throw ValidationError("query_k must be >= 1");
  std::vector<char> is_query(data.size(), 0);
  for (PointId id : ids) {
    if (id >= data.size()) throw ValidationError("query id " + std::to_string(id) + " out of range");
    is_query[id] = 1;
  }
  Workload w;
  w.difficulty = difficulty;
  w.dataset_name = data.name();
  w.source_fingerprint = data.fingerprint();
  w.seed = seed;
  w.query_k = query_k;
  w.query_ids.assign(ids.begin(), ids.end());
  for (std::size_t i = 0; i < data.size(); ++i)
    if (!is_query[i]) w.train_ids.push_back(PointId(i));
  if (w.train_ids.size() < query_k)
    throw ValidationError("residual train set (" + std::to_string(w.train_ids.size()) +
                          " points) smaller than query_k=" + std::to_string(query_k));
  w.train = std::make_shared<const Dataset>(data.select(w.train_ids, data.name() + "-train"));
  w.queries = std::make_shared<const Dataset>(data.select(w.query_ids, data.name() + "-queries"));
  w.ground_truth = exact_knn(*w.train, *w.queries, query_k, false);
  return w;
}

/// Directory layout: ids.txt (header + one id per line), train.lidb,
/// queries.lidb, groundtruth.json.
inline void save_workload(const std::filesystem::path& dir, const Workload& w) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create '" + dir.string() + "': " + ec.message());
  {
    auto out = detail::open_for_write(dir / "ids.txt");
    out << "# difficulty=" << to_string(w.difficulty) << " seed=" << w.seed
        << " query_k=" << w.query_k << " m=" << w.size()
        << " source_fingerprint=" << fingerprint_hex(w.source_fingerprint)
        << " dataset=" << w.dataset_name << "\n";
    for (PointId id : w.query_ids) out << id << "\n";
    if (!out) throw IoError("write error on ids.txt");
  }
  write_native(dir / "train.lidb", *w.train);
  write_native(dir / "queries.lidb", *w.queries);
  auto out = detail::open_for_write(dir / "groundtruth.json");
  out << to_json(w.ground_truth).dump() << "\n";
  if (!out) throw IoError("write error on groundtruth.json");
}

inline Workload load_workload(const std::filesystem::path& dir) {
  std::ifstream in(dir / "ids.txt");
  if (!in) throw IoError("cannot open '" + (dir / "ids.txt").string() + "'");
  std::string header;
  if (!std::getline(in, header) || header.rfind("# ", 0) != 0)
    throw ValidationError("ids.txt lacks its header line");
  std::map<std::string, std::string> fields;
  {
    // dataset= comes last and may contain spaces
    const auto ds = header.find(" dataset=");
    if (ds != std::string::npos) {
      fields["dataset"] = header.substr(ds + 9);
      header.resize(ds);
    }
    std::istringstream hs(header.substr(2));
    std::string tok;
    while (hs >> tok) {
      const auto eq = tok.find('=');
      if (eq == std::string::npos) throw ValidationError("malformed ids.txt header token " + tok);
      fields[tok.substr(0, eq)] = tok.substr(eq + 1);
    }
  }
  auto field = [&](const std::string& key) -> const std::string& {
    auto it = fields.find(key);
    if (it == fields.end()) throw ValidationError("ids.txt header lacks '" + key + "'");
    return it->second;
  };
  Workload w;
  w.difficulty = parse_difficulty(field("difficulty"));
  w.seed = detail::parse_int<std::uint64_t>(field("seed"));
  w.query_k = detail::parse_int<std::size_t>(field("query_k"));
  w.source_fingerprint = parse_fingerprint(field("source_fingerprint"));
  w.dataset_name = fields.count("dataset") ? fields["dataset"] : "";
  std::string line;
  while (std::getline(in, line))
    if (!line.empty()) w.query_ids.push_back(detail::parse_int<PointId>(line));
  if (w.query_ids.size() != detail::parse_int<std::size_t>(field("m")))
    throw ValidationError("ids.txt id count does not match header m");

  w.train = std::make_shared<const Dataset>(load_native(dir / "train.lidb"));
  w.queries = std::make_shared<const Dataset>(load_native(dir / "queries.lidb"));
  const auto bytes = detail::read_file(dir / "groundtruth.json");
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(bytes.begin(), bytes.end());
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("groundtruth.json: ") + e.what());
  }
  w.ground_truth = ground_truth_from_json(j);
  check_binding(w.ground_truth, *w.train);
  if (w.queries->size() != w.query_ids.size() || w.ground_truth.num_queries() != w.size())
    throw ValidationError("workload query count mismatch between files");
  if (w.ground_truth.k != w.query_k) throw ValidationError("ground truth k != query_k");
  return w;
}

}  // namespace lidbench
