// SPDX-License-Identifier: Apache-2.0
//
// Run-record files: one RunResult per JSON document with `meta`, `queries`
// (parallel arrays) and `summary`. Reading validates the arrays and the
// summary, and keeps any keys this version does not know about.
#pragma once

#include <filesystem>
#include <fstream>
#include <string>

#include <json.hpp>

#include "lidbench/bench.hpp"

namespace lidbench {

inline nlohmann::json to_json(const RunResult& run) {
  using nlohmann::json;
  json latency = json::array(), recall = json::array(), comps = json::array(), aux = json::array();
  for (const auto& r : run.records) {
    latency.push_back(r.latency_ns);
    recall.push_back(r.recall);
    comps.push_back(r.dist_comps);
    aux.push_back(r.aux);
  }
  json doc = run.extra.is_object() ? run.extra : json::object();
  auto& meta = doc["meta"];
  meta["dataset"] = run.dataset;
  meta["fingerprint"] = fingerprint_hex(run.fingerprint);
  auto& workload = meta["workload"];
  workload["difficulty"] = to_string(run.difficulty);
  workload["m"] = run.records.size();
  workload["query_k"] = run.query_k;
  workload["seed"] = run.workload_seed;
  workload["source_fingerprint"] = fingerprint_hex(run.source_fingerprint);
  meta["algorithm"] = to_string(run.algorithm);
  meta["build_params"] = run.build_params;
  meta["search_params"] = run.search_params;
  meta["build_stats"]["build_seconds"] = run.build_stats.build_seconds;
  meta["build_stats"]["stored_scalars"] = run.build_stats.stored_scalars;
  meta["tool_version"] = run.tool_version;
  auto& queries = doc["queries"];
  queries["latency_ns"] = std::move(latency);
  queries["recall"] = std::move(recall);
  queries["dist_comps"] = std::move(comps);
  queries["aux"] = std::move(aux);
  if (!run.query_ids.empty()) queries["query_id"] = run.query_ids;
  auto& summary = doc["summary"];
  summary["avg_recall"] = run.summary.avg_recall;
  summary["qps"] = run.summary.qps;
  summary["total_dist_comps"] = run.summary.total_dist_comps;
  return doc;
}

namespace detail {

/// Removes `key` from `obj`, returning its value.
inline nlohmann::json take(nlohmann::json& obj, const char* key) {
  auto it = obj.find(key);
  if (it == obj.end()) throw ValidationError(std::string("run record lacks '") + key + "'");
  nlohmann::json v = std::move(*it);
  obj.erase(it);
  return v;
}

inline void drop_if_empty(nlohmann::json& obj, const char* key) {
  auto it = obj.find(key);
  if (it != obj.end() && it->is_object() && it->empty()) obj.erase(it);
}

}  // namespace detail

inline RunResult run_from_json(nlohmann::json doc) {
  using detail::take;
  RunResult run;
  try {
    if (!doc.is_object()) throw ValidationError("run record is not a JSON object");
    auto& meta = doc.at("meta");
    run.dataset = take(meta, "dataset").get<std::string>();
    run.fingerprint = parse_fingerprint(take(meta, "fingerprint").get<std::string>());
    auto workload = take(meta, "workload");
    run.difficulty = parse_difficulty(take(workload, "difficulty").get<std::string>());
    const auto m = take(workload, "m").get<std::size_t>();
    run.query_k = take(workload, "query_k").get<std::size_t>();
    run.workload_seed = take(workload, "seed").get<std::uint64_t>();
    run.source_fingerprint =
        parse_fingerprint(take(workload, "source_fingerprint").get<std::string>());
    if (!workload.empty()) meta["workload"] = std::move(workload);
    run.algorithm = parse_algorithm(take(meta, "algorithm").get<std::string>());
    run.build_params = take(meta, "build_params").get<Params>();
    run.search_params = take(meta, "search_params").get<Params>();
    auto stats = take(meta, "build_stats");
    run.build_stats.build_seconds = take(stats, "build_seconds").get<double>();
    run.build_stats.stored_scalars = take(stats, "stored_scalars").get<std::uint64_t>();
    if (!stats.empty()) meta["build_stats"] = std::move(stats);
    run.tool_version = take(meta, "tool_version").get<std::string>();

    auto& queries = doc.at("queries");
    const auto latency = take(queries, "latency_ns");
    const auto recall = take(queries, "recall");
    const auto comps = take(queries, "dist_comps");
    const auto aux = take(queries, "aux");
    const std::size_t n = latency.size();
    if (n == 0) throw ValidationError("run record has no queries");
    if (recall.size() != n || comps.size() != n || aux.size() != n)
      throw ValidationError("run record query arrays differ in length");
    if (n != m) throw ValidationError("run record query count differs from meta.workload.m");
    if (queries.contains("query_id")) {
      run.query_ids = take(queries, "query_id").get<std::vector<PointId>>();
      if (run.query_ids.size() != n) throw ValidationError("query_id array length mismatch");
    }
    for (std::size_t i = 0; i < n; ++i) {
      QueryRecord r{latency[i].get<std::int64_t>(), recall[i].get<double>(),
                    comps[i].get<std::uint64_t>(), aux[i].get<std::uint64_t>()};
      if (r.latency_ns <= 0) throw ValidationError("query latency must be positive");
      if (!(r.recall >= 0.0 && r.recall <= 1.0)) throw ValidationError("recall outside [0, 1]");
      run.records.push_back(r);
    }

    auto summary = take(doc, "summary");
    run.summary.avg_recall = take(summary, "avg_recall").get<double>();
    run.summary.qps = take(summary, "qps").get<double>();
    run.summary.total_dist_comps = take(summary, "total_dist_comps").get<std::uint64_t>();
    if (!summary.empty()) doc["summary"] = std::move(summary);
    if (!(summarize(run.records) == run.summary))
      throw ValidationError("run record summary does not match its per-query records");
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("run record schema: ") + e.what());
  }
  detail::drop_if_empty(doc, "meta");
  detail::drop_if_empty(doc, "queries");
  run.extra = std::move(doc);
  return run;
}

inline void write_run(const std::filesystem::path& path, const RunResult& run) {
  auto out = detail::open_for_write(path);
  out << to_json(run).dump(1) << "\n";
  if (!out) throw IoError("write error on '" + path.string() + "'");
}

inline RunResult read_run(const std::filesystem::path& path) {
  const auto bytes = detail::read_file(path);
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(bytes.begin(), bytes.end());
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError("'" + path.string() + "': " + e.what());
  }
  return run_from_json(std::move(doc));
}

}  // namespace lidbench
