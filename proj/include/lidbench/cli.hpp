// SPDX-License-Identifier: Apache-2.0
//
// Command-line front end. Exit codes: 0 ok, 1 validation error, 2 I/O error.
#pragma once

#include <glob.h>

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "lidbench/bench.hpp"
#include "lidbench/indexes.hpp"
#include "lidbench/lid.hpp"
#include "lidbench/run_io.hpp"
#include "lidbench/svg.hpp"
#include "lidbench/workload.hpp"

namespace lidbench {

namespace cli {

inline std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    out.emplace_back(s.substr(start, pos == std::string_view::npos ? pos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

/// "a=1,b=2;a=3" -> [{a:1,b:2},{a:3}]. An empty string is one empty point.
inline std::vector<Params> parse_grid(std::string_view text) {
  std::vector<Params> grid;
  for (const auto& point : split(text, ';')) {
    Params p;
    for (const auto& item : split(point, ',')) {
      if (item.empty()) continue;
      const auto eq = item.find('=');
      if (eq == std::string::npos || eq == 0 || eq + 1 == item.size())
        throw ValidationError("malformed parameter '" + item + "', expected key=value");
      const auto key = item.substr(0, eq);
      if (!p.emplace(key, item.substr(eq + 1)).second)
        throw ValidationError("parameter '" + key + "' given twice");
    }
    grid.push_back(std::move(p));
  }
  return grid;
}

inline std::vector<std::filesystem::path> expand_glob(const std::string& pattern) {
  glob_t g{};
  const int rc = ::glob(pattern.c_str(), 0, nullptr, &g);
  std::vector<std::filesystem::path> out;
  if (rc == 0)
    for (std::size_t i = 0; i < g.gl_pathc; ++i) out.emplace_back(g.gl_pathv[i]);
  globfree(&g);
  if (out.empty()) throw IoError("no files match '" + pattern + "'");
  return out;
}

inline std::vector<RunResult> load_runs(const std::string& pattern) {
  std::vector<RunResult> runs;
  for (const auto& p : expand_glob(pattern)) runs.push_back(read_run(p));
  return runs;
}

inline std::vector<double> parse_thresholds(const std::string& text) {
  std::vector<double> out;
  for (const auto& s : split(text, ',')) {
    const double t = detail::parse_double(s);
    if (!(t >= 0.0 && t <= 1.0)) throw ValidationError("threshold " + s + " outside [0, 1]");
    out.push_back(t);
  }
  return out;
}

inline std::string fmt(double v, const char* spec = "%.6g") {
  char buf[48];
  std::snprintf(buf, sizeof buf, spec, v);
  return buf;
}

inline std::string params_string(const Params& p) {
  std::string s;
  for (const auto& [k, v] : p) s += (s.empty() ? "" : ",") + k + "=" + v;
  return s.empty() ? "-" : s;
}

}  // namespace cli

inline int run_cli(int argc, const char* const* argv, std::ostream& out = std::cout,
                   std::ostream& err = std::cerr) {
  CLI::App app{"Nearest-neighbor benchmark driven by local intrinsic dimensionality"};
  app.name("lidbench");
  app.require_subcommand(1);

  // dataset
  auto* dataset = app.add_subcommand("dataset", "Create datasets in the native format");
  dataset->require_subcommand(1);
  std::string conv_in, conv_format, conv_metric = "euclidean", conv_out;
  auto* convert = dataset->add_subcommand("convert", "Convert fvecs or csv to .lidb");
  convert->add_option("--in", conv_in, "Input file")->required();
  convert->add_option("--format", conv_format, "fvecs or csv")
      ->required()
      ->check(CLI::IsMember({"fvecs", "csv"}));
  convert->add_option("--metric", conv_metric, "euclidean or angular")
      ->check(CLI::IsMember({"euclidean", "angular"}));
  convert->add_option("--out", conv_out, "Output .lidb file")->required();

  std::string synth_kind, synth_out;
  SyntheticSpec synth;
  auto* synth_cmd = dataset->add_subcommand("synth", "Generate a synthetic dataset");
  synth_cmd->add_option("--kind", synth_kind, "uniform-ball, uniform-cube or gaussian-mixture")
      ->required();
  synth_cmd->add_option("--n", synth.n, "Number of points")->required();
  synth_cmd->add_option("--d", synth.d, "Dimension")->required();
  synth_cmd->add_option("--clusters", synth.clusters, "Mixture components");
  synth_cmd->add_option("--sigma", synth.sigma, "Mixture standard deviation");
  synth_cmd->add_option("--seed", synth.seed, "Random seed")->required();
  synth_cmd->add_option("--out", synth_out, "Output .lidb file")->required();

  // lid
  std::string lid_data, lid_out;
  std::size_t lid_k = 100;
  auto* lid = app.add_subcommand("lid", "Estimate the LID of every point");
  lid->add_option("--data", lid_data, "Dataset (.lidb)")->required();
  lid->add_option("--k", lid_k, "Neighbors per estimate");
  lid->add_option("--out", lid_out, "Profile CSV")->required();

  // workload
  std::string wl_data, wl_profile, wl_difficulty, wl_out;
  std::optional<std::size_t> wl_m;
  std::size_t wl_query_k = 10;
  std::uint64_t wl_seed = 0;
  auto* workload = app.add_subcommand("workload", "Select a query workload by LID");
  workload->add_option("--data", wl_data, "Dataset (.lidb)")->required();
  workload->add_option("--profile", wl_profile, "Profile CSV")->required();
  workload->add_option("--difficulty", wl_difficulty, "easy, medium, hard or diverse")->required();
  workload->add_option("--m", wl_m, "Number of queries (10000, or 5000 for diverse)");
  workload->add_option("--query-k", wl_query_k, "Neighbors per query");
  workload->add_option("--seed", wl_seed, "Random seed");
  workload->add_option("--out", wl_out, "Output directory")->required();

  // run
  std::string run_workload, run_algo, run_build, run_search, run_out;
  std::size_t run_reps = 1;
  std::uint64_t run_seed = 0;
  auto* run_cmd = app.add_subcommand("run", "Build indexes and time the workload");
  run_cmd->add_option("--workload", run_workload, "Workload directory")->required();
  run_cmd->add_option("--algo", run_algo, "bruteforce, ivf, rpforest or knngraph")->required();
  run_cmd->add_option("--build", run_build, "Build grid: k=v,...[;k=v,...]");
  run_cmd->add_option("--search", run_search, "Search grid: k=v,...[;k=v,...]");
  run_cmd->add_option("--reps", run_reps, "Timing repetitions per query");
  run_cmd->add_option("--seed", run_seed, "Build seed when the grid gives none");
  run_cmd->add_option("--out", run_out, "Output directory")->required();

  // eval
  std::string eval_runs, eval_thresholds = "0.75,0.9", eval_measure = "qps";
  auto* eval = app.add_subcommand("eval", "Summarize run records");
  eval->require_subcommand(1);
  auto* eval_pareto = eval->add_subcommand("pareto", "Pareto frontier per algorithm");
  auto* eval_ranking = eval->add_subcommand("ranking", "Best configuration per recall threshold");
  for (auto* sub : {eval_pareto, eval_ranking})
    sub->add_option("--runs", eval_runs, "Glob of run-record files")->required();
  eval_ranking->add_option("--thresholds", eval_thresholds, "Comma-separated recall levels");
  eval_ranking->add_option("--measure", eval_measure, "qps or distcomps");

  // plot
  std::string plot_kind, plot_runs, plot_out;
  std::vector<std::string> plot_profiles;
  std::size_t plot_hard_m = 10000;
  auto* plot = app.add_subcommand("plot", "Render an SVG figure");
  plot->add_option("kind", plot_kind, "tradeoff, lid, recall-dist or recall-lid")
      ->required()
      ->check(CLI::IsMember({"tradeoff", "lid", "recall-dist", "recall-lid"}));
  plot->add_option("--runs", plot_runs, "Glob of run-record files");
  plot->add_option("--profile", plot_profiles, "Profile CSV (repeatable for lid)");
  plot->add_option("--hard-m", plot_hard_m, "Hard-set size marked on lid plots");
  plot->add_option("--out", plot_out, "Output SVG")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "lidbench: error: " << e.what() << "\n";
    return 1;
  }

  try {
    if (*convert) {
      const Metric metric = parse_metric(conv_metric);
      Dataset d = conv_format == "fvecs" ? load_fvecs(conv_in, metric) : load_csv(conv_in, metric);
      write_native(conv_out, d);
      out << "wrote " << conv_out << ": n=" << d.size() << " d=" << d.dim()
          << " fingerprint=" << fingerprint_hex(d.fingerprint()) << "\n";
    } else if (*synth_cmd) {
      synth.kind = parse_synthetic_kind(synth_kind);
      const Dataset d = generate_synthetic(synth);
      write_native(synth_out, d);
      out << "wrote " << synth_out << ": n=" << d.size() << " d=" << d.dim()
          << " fingerprint=" << fingerprint_hex(d.fingerprint()) << "\n";
    } else if (*lid) {
      const Dataset d = load_native(lid_data);
      const LidProfile profile = lid_profile(d, lid_k);
      write_profile(lid_out, profile);
      const LidSummary s = lid_summary(profile);
      out << "dataset   " << d.name() << "\n"
          << "k         " << lid_k << "\n"
          << "points    " << d.size() << "\n"
          << "avg       " << cli::fmt(s.avg, "%.4f") << "\n"
          << "median    " << cli::fmt(s.median, "%.4f") << "\n"
          << "p25       " << cli::fmt(s.p25, "%.4f") << "\n"
          << "p75       " << cli::fmt(s.p75, "%.4f") << "\n"
          << "infinite  " << s.infinite_count << "\n"
          << "degenerate " << s.degenerate_count << "\n";
    } else if (*workload) {
      const Dataset d = load_native(wl_data);
      const LidProfile profile = read_profile(wl_profile);
      if (profile.fingerprint != d.fingerprint())
        throw ValidationError("profile fingerprint " + fingerprint_hex(profile.fingerprint) +
                              " does not match dataset " + fingerprint_hex(d.fingerprint()));
      const Difficulty diff = parse_difficulty(wl_difficulty);
      const std::size_t m = wl_m.value_or(diff == Difficulty::diverse ? 5000 : 10000);
      std::vector<PointId> ids;
      switch (diff) {
        case Difficulty::easy: ids = select_easy(profile, m); break;
        case Difficulty::medium: ids = select_medium(profile, m); break;
        case Difficulty::hard: ids = select_hard(profile, m).ids; break;
        case Difficulty::diverse: ids = select_diverse(profile, m, wl_seed); break;
      }
      const Workload w = build_workload(d, ids, diff, wl_query_k, wl_seed);
      save_workload(wl_out, w);
      out << "wrote " << wl_out << ": " << to_string(diff) << " m=" << w.size()
          << " train=" << w.train->size() << "\n";
    } else if (*run_cmd) {
      const Workload w = load_workload(run_workload);
      const Algorithm algo = parse_algorithm(run_algo);
      const auto build_grid = cli::parse_grid(run_build);
      const auto search_grid = cli::parse_grid(run_search);
      for (const auto& p : build_grid) detail::check_keys(p, build_keys(algo), "build", algo);
      for (const auto& p : search_grid) parse_search_params(algo, p);
      if (run_reps == 0) throw ValidationError("--reps must be >= 1");
      std::error_code ec;
      std::filesystem::create_directories(run_out, ec);
      if (ec) throw IoError("cannot create '" + run_out + "': " + ec.message());
      for (std::size_t b = 0; b < build_grid.size(); ++b) {
        const IndexSpec spec{algo, build_grid[b], run_seed};
        const BuiltIndex built = build_index(w.train, spec);
        for (std::size_t s = 0; s < search_grid.size(); ++s) {
          const RunResult r = run(*built.index, spec, built.stats, w, search_grid[s], run_reps);
          const auto file = std::filesystem::path(run_out) /
                            (std::string(to_string(algo)) + "-b" + std::to_string(b) + "-s" +
                             std::to_string(s) + ".json");
          write_run(file, r);
          out << file.string() << "  build=" << cli::params_string(r.build_params)
              << "  search=" << cli::params_string(r.search_params)
              << "  recall=" << cli::fmt(r.summary.avg_recall, "%.4f")
              << "  qps=" << cli::fmt(r.summary.qps, "%.1f") << "\n";
        }
      }
    } else if (*eval_pareto) {
      const auto files = cli::expand_glob(eval_runs);
      std::map<std::string, std::vector<std::pair<TradeoffPoint, std::string>>> by_algo;
      for (const auto& f : files) {
        const RunResult r = read_run(f);
        by_algo[std::string(to_string(r.algorithm))].push_back(
            {{r.summary.avg_recall, r.summary.qps}, f.string()});
      }
      out << "algorithm\trecall\tqps\tfile\n";
      for (const auto& [algo, entries] : by_algo) {
        std::vector<TradeoffPoint> pts;
        for (const auto& e : entries) pts.push_back(e.first);
        for (auto i : pareto_indices(pts))
          out << algo << "\t" << cli::fmt(pts[i].recall, "%.4f") << "\t"
              << cli::fmt(pts[i].qps, "%.2f") << "\t" << entries[i].second << "\n";
      }
    } else if (*eval_ranking) {
      const auto thresholds = cli::parse_thresholds(eval_thresholds);
      const Measure measure = parse_measure(eval_measure);
      std::map<std::string, std::vector<RankedRun>> by_algo;
      for (const auto& r : cli::load_runs(eval_runs)) {
        const double comps = double(r.summary.total_dist_comps) / double(r.records.size());
        by_algo[std::string(to_string(r.algorithm))].push_back(
            {r.summary.avg_recall, r.summary.qps, comps});
      }
      const RankingTable table = ranking(by_algo, thresholds, measure);
      out << "algorithm";
      for (double t : thresholds) out << "\t" << cli::fmt(t) << "\tratio";
      out << "\n";
      for (const auto& [algo, cells] : table.cells) {
        out << algo;
        for (const auto& c : cells)
          out << "\t" << (c.value ? cli::fmt(*c.value) : "-") << "\t"
              << (c.ratio ? cli::fmt(*c.ratio, "%.3f") : "-");
        out << "\n";
      }
    } else if (*plot) {
      std::string doc;
      auto need_runs = [&] {
        if (plot_runs.empty()) throw ValidationError("plot " + plot_kind + " needs --runs");
        return cli::load_runs(plot_runs);
      };
      auto need_profile = [&] {
        if (plot_profiles.size() != 1)
          throw ValidationError("plot " + plot_kind + " needs exactly one --profile");
        return read_profile(plot_profiles.front());
      };
      if (plot_kind == "tradeoff") {
        const auto runs = need_runs();
        doc = plot_tradeoff(runs, runs.front().dataset);
      } else if (plot_kind == "recall-dist") {
        doc = plot_recall_distribution(need_runs());
      } else if (plot_kind == "recall-lid") {
        const auto runs = need_runs();
        if (runs.size() != 1)
          throw ValidationError("plot recall-lid needs exactly one run, got " +
                                std::to_string(runs.size()));
        doc = plot_recall_vs_lid(runs.front(), need_profile());
      } else {
        if (plot_profiles.empty()) throw ValidationError("plot lid needs --profile");
        std::vector<LidProfile> profiles;
        for (const auto& p : plot_profiles) profiles.push_back(read_profile(p));
        std::vector<RidgeInput> rows;
        for (std::size_t i = 0; i < profiles.size(); ++i) {
          std::size_t finite = 0;
          for (std::size_t j = 0; j < profiles[i].size(); ++j) finite += profiles[i].finite(j);
          const std::size_t m = std::min(plot_hard_m, finite);
          const double threshold = m ? select_hard(profiles[i], m).threshold
                                     : std::numeric_limits<double>::quiet_NaN();
          rows.push_back({std::filesystem::path(plot_profiles[i]).stem().string(), &profiles[i],
                          threshold});
        }
        doc = plot_lid_ridgeline(rows);
      }
      write_text(plot_out, doc);
      out << "wrote " << plot_out << "\n";
    }
  } catch (const IoError& e) {
    err << "lidbench: error: " << e.what() << "\n";
    return 2;
  } catch (const std::filesystem::filesystem_error& e) {
    err << "lidbench: error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    err << "lidbench: error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

}  // namespace lidbench
