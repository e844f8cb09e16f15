// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <algorithm>
#include <random>
#include <set>

#include "lidbench/bench.hpp"
#include "lidbench/indexes.hpp"
#include "support/oracles.hpp"

using namespace lidbench;

namespace {

std::shared_ptr<const Dataset> shared(Dataset d) { return std::make_shared<const Dataset>(std::move(d)); }

BuiltIndex build(std::shared_ptr<const Dataset> train, Algorithm a, Params p = {}) {
  return build_index(std::move(train), IndexSpec{a, std::move(p), 1});
}

/// True when `ids` is a correct k-NN answer under the distance-threshold tie rule.
bool matches_truth(const Dataset& train, std::span<const float> q, std::span<const PointId> ids,
                   std::size_t k) {
  const auto truth = oracle::naive_knn(train, q, k, -1,
                                       [&](auto x, auto y) { return distance(train.metric(), x, y); });
  if (ids.size() != std::min(k, train.size())) return false;
  if (std::set<PointId>(ids.begin(), ids.end()).size() != ids.size()) return false;
  const double rk = truth.back().dist;
  for (PointId id : ids)
    if (distance(train.metric(), q, train.row(id)) > rk * kRecallTieFactor) return false;
  return true;
}

}  // namespace

TEST(Algorithm, ParseAndSchemas) {
  for (auto a : {Algorithm::bruteforce, Algorithm::ivf, Algorithm::rpforest, Algorithm::knngraph}) {
    EXPECT_EQ(parse_algorithm(to_string(a)), a);
    EXPECT_TRUE(build_keys(a).count("seed"));
  }
  EXPECT_THROW(parse_algorithm("hnsw"), ValidationError);
  EXPECT_TRUE(build_keys(Algorithm::ivf).count("nlist"));
  EXPECT_TRUE(search_keys(Algorithm::ivf).count("nprobe"));
  EXPECT_TRUE(build_keys(Algorithm::rpforest).count("num_trees"));
  EXPECT_TRUE(build_keys(Algorithm::rpforest).count("leaf_size"));
  EXPECT_TRUE(search_keys(Algorithm::rpforest).count("search_k"));
  EXPECT_TRUE(build_keys(Algorithm::knngraph).count("degree"));
  EXPECT_TRUE(search_keys(Algorithm::knngraph).count("ef"));
}

TEST(BuildIndex, RejectsBadParameters) {
  std::mt19937_64 rng(1);
  auto train = shared(oracle::random_dataset(rng, 50, 3, Metric::euclidean));
  EXPECT_THROW(build(train, Algorithm::ivf, {{"nlist", "51"}}), ValidationError);
  EXPECT_THROW(build(train, Algorithm::ivf, {{"nlist", "0"}}), ValidationError);
  EXPECT_THROW(build(train, Algorithm::ivf, {{"nlist", "x"}}), ValidationError);
  EXPECT_THROW(build(train, Algorithm::ivf, {{"degree", "3"}}), ValidationError);
  EXPECT_THROW(build(train, Algorithm::knngraph, {{"degree", "0"}}), ValidationError);
  EXPECT_THROW(build(train, Algorithm::rpforest, {{"num_trees", "0"}}), ValidationError);
  EXPECT_THROW(build(train, Algorithm::bruteforce, {{"nlist", "2"}}), ValidationError);

  const auto ivf = build(train, Algorithm::ivf, {{"nlist", "5"}});
  const auto q = train->row(0);
  EXPECT_THROW(ivf.index->search(q, 5, Params{{"ef", "3"}}), ValidationError);
  EXPECT_THROW(ivf.index->search(q, 51, Params{}), ValidationError);
  EXPECT_THROW(ivf.index->search(q, 0, Params{}), ValidationError);
  const std::vector<float> wrong_dim{1, 2};
  EXPECT_THROW(ivf.index->search(wrong_dim, 1, Params{}), ValidationError);
}

TEST(BruteForce, ExactAndCountsEveryPoint) {
  std::mt19937_64 rng(2);
  for (auto metric : {Metric::euclidean, Metric::angular}) {
    auto train = shared(oracle::random_dataset(rng, 700, 6, metric, true));
    const auto b = build(train, Algorithm::bruteforce);
    EXPECT_EQ(b.stats.stored_scalars, 0u);
    const Dataset queries = oracle::random_dataset(rng, 40, 6, metric, true);
    for (std::size_t q = 0; q < queries.size(); ++q) {
      const auto r = b.index->search(queries.row(q), 10, Params{});
      EXPECT_EQ(r.dist_comps, train->size());
      const auto truth = oracle::naive_knn(*train, queries.row(q), 10, -1,
                                           [&](auto x, auto y) { return distance(metric, x, y); });
      for (std::size_t i = 0; i < 10; ++i) EXPECT_EQ(r.ids[i], truth[i].id);
    }
  }
}

TEST(Ivf, SingleListHoldsEverything) {
  std::mt19937_64 rng(3);
  auto train = shared(oracle::random_dataset(rng, 123, 4, Metric::euclidean));
  const auto built = build(train, Algorithm::ivf, {{"nlist", "1"}});
  const auto& ivf = dynamic_cast<const IvfIndex&>(*built.index);
  ASSERT_EQ(ivf.lists().size(), 1u);
  EXPECT_EQ(ivf.lists()[0].size(), 123u);
}

TEST(Ivf, ListsPartitionTrainAndPointsGoToNearestCentroid) {
  std::mt19937_64 rng(4);
  for (auto metric : {Metric::euclidean, Metric::angular}) {
    auto train = shared(oracle::random_dataset(rng, 900, 5, metric));
    const auto built = build(train, Algorithm::ivf, {{"nlist", "17"}});
    const auto& ivf = dynamic_cast<const IvfIndex&>(*built.index);
    std::vector<int> seen(train->size(), 0);
    for (std::size_t c = 0; c < ivf.nlist(); ++c) {
      EXPECT_FALSE(ivf.lists()[c].empty());
      for (PointId id : ivf.lists()[c]) {
        ++seen[id];
        const double own = distance(metric, train->row(id), ivf.centroid(c));
        for (std::size_t o = 0; o < ivf.nlist(); ++o)
          EXPECT_LE(own, distance(metric, train->row(id), ivf.centroid(o)));
      }
    }
    for (int s : seen) EXPECT_EQ(s, 1);
    EXPECT_EQ(built.stats.stored_scalars, 17u * 5u + 900u);
  }
}

TEST(Ivf, DistCompsRecomputedFromLayout) {
  std::mt19937_64 rng(5);
  auto train = shared(oracle::random_dataset(rng, 1500, 8, Metric::euclidean));
  const auto built = build(train, Algorithm::ivf, {{"nlist", "31"}});
  const auto& ivf = dynamic_cast<const IvfIndex&>(*built.index);
  const Dataset queries = oracle::random_dataset(rng, 50, 8, Metric::euclidean);
  for (std::size_t nprobe : {1, 2, 7, 31, 100}) {
    for (std::size_t q = 0; q < queries.size(); ++q) {
      // rank centroids independently of the index's own ranking
      std::vector<std::pair<double, std::size_t>> order;
      for (std::size_t c = 0; c < ivf.nlist(); ++c)
        order.emplace_back(oracle::naive_distance(Metric::euclidean, queries.row(q), ivf.centroid(c)), c);
      std::sort(order.begin(), order.end());
      std::uint64_t expect = ivf.nlist();
      for (std::size_t p = 0; p < std::min(nprobe, ivf.nlist()); ++p)
        expect += ivf.lists()[order[p].second].size();
      const auto r = ivf.search(queries.row(q), 10, SearchParams{nprobe, 0, 0});
      EXPECT_EQ(r.dist_comps, expect);
    }
  }
}

TEST(Ivf, DeterministicGivenSeed) {
  std::mt19937_64 rng(6);
  auto train = shared(oracle::random_dataset(rng, 600, 4, Metric::euclidean));
  const auto a = build(train, Algorithm::ivf, {{"nlist", "12"}, {"seed", "9"}});
  const auto b = build(train, Algorithm::ivf, {{"nlist", "12"}, {"seed", "9"}});
  EXPECT_EQ(dynamic_cast<const IvfIndex&>(*a.index).lists(),
            dynamic_cast<const IvfIndex&>(*b.index).lists());
}

TEST(Ivf, ClusteredDuplicatesDoNotLeaveEmptyLists) {
  // 4 distinct points repeated; asking for 10 lists forces reseeding
  std::vector<float> v;
  for (int i = 0; i < 200; ++i) {
    v.push_back(float(i % 4));
    v.push_back(float(i % 4 == 3));
  }
  auto train = shared(Dataset("dups", Metric::euclidean, 2, v));
  const auto built = build(train, Algorithm::ivf, {{"nlist", "10"}});
  const auto& ivf = dynamic_cast<const IvfIndex&>(*built.index);
  std::size_t total = 0;
  for (const auto& l : ivf.lists()) total += l.size();
  EXPECT_EQ(total, 200u);
  const auto r = ivf.search(train->row(0), 5, SearchParams{10, 0, 0});
  EXPECT_TRUE(matches_truth(*train, train->row(0), r.ids, 5));
}

TEST(KnnGraph, CompleteGraphWhenDegreeCoversAll) {
  std::mt19937_64 rng(7);
  auto train = shared(oracle::random_dataset(rng, 40, 3, Metric::euclidean));
  const auto built = build(train, Algorithm::knngraph, {{"degree", "1000"}});
  const auto& g = dynamic_cast<const KnnGraphIndex&>(*built.index);
  EXPECT_EQ(g.degree(), 39u);
  for (PointId v = 0; v < 40; ++v) {
    std::set<PointId> nb(g.neighbors(v).begin(), g.neighbors(v).end());
    EXPECT_EQ(nb.size(), 39u);
    EXPECT_FALSE(nb.count(v));
  }
}

TEST(KnnGraph, EdgesAreExactNeighborsAndEntryIsMedoid) {
  std::mt19937_64 rng(8);
  auto train = shared(oracle::random_dataset(rng, 300, 4, Metric::euclidean));
  const auto built = build(train, Algorithm::knngraph, {{"degree", "6"}});
  const auto& g = dynamic_cast<const KnnGraphIndex&>(*built.index);
  for (PointId v = 0; v < 300; v += 13) {
    const auto truth = oracle::naive_knn(*train, train->row(v), 6, v,
                                         [](auto x, auto y) { return distance(Metric::euclidean, x, y); });
    for (std::size_t i = 0; i < 6; ++i) EXPECT_EQ(g.neighbors(v)[i], truth[i].id);
  }
  std::vector<long double> sums(300, 0);
  for (std::size_t i = 0; i < 300; ++i)
    for (std::size_t j = 0; j < 300; ++j)
      sums[i] += oracle::naive_distance(Metric::euclidean, train->row(i), train->row(j));
  EXPECT_EQ(g.entry_point(), PointId(std::min_element(sums.begin(), sums.end()) - sums.begin()));
}

TEST(RpForest, LeavesRespectSizeAndCoverAllPoints) {
  std::mt19937_64 rng(9);
  auto train = shared(oracle::random_dataset(rng, 1000, 6, Metric::euclidean));
  const auto built = build(train, Algorithm::rpforest, {{"num_trees", "3"}, {"leaf_size", "10"}});
  // exhaustive search_k touches every point exactly once
  const auto r = built.index->search(train->row(0), 5, Params{{"search_k", "1000"}});
  EXPECT_EQ(r.dist_comps, 1000u);
  EXPECT_GT(r.aux, 0u);
  const auto small = built.index->search(train->row(0), 5, Params{{"search_k", "5"}});
  EXPECT_GE(small.dist_comps, 5u);
  EXPECT_LE(small.dist_comps, 10u);
}

TEST(RpForest, SurvivesDuplicatePoints) {
  std::vector<float> v(300 * 2, 1.0f);
  v[0] = 2.0f;
  auto train = shared(Dataset("dups", Metric::euclidean, 2, v));
  const auto built = build(train, Algorithm::rpforest, {{"leaf_size", "4"}});
  const auto r = built.index->search(train->row(5), 3, Params{{"search_k", "300"}});
  EXPECT_TRUE(matches_truth(*train, train->row(5), r.ids, 3));
}

// Exhaustive settings reduce every index to exact search.
TEST(OracleEquivalence, ExhaustiveParametersMatchBruteForce) {
  std::mt19937_64 rng(31337);
  std::uniform_int_distribution<std::size_t> size(20, 600), dim(1, 16);
  for (int inst = 0; inst < 12; ++inst) {
    const Metric metric = inst % 2 ? Metric::angular : Metric::euclidean;
    const std::size_t n = size(rng), d = dim(rng);
    auto train = shared(oracle::random_dataset(rng, n, d, metric, inst % 3 == 0));
    const Dataset queries = oracle::random_dataset(rng, 15, d, metric, inst % 3 == 0);
    const std::size_t k = std::min<std::size_t>(10, n);
    const std::string ns = std::to_string(n);
    const std::string nlist = std::to_string(std::max<std::size_t>(1, n / 20));
    const auto ivf = build(train, Algorithm::ivf, {{"nlist", nlist}});
    const auto rp = build(train, Algorithm::rpforest, {{"num_trees", "2"}, {"leaf_size", "8"}});
    const auto graph = build(train, Algorithm::knngraph, {{"degree", std::to_string(n - 1)}});
    for (std::size_t q = 0; q < queries.size(); ++q) {
      const auto row = queries.row(q);
      EXPECT_TRUE(matches_truth(*train, row, ivf.index->search(row, k, Params{{"nprobe", nlist}}).ids, k));
      EXPECT_TRUE(matches_truth(*train, row, rp.index->search(row, k, Params{{"search_k", ns}}).ids, k));
      EXPECT_TRUE(matches_truth(*train, row, graph.index->search(row, k, Params{{"ef", ns}}).ids, k));
    }
  }
}

TEST(Monotonicity, RecallNondecreasingInSearchEffort) {
  const Dataset data = generate_synthetic({SyntheticKind::gaussian_mixture, 4000, 12, 8, 0.15, 5});
  std::vector<PointId> ids;
  for (PointId i = 0; i < 4000; i += 20) ids.push_back(i);
  const Workload w = build_workload(data, ids, Difficulty::medium, 10);
  auto avg_recall = [&](const Index& index, const Params& p) {
    const auto parsed = parse_search_params(index.algorithm(), p);
    double sum = 0;
    for (std::size_t q = 0; q < w.size(); ++q) {
      const auto r = index.search(w.queries->row(q), 10, parsed);
      sum += recall(r.ids, w.ground_truth.list(q), 10, w.queries->row(q), *w.train);
    }
    return sum / double(w.size());
  };
  struct Sweep {
    Algorithm algo;
    Params build;
    std::string key;
    std::vector<int> values;
  };
  const std::vector<Sweep> sweeps = {
      {Algorithm::ivf, {{"nlist", "40"}}, "nprobe", {1, 2, 3, 5, 8, 13, 21, 40}},
      {Algorithm::rpforest, {{"num_trees", "4"}}, "search_k", {10, 20, 40, 80, 160, 320, 640}},
      {Algorithm::knngraph, {{"degree", "8"}}, "ef", {1, 5, 10, 20, 40, 80, 160}},
  };
  for (const auto& s : sweeps) {
    const auto built = build(w.train, s.algo, s.build);
    double prev = -1;
    for (int v : s.values) {
      const double r = avg_recall(*built.index, {{s.key, std::to_string(v)}});
      EXPECT_GE(r, prev - 0.01) << to_string(s.algo) << " " << s.key << "=" << v;
      prev = r;
    }
  }
}

TEST(SearchResult, IdsDistinctInRangeAndCountAtLeastReturned) {
  std::mt19937_64 rng(10);
  auto train = shared(oracle::random_dataset(rng, 800, 5, Metric::angular));
  const Dataset queries = oracle::random_dataset(rng, 30, 5, Metric::angular);
  std::vector<BuiltIndex> indexes;
  indexes.push_back(build(train, Algorithm::bruteforce));
  indexes.push_back(build(train, Algorithm::ivf, {{"nlist", "20"}}));
  indexes.push_back(build(train, Algorithm::rpforest, {{"num_trees", "3"}}));
  indexes.push_back(build(train, Algorithm::knngraph, {{"degree", "5"}}));
  for (const auto& b : indexes)
    for (std::size_t q = 0; q < queries.size(); ++q) {
      const auto r = b.index->search(queries.row(q), 10, SearchParams{});
      EXPECT_LE(r.ids.size(), 10u);
      EXPECT_GE(r.dist_comps, r.ids.size());
      EXPECT_EQ(std::set<PointId>(r.ids.begin(), r.ids.end()).size(), r.ids.size());
      for (PointId id : r.ids) EXPECT_LT(id, train->size());
      // determinism
      EXPECT_EQ(b.index->search(queries.row(q), 10, SearchParams{}).ids, r.ids);
    }
}
