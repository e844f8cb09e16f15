// SPDX-License-Identifier: Apache-2.0
//
// Random projection forest with data-dependent splits: each internal node
// cuts along the perpendicular bisector of two "average points" found by a
// short 2-means refinement on a sample of the node's points. Queries walk all
// trees through one shared priority queue keyed by hyperplane margin.
#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>
#include <random>
#include <utility>
#include <vector>

#include "lidbench/index.hpp"
#include "lidbench/neighbors.hpp"

namespace lidbench {

struct RpForestConfig {
  std::size_t num_trees = 10;
  std::size_t leaf_size = 16;
  std::size_t split_sample = 256;
  std::size_t split_rounds = 10;
};

class RpForestIndex final : public Index {
 public:
  RpForestIndex(std::shared_ptr<const Dataset> train, RpForestConfig config, std::uint64_t seed)
      : Index(std::move(train)), config_(config) {
    if (config_.num_trees == 0 || config_.leaf_size == 0 || config_.split_sample < 2)
      throw ValidationError("rpforest needs num_trees >= 1, leaf_size >= 1, split_sample >= 2");
    for (std::size_t t = 0; t < config_.num_trees; ++t) {
      std::mt19937_64 rng(seed ^ (0x9e3779b97f4a7c15ull * (t + 1)));
      roots_.push_back(build_tree(rng));
    }
  }

  using Index::search;
  Algorithm algorithm() const override { return Algorithm::rpforest; }
  std::uint64_t stored_scalars() const override {
    return planes_.size() + internal_nodes_ + leaf_items_.size();
  }

  const RpForestConfig& config() const { return config_; }
  std::size_t node_count() const { return nodes_.size(); }

  SearchResult search(std::span<const float> query, std::size_t k,
                      const SearchParams& params) const override {
    check_query(query, k);
    const std::size_t target = params.search_k ? params.search_k : config_.num_trees * k;
    SearchResult r;
    auto& seen = detail::VisitedSet::local(train().size());
    std::vector<PointId> candidates;
    std::priority_queue<std::pair<double, std::uint32_t>> frontier;
    for (auto root : roots_) frontier.emplace(std::numeric_limits<double>::infinity(), root);

    while (!frontier.empty() && candidates.size() < target) {
      const auto [priority, id] = frontier.top();
      frontier.pop();
      const Node& node = nodes_[id];
      if (node.is_leaf()) {
        for (std::uint32_t i = node.begin; i < node.end; ++i)
          if (seen.insert(leaf_items_[i])) candidates.push_back(leaf_items_[i]);
        continue;
      }
      const double m = margin(node, query);
      ++r.aux;
      frontier.emplace(std::min(priority, m), node.right);
      frontier.emplace(std::min(priority, -m), node.left);
    }

    TopK top(k);
    for (PointId id : candidates) top.push(id, dist(query, id));
    r.dist_comps = candidates.size();
    for (const auto& n : std::move(top).sorted()) r.ids.push_back(n.id);
    return r;
  }

 private:
  static constexpr std::uint32_t kNone = std::numeric_limits<std::uint32_t>::max();

  struct Node {
    std::uint32_t left = kNone;
    std::uint32_t right = kNone;
    std::uint32_t begin = 0;  // leaf item range, or plane offset / dim for internal nodes
    std::uint32_t end = 0;
    double offset = 0.0;

    bool is_leaf() const { return left == kNone; }
  };

  std::span<const float> normal(const Node& node) const {
    return {planes_.data() + std::size_t(node.begin) * train().dim(), train().dim()};
  }

  /// Signed distance to the hyperplane; positive sides go right.
  double margin(const Node& node, std::span<const float> x) const {
    return detail::dot(normal(node), x) - node.offset;
  }

  /// Two centers refined by alternating assign/average rounds on a sample.
  std::pair<std::vector<double>, std::vector<double>> split_centers(
      std::span<const PointId> points, std::mt19937_64& rng) const {
    const std::size_t d = train().dim();
    std::uniform_int_distribution<std::size_t> pick(0, points.size() - 1);
    std::vector<PointId> sample;
    const std::size_t s = std::min(config_.split_sample, points.size());
    for (std::size_t i = 0; i < s; ++i) sample.push_back(points[pick(rng)]);

    auto load = [&](PointId id) {
      const auto row = train().row(id);
      return std::vector<double>(row.begin(), row.end());
    };
    std::uniform_int_distribution<std::size_t> pick_sample(0, sample.size() - 1);
    const std::size_t a = pick_sample(rng);
    std::size_t b = pick_sample(rng);
    if (b == a) b = (a + 1) % sample.size();
    std::vector<double> c0 = load(sample[a]), c1 = load(sample[b]);

    for (std::size_t round = 0; round < config_.split_rounds; ++round) {
      std::vector<double> s0(d, 0.0), s1(d, 0.0);
      std::size_t n0 = 0, n1 = 0;
      for (PointId id : sample) {
        const auto row = train().row(id);
        double d0 = 0.0, d1 = 0.0;
        for (std::size_t j = 0; j < d; ++j) {
          d0 += (row[j] - c0[j]) * (row[j] - c0[j]);
          d1 += (row[j] - c1[j]) * (row[j] - c1[j]);
        }
        auto& acc = d0 <= d1 ? s0 : s1;
        (d0 <= d1 ? n0 : n1)++;
        for (std::size_t j = 0; j < d; ++j) acc[j] += row[j];
      }
      if (n0 == 0 || n1 == 0) break;
      for (std::size_t j = 0; j < d; ++j) {
        c0[j] = s0[j] / double(n0);
        c1[j] = s1[j] / double(n1);
      }
    }
    return {std::move(c0), std::move(c1)};
  }

  std::uint32_t add_leaf(std::span<const PointId> points) {
    Node leaf;
    leaf.begin = std::uint32_t(leaf_items_.size());
    leaf_items_.insert(leaf_items_.end(), points.begin(), points.end());
    leaf.end = std::uint32_t(leaf_items_.size());
    nodes_.push_back(leaf);
    return std::uint32_t(nodes_.size() - 1);
  }

  std::uint32_t build_tree(std::mt19937_64& rng) {
    std::vector<PointId> points(train().size());
    for (std::size_t i = 0; i < points.size(); ++i) points[i] = PointId(i);
    return build_node(points, rng);
  }

  std::uint32_t build_node(std::span<PointId> points, std::mt19937_64& rng) {
    if (points.size() <= config_.leaf_size) return add_leaf(points);
    const std::size_t d = train().dim();
    Node node;
    node.begin = std::uint32_t(planes_.size() / d);
    planes_.resize(planes_.size() + d);
    ++internal_nodes_;
    const std::span<float> w(planes_.data() + std::size_t(node.begin) * d, d);

    // Retry lopsided cuts, then fall back to a random halving.
    std::size_t split = 0;
    bool found = false;
    for (int attempt = 0; attempt < 3 && !found; ++attempt) {
      auto [c0, c1] = split_centers(points, rng);
      double norm2 = 0.0;
      for (std::size_t j = 0; j < d; ++j) norm2 += (c1[j] - c0[j]) * (c1[j] - c0[j]);
      if (norm2 == 0.0) continue;
      const double norm = std::sqrt(norm2);
      node.offset = 0.0;
      for (std::size_t j = 0; j < d; ++j) {
        w[j] = static_cast<float>((c1[j] - c0[j]) / norm);
        node.offset += double(w[j]) * 0.5 * (c0[j] + c1[j]);
      }
      auto right_begin = std::stable_partition(points.begin(), points.end(), [&](PointId id) {
        return margin(node, train().row(id)) <= 0.0;
      });
      split = std::size_t(right_begin - points.begin());
      const double smaller = double(std::min(split, points.size() - split));
      found = smaller >= 0.05 * double(points.size()) && split > 0 && split < points.size();
    }
    if (!found) {
      // A zero normal gives margin 0 at query time, so both halves are explored.
      std::fill(w.begin(), w.end(), 0.0f);
      node.offset = 0.0;
      std::shuffle(points.begin(), points.end(), rng);
      split = points.size() / 2;
    }
    const auto self = std::uint32_t(nodes_.size());
    nodes_.push_back(node);
    const auto left = build_node(points.subspan(0, split), rng);
    const auto right = build_node(points.subspan(split), rng);
    nodes_[self].left = left;
    nodes_[self].right = right;
    return self;
  }

  RpForestConfig config_;
  std::vector<Node> nodes_;
  std::vector<std::uint32_t> roots_;
  std::vector<float> planes_;
  std::vector<PointId> leaf_items_;
  std::size_t internal_nodes_ = 0;
};

}  // namespace lidbench
