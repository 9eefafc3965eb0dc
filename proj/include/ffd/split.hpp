/**
 * @file split.hpp
 * @brief Train/test partition of edges with equal-count negative sampling.
 */
#pragma once

#include <cmath>
#include <cstdint>
#include <fstream>
#include <stdexcept>
#include <string>
#include <unordered_set>
#include <vector>

#include <json.hpp>

#include "ffd/graph.hpp"
#include "ffd/rng.hpp"

namespace ffd {

struct SplitSpec {
  double train_fraction = 0.5;
  std::uint64_t seed = 0;
  double negative_ratio = 1.0;
};

struct LabeledPair {
  NodeId src = 0;
  NodeId dst = 0;
  int label = 0;
  friend bool operator==(const LabeledPair&, const LabeledPair&) = default;
};

struct SplitResult {
  /// Positives first, then negatives.
  std::vector<LabeledPair> train;
  std::vector<LabeledPair> test;
  /// Message-passing graph: train positives only.
  DirectedGraph observed;
  std::uint64_t seed = 0;
};

/**
 * @brief Partition the edges of `g` and draw negatives.
 *
 * Negatives are uniform over ordered non-edges (u != v, A[u][v] == 0) of the
 * full graph, drawn by rejection; train and test negatives are disjoint. The
 * reverse of a true edge is a valid negative.
 */
inline SplitResult split(const DirectedGraph& g, const SplitSpec& spec) {
  if (!(spec.train_fraction > 0.0 && spec.train_fraction < 1.0)) {
    throw std::invalid_argument("train_fraction must lie in (0, 1)");
  }
  if (!(spec.negative_ratio >= 0.0)) throw std::invalid_argument("negative_ratio must be >= 0");
  const std::size_t m = g.num_edges();
  if (m < 10) throw std::invalid_argument("split needs at least 10 edges, got " + std::to_string(m));
  const auto n_train = static_cast<std::size_t>(std::llround(spec.train_fraction * static_cast<double>(m)));
  if (n_train == 0 || n_train >= m) {
    throw std::invalid_argument("train_fraction leaves an empty train or test set");
  }

  std::vector<Edge> order = g.edges();
  Rng pos_rng(derive_seed(spec.seed, "split/positives"));
  pos_rng.shuffle(order);

  SplitResult out;
  out.seed = spec.seed;
  std::vector<Edge> train_edges(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_train));
  for (const Edge& e : train_edges) out.train.push_back({e.src, e.dst, 1});
  for (std::size_t i = n_train; i < m; ++i) out.test.push_back({order[i].src, order[i].dst, 1});

  const auto neg_train = static_cast<std::size_t>(std::llround(spec.negative_ratio * static_cast<double>(n_train)));
  const auto neg_test = static_cast<std::size_t>(std::llround(spec.negative_ratio * static_cast<double>(m - n_train)));
  const auto n = static_cast<std::uint64_t>(g.num_nodes());
  const std::uint64_t non_edges = n * (n - 1) - m;
  if (neg_train + neg_test > non_edges) throw std::invalid_argument("not enough non-edges for negative sampling");

  Rng neg_rng(derive_seed(spec.seed, "split/negatives"));
  std::unordered_set<std::uint64_t> taken;
  auto draw = [&](std::vector<LabeledPair>& dst, std::size_t count) {
    while (count > 0) {
      const auto u = static_cast<NodeId>(neg_rng.below(n));
      const auto v = static_cast<NodeId>(neg_rng.below(n));
      if (u == v || g.has_edge(u, v)) continue;
      if (!taken.insert(static_cast<std::uint64_t>(u) * n + static_cast<std::uint64_t>(v)).second) continue;
      dst.push_back({u, v, 0});
      --count;
    }
  };
  draw(out.train, neg_train);
  draw(out.test, neg_test);

  out.observed = DirectedGraph(g.num_nodes(), std::move(train_edges));
  return out;
}

inline nlohmann::json split_to_json(const SplitResult& s) {
  auto pairs = [](const std::vector<LabeledPair>& v, int label) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& p : v)
      if (p.label == label) arr.push_back({p.src, p.dst});
    return arr;
  };
  return {{"train_pos", pairs(s.train, 1)}, {"train_neg", pairs(s.train, 0)},
          {"test_pos", pairs(s.test, 1)},   {"test_neg", pairs(s.test, 0)},
          {"seed", s.seed}};
}

/// Rebuilds the labeled pair lists (and observed graph, given node count) from split JSON.
inline SplitResult split_from_json(const nlohmann::json& j, std::size_t num_nodes) {
  SplitResult s;
  s.seed = j.at("seed").get<std::uint64_t>();
  auto read = [&](const char* key, int label, std::vector<LabeledPair>& dst) {
    for (const auto& p : j.at(key)) dst.push_back({p.at(0).get<NodeId>(), p.at(1).get<NodeId>(), label});
  };
  read("train_pos", 1, s.train);
  read("train_neg", 0, s.train);
  read("test_pos", 1, s.test);
  read("test_neg", 0, s.test);
  std::vector<Edge> edges;
  for (const auto& p : s.train)
    if (p.label == 1) edges.push_back({p.src, p.dst});
  s.observed = DirectedGraph(num_nodes, std::move(edges));
  return s;
}

inline void save_split(const std::string& path, const SplitResult& s) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write split: " + path);
  out << split_to_json(s).dump() << '\n';
}

}  // namespace ffd
