// Helpers shared by the unit tests and the acceptance runner.
#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "ffd/graph.hpp"
#include "ffd/line_graph.hpp"
#include "ffd/model.hpp"
#include "ffd/rng.hpp"

namespace ffd::testing {

inline DirectedGraph random_graph(std::size_t n, std::size_t m, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<Edge> raw;
  for (std::size_t i = 0; i < m; ++i)
    raw.push_back({static_cast<NodeId>(rng.below(n)), static_cast<NodeId>(rng.below(n))});
  return DirectedGraph::ingest(n, raw);
}

/// Line graph of a random graph with exactly `edges` edges and random endpoint features.
inline LineGraph random_line_graph(std::size_t nodes, std::size_t edges, Eigen::Index width, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<Edge> e;
  while (e.size() < edges) {
    const Edge c{static_cast<NodeId>(rng.below(nodes)), static_cast<NodeId>(rng.below(nodes))};
    if (c.src != c.dst && std::find(e.begin(), e.end(), c) == e.end()) e.push_back(c);
  }
  LineGraph lg = line_graph_of(DirectedGraph(nodes, e));
  lg.endpoint_features = RowMatrix(static_cast<Eigen::Index>(nodes), width);
  for (Eigen::Index i = 0; i < lg.endpoint_features.size(); ++i) lg.endpoint_features.data()[i] = rng.uniform(-1, 1);
  lg.target_index = static_cast<int>(rng.below(edges));
  return lg;
}

struct GradCheck {
  double max_rel_error = 0.0;
  std::string worst_tensor;
  std::size_t entries = 0;
};

/**
 * Central differences (step 1e-5) on every parameter entry. The relative
 * error is |a - n| / max(|a|, |n|, floor); the floor keeps entries whose
 * true gradient is zero from dividing by rounding noise.
 */
inline GradCheck finite_difference_check(ModelParams params, const std::vector<std::pair<const LineGraph*, int>>& batch,
                                         double step = 1e-5, double floor = 1e-6) {
  const auto analytic = loss_and_grads(params, batch).grads;
  const auto names = params.tensor_names();
  auto p = params.tensors();
  const auto a = analytic.tensors();
  GradCheck out;
  for (std::size_t t = 0; t < p.size(); ++t) {
    for (std::size_t i = 0; i < p[t].size(); ++i) {
      const double keep = p[t][i];
      p[t][i] = keep + step;
      const double up = loss_and_grads(params, batch).loss;
      p[t][i] = keep - step;
      const double down = loss_and_grads(params, batch).loss;
      p[t][i] = keep;
      const double numeric = (up - down) / (2 * step);
      const double rel = std::abs(a[t][i] - numeric) / std::max({std::abs(a[t][i]), std::abs(numeric), floor});
      ++out.entries;
      if (rel > out.max_rel_error) {
        out.max_rel_error = rel;
        out.worst_tensor = names[t];
      }
    }
  }
  return out;
}

}  // namespace ffd::testing

#include "ffd/metrics.hpp"

namespace ffd::testing {

/// Mann-Whitney statistic by comparing every positive with every negative.
inline double brute_force_auc(const std::vector<ScoredPair>& pairs) {
  double wins = 0.0, total = 0.0;
  for (const auto& p : pairs) {
    if (p.label != 1) continue;
    for (const auto& n : pairs) {
      if (n.label != 0) continue;
      total += 1.0;
      wins += p.score > n.score ? 1.0 : p.score == n.score ? 0.5 : 0.0;
    }
  }
  return wins / total;
}

/// Random scored set with both classes and deliberate ties.
inline std::vector<ScoredPair> random_scored(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<ScoredPair> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    out[i].label = static_cast<int>(rng.below(2));
    out[i].score = static_cast<double>(rng.below(1 + n / 3)) / 7.0;
  }
  out[0].label = 1;
  out[1].label = 0;
  return out;
}

}  // namespace ffd::testing
