/**
 * @file line_graph.hpp
 * @brief Enclosing subgraph extraction and the directed node-link transform.
 *
 * Every directed edge (i, j) of a subgraph becomes a line node; line node
 * (i, j) links to (j, k) whenever both edges exist, including k == i. The
 * line node of (i, j) carries the features [O_H[i] | O_H[j]].
 */
#pragma once

#include <algorithm>
#include <cstdint>
#include <sstream>
#include <stdexcept>
#include <unordered_map>
#include <utility>
#include <vector>

#include <json.hpp>

#include "ffd/features.hpp"
#include "ffd/graph.hpp"
#include "ffd/rng.hpp"

namespace ffd {

struct EnclosingSubgraph {
  /// Original ids; index 0 is x and index 1 is y.
  std::vector<NodeId> nodes;
  /// Local graph over [0, nodes.size()), target edge included.
  DirectedGraph graph;
  NodeId target_src = 0;
  NodeId target_dst = 1;
  int hops = 1;
  bool target_inserted = false;
};

/**
 * @brief Collect nodes within `h` symmetrized hops of x or y.
 *
 * When a BFS layer would push the node count past `max_nodes`, a uniform
 * sample of that layer (seeded by `seed` and the pair) fills the remaining
 * slots and expansion stops. The edge (x, y) is added when the observed
 * graph lacks it.
 */
inline EnclosingSubgraph extract_subgraph(const DirectedGraph& observed, NodeId x, NodeId y, int h,
                                          std::size_t max_nodes, std::uint64_t seed = 0) {
  const auto n = static_cast<NodeId>(observed.num_nodes());
  if (x < 0 || y < 0 || x >= n || y >= n) throw std::out_of_range("extract_subgraph: target node out of range");
  if (x == y) throw std::invalid_argument("extract_subgraph: x == y");
  if (h < 1) throw std::invalid_argument("extract_subgraph: h must be >= 1");
  if (max_nodes < 2) throw std::invalid_argument("extract_subgraph: max_nodes must be >= 2");

  EnclosingSubgraph sub;
  sub.hops = h;
  std::unordered_map<NodeId, NodeId> local;
  auto add = [&](NodeId v) {
    local.emplace(v, static_cast<NodeId>(sub.nodes.size()));
    sub.nodes.push_back(v);
  };
  add(x);
  add(y);

  std::vector<NodeId> layer{x, y};
  Rng rng(derive_seed(seed, static_cast<std::uint64_t>(x), static_cast<std::uint64_t>(y)));
  for (int depth = 1; depth <= h && !layer.empty(); ++depth) {
    std::vector<NodeId> frontier;
    for (NodeId u : layer)
      for (NodeId v : observed.neighbors(u))
        if (!local.count(v)) frontier.push_back(v);
    std::sort(frontier.begin(), frontier.end());
    frontier.erase(std::unique(frontier.begin(), frontier.end()), frontier.end());
    const std::size_t room = max_nodes - sub.nodes.size();
    const bool capped = frontier.size() > room;
    if (capped) {
      // Partial Fisher-Yates: the first `room` entries become a uniform sample.
      for (std::size_t i = 0; i < room; ++i) std::swap(frontier[i], frontier[i + rng.below(frontier.size() - i)]);
      frontier.resize(room);
      std::sort(frontier.begin(), frontier.end());
    }
    for (NodeId v : frontier) add(v);
    if (capped) break;
    layer = std::move(frontier);
  }

  std::vector<Edge> edges;
  for (std::size_t i = 0; i < sub.nodes.size(); ++i) {
    for (NodeId v : observed.successors(sub.nodes[i])) {
      auto it = local.find(v);
      if (it != local.end()) edges.push_back({static_cast<NodeId>(i), it->second});
    }
  }
  if (!observed.has_edge(x, y)) {
    edges.push_back({0, 1});
    sub.target_inserted = true;
  }
  sub.graph = DirectedGraph(sub.nodes.size(), std::move(edges));
  return sub;
}

struct LineGraph {
  /// Source-graph edges in local subgraph ids; index = line node id.
  std::vector<Edge> line_nodes;
  std::vector<std::pair<int, int>> line_edges;
  /// Rows are subgraph nodes; a line node (i, j) reads rows i and j.
  RowMatrix endpoint_features;
  int target_index = -1;

  std::size_t size() const { return line_nodes.size(); }
  Eigen::Index feature_width() const { return 2 * endpoint_features.cols(); }

  /// Materialized line-node features, one row [O_H[i] | O_H[j]] per line node.
  RowMatrix features() const {
    const Eigen::Index d = endpoint_features.cols();
    RowMatrix f(static_cast<Eigen::Index>(line_nodes.size()), 2 * d);
    for (std::size_t a = 0; a < line_nodes.size(); ++a) {
      f.row(static_cast<Eigen::Index>(a)).head(d) = endpoint_features.row(line_nodes[a].src);
      f.row(static_cast<Eigen::Index>(a)).tail(d) = endpoint_features.row(line_nodes[a].dst);
    }
    return f;
  }
};

/// Line graph of an arbitrary directed graph (no features, target_index = -1).
inline LineGraph line_graph_of(const DirectedGraph& g) {
  LineGraph lg;
  lg.line_nodes = g.edges();
  std::vector<std::vector<int>> outgoing(g.num_nodes());
  for (std::size_t a = 0; a < lg.line_nodes.size(); ++a) outgoing[lg.line_nodes[a].src].push_back(static_cast<int>(a));
  for (std::size_t a = 0; a < lg.line_nodes.size(); ++a)
    for (int b : outgoing[lg.line_nodes[a].dst]) lg.line_edges.emplace_back(static_cast<int>(a), b);
  return lg;
}

/**
 * @brief Transform an enclosing subgraph into its directed line graph.
 * @param o_h fused features, one row per subgraph node in local order.
 */
inline LineGraph to_line_graph(const EnclosingSubgraph& sub, const FeatureMatrix& o_h) {
  if (o_h.rows() < static_cast<Eigen::Index>(sub.nodes.size())) {
    throw std::invalid_argument("to_line_graph: feature matrix has " + std::to_string(o_h.rows()) + " rows for " +
                                std::to_string(sub.nodes.size()) + " subgraph nodes");
  }
  LineGraph lg = line_graph_of(sub.graph);
  lg.endpoint_features = o_h.data.topRows(static_cast<Eigen::Index>(sub.nodes.size()));
  const Edge target{sub.target_src, sub.target_dst};
  for (std::size_t a = 0; a < lg.line_nodes.size(); ++a) {
    if (lg.line_nodes[a] == target) {
      lg.target_index = static_cast<int>(a);
      break;
    }
  }
  if (lg.target_index < 0) throw std::logic_error("to_line_graph: target edge missing from subgraph");
  return lg;
}

/// Debug dump; line nodes are reported in original node ids.
inline nlohmann::json line_graph_debug_json(const LineGraph& lg, const EnclosingSubgraph& sub) {
  nlohmann::json nodes = nlohmann::json::array(), edges = nlohmann::json::array();
  for (const Edge& e : lg.line_nodes) nodes.push_back({sub.nodes[e.src], sub.nodes[e.dst]});
  for (auto [a, b] : lg.line_edges) edges.push_back({a, b});
  std::ostringstream feats;
  write_feature_matrix(feats, FeatureMatrix(lg.features(), FeatureKind::hybrid));
  return {{"line_nodes", nodes}, {"line_edges", edges}, {"target_index", lg.target_index}, {"features", feats.str()}};
}

}  // namespace ffd
