#include <algorithm>
#include <set>

#include <gtest/gtest.h>

#include "ffd/line_graph.hpp"
#include "ffd/rng.hpp"

using namespace ffd;

namespace {

DirectedGraph random_graph(std::size_t n, std::size_t m, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<Edge> raw;
  for (std::size_t i = 0; i < m; ++i)
    raw.push_back({static_cast<NodeId>(rng.below(n)), static_cast<NodeId>(rng.below(n))});
  return DirectedGraph::ingest(n, raw);
}

// Every ordered pair of edges (a, b) with a.dst == b.src.
std::set<std::pair<Edge, Edge>> enumerate_line_edges(const DirectedGraph& g) {
  std::set<std::pair<Edge, Edge>> out;
  for (const auto& a : g.edges())
    for (const auto& b : g.edges())
      if (a.dst == b.src) out.insert({a, b});
  return out;
}

FeatureMatrix random_features(Eigen::Index n, Eigen::Index d, std::uint64_t seed) {
  Rng rng(seed);
  FeatureMatrix m(n, d, FeatureKind::hybrid);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < d; ++j) m.data(i, j) = rng.uniform(-1, 1);
  return m;
}

}  // namespace

TEST(LineGraph, ChainExample) {
  const auto lg = line_graph_of(DirectedGraph(4, {{1, 2}, {2, 3}}));
  EXPECT_EQ(lg.line_nodes, (std::vector<Edge>{{1, 2}, {2, 3}}));
  EXPECT_EQ(lg.line_edges, (std::vector<std::pair<int, int>>{{0, 1}}));
}

TEST(LineGraph, FanOutExample) {
  const auto g = DirectedGraph(5, {{1, 2}, {2, 3}, {2, 4}});
  const auto lg = line_graph_of(g);
  EXPECT_EQ(lg.line_nodes.size(), 3u);
  EXPECT_EQ(lg.line_edges.size(), g.in_degree(2) * g.out_degree(2));
  EXPECT_EQ(lg.line_edges.size(), 2u);
}

TEST(LineGraph, TwoCycleLinksBothWays) {
  const auto lg = line_graph_of(DirectedGraph(3, {{1, 2}, {2, 1}}));
  EXPECT_EQ(lg.line_nodes, (std::vector<Edge>{{1, 2}, {2, 1}}));
  std::set<std::pair<int, int>> e(lg.line_edges.begin(), lg.line_edges.end());
  EXPECT_EQ(e, (std::set<std::pair<int, int>>{{0, 1}, {1, 0}}));
}

TEST(LineGraph, CountIdentitiesAgainstEnumeration) {
  Rng pick(17);
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    const std::size_t n = 2 + pick.below(40);
    const auto g = random_graph(n, pick.below(200), seed);
    const auto lg = line_graph_of(g);
    ASSERT_EQ(lg.line_nodes.size(), g.num_edges());
    std::size_t expect = 0;
    for (NodeId v = 0; v < static_cast<NodeId>(n); ++v) expect += g.in_degree(v) * g.out_degree(v);
    ASSERT_EQ(lg.line_edges.size(), expect);
    std::set<std::pair<Edge, Edge>> got;
    for (auto [a, b] : lg.line_edges) got.insert({lg.line_nodes[a], lg.line_nodes[b]});
    EXPECT_EQ(got, enumerate_line_edges(g));
  }
}

TEST(LineGraph, FeatureRowsConcatenateEndpoints) {
  const auto g = random_graph(12, 40, 3);
  EnclosingSubgraph sub;
  sub.graph = g;
  sub.nodes.resize(12);
  std::iota(sub.nodes.begin(), sub.nodes.end(), 0);
  sub.target_src = g.edges()[0].src;
  sub.target_dst = g.edges()[0].dst;
  const auto o_h = random_features(12, 5, 4);
  const auto lg = to_line_graph(sub, o_h);
  const RowMatrix f = lg.features();
  EXPECT_EQ(f.cols(), 10);
  for (std::size_t a = 0; a < lg.size(); ++a) {
    const auto row = static_cast<Eigen::Index>(a);
    EXPECT_EQ(RowMatrix(f.row(row).head(5)), RowMatrix(o_h.data.row(lg.line_nodes[a].src)));
    EXPECT_EQ(RowMatrix(f.row(row).tail(5)), RowMatrix(o_h.data.row(lg.line_nodes[a].dst)));
  }
  EXPECT_EQ(lg.line_nodes[lg.target_index], (Edge{sub.target_src, sub.target_dst}));
}

TEST(LineGraph, FeatureLocality) {
  const auto g = random_graph(10, 30, 5);
  EnclosingSubgraph sub;
  sub.graph = g;
  sub.nodes.resize(10);
  std::iota(sub.nodes.begin(), sub.nodes.end(), 0);
  sub.target_src = g.edges()[0].src;
  sub.target_dst = g.edges()[0].dst;
  const auto base = random_features(10, 3, 6);
  const RowMatrix f0 = to_line_graph(sub, base).features();
  for (NodeId v = 0; v < 10; ++v) {
    auto changed = base;
    changed.data.row(v).array() += 1.0;
    const auto lg = to_line_graph(sub, changed);
    const RowMatrix f1 = lg.features();
    for (std::size_t a = 0; a < lg.size(); ++a) {
      const auto row = static_cast<Eigen::Index>(a);
      const bool left = lg.line_nodes[a].src == v, right = lg.line_nodes[a].dst == v;
      EXPECT_EQ(f0.row(row).head(3) != f1.row(row).head(3), left);
      EXPECT_EQ(f0.row(row).tail(3) != f1.row(row).tail(3), right);
    }
  }
}

TEST(LineGraph, MissingFeatureRowsThrow) {
  const auto sub = extract_subgraph(DirectedGraph(3, {{0, 1}, {1, 2}}), 0, 1, 1, 10);
  EXPECT_THROW(to_line_graph(sub, FeatureMatrix(2, 4, FeatureKind::hybrid)), std::invalid_argument);
}

TEST(Subgraph, PathGraphOneHop) {
  const auto sub = extract_subgraph(DirectedGraph(3, {{0, 1}, {1, 2}}), 0, 1, 1, 100);
  std::vector<NodeId> nodes = sub.nodes;
  std::sort(nodes.begin(), nodes.end());
  EXPECT_EQ(nodes, (std::vector<NodeId>{0, 1, 2}));
  EXPECT_EQ(sub.nodes[0], 0);
  EXPECT_EQ(sub.nodes[1], 1);
  EXPECT_FALSE(sub.target_inserted);
  EXPECT_EQ(sub.graph.num_edges(), 2u);
}

TEST(Subgraph, IsolatedPairGetsInsertedTarget) {
  const auto sub = extract_subgraph(DirectedGraph(4, {{2, 3}}), 0, 1, 2, 100);
  EXPECT_EQ(sub.nodes, (std::vector<NodeId>{0, 1}));
  EXPECT_TRUE(sub.target_inserted);
  EXPECT_EQ(sub.graph.edges(), (std::vector<Edge>{{0, 1}}));
  const auto lg = to_line_graph(sub, FeatureMatrix(2, 1, FeatureKind::hybrid));
  EXPECT_EQ(lg.target_index, 0);
  EXPECT_TRUE(lg.line_edges.empty());
}

TEST(Subgraph, StarIsCappedAndKeepsTargets) {
  std::vector<Edge> e;
  for (int leaf = 1; leaf <= 100; ++leaf) e.push_back({0, leaf});
  const DirectedGraph star(101, e);
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const auto sub = extract_subgraph(star, 0, 7, 1, 20, seed);
    EXPECT_EQ(sub.nodes.size(), 20u);
    EXPECT_EQ(sub.nodes[0], 0);
    EXPECT_EQ(sub.nodes[1], 7);
    std::set<NodeId> uniq(sub.nodes.begin(), sub.nodes.end());
    EXPECT_EQ(uniq.size(), 20u);
  }
  EXPECT_EQ(extract_subgraph(star, 0, 7, 1, 20, 3).nodes, extract_subgraph(star, 0, 7, 1, 20, 3).nodes);
  EXPECT_NE(extract_subgraph(star, 0, 7, 1, 20, 3).nodes, extract_subgraph(star, 0, 7, 1, 20, 4).nodes);
}

TEST(Subgraph, NodesWithinHopsAndInducedEdges) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto g = random_graph(50, 120, seed);
    const NodeId x = static_cast<NodeId>(seed % 50), y = static_cast<NodeId>((seed * 7 + 3) % 50);
    if (x == y) continue;
    for (int h : {1, 2}) {
      const auto sub = extract_subgraph(g, x, y, h, 1000);
      // Independent BFS distance from {x, y}.
      std::vector<int> dist(50, -1);
      std::vector<NodeId> q{x, y};
      dist[x] = dist[y] = 0;
      for (std::size_t i = 0; i < q.size(); ++i)
        for (NodeId w : g.neighbors(q[i]))
          if (dist[w] < 0) {
            dist[w] = dist[q[i]] + 1;
            q.push_back(w);
          }
      std::set<NodeId> expect;
      for (NodeId v = 0; v < 50; ++v)
        if (dist[v] >= 0 && dist[v] <= h) expect.insert(v);
      EXPECT_EQ(std::set<NodeId>(sub.nodes.begin(), sub.nodes.end()), expect);
      std::size_t induced = 0;
      for (const auto& e : g.edges()) induced += expect.count(e.src) && expect.count(e.dst);
      EXPECT_EQ(sub.graph.num_edges(), induced + (sub.target_inserted ? 1 : 0));
      EXPECT_EQ(sub.target_inserted, !g.has_edge(x, y));
      EXPECT_TRUE(sub.graph.has_edge(0, 1));
    }
  }
}

TEST(Subgraph, Errors) {
  const DirectedGraph g(3, {{0, 1}});
  EXPECT_THROW(extract_subgraph(g, 0, 0, 1, 10), std::invalid_argument);
  EXPECT_THROW(extract_subgraph(g, 0, 5, 1, 10), std::out_of_range);
  EXPECT_THROW(extract_subgraph(g, 0, 1, 0, 10), std::invalid_argument);
}

TEST(LineGraph, DebugJson) {
  const auto sub = extract_subgraph(DirectedGraph(3, {{0, 1}, {1, 2}}), 0, 1, 1, 10);
  const auto lg = to_line_graph(sub, FeatureMatrix(3, 2, FeatureKind::hybrid));
  const auto j = line_graph_debug_json(lg, sub);
  EXPECT_EQ(j.at("line_nodes").size(), 2u);
  EXPECT_EQ(j.at("line_edges").size(), 1u);
  EXPECT_EQ(j.at("features").get<std::string>().rfind("2 4 hybrid\n", 0), 0u);
}
