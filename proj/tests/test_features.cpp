#include <algorithm>
#include <map>
#include <numeric>
#include <sstream>

#include <Eigen/Dense>
#include <gtest/gtest.h>

#include "ffd/community.hpp"
#include "ffd/embedding.hpp"
#include "ffd/features.hpp"
#include "ffd/rng.hpp"
#include "ffd/sbm.hpp"

using namespace ffd;

namespace {

DirectedGraph random_graph(std::size_t n, std::size_t m, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<Edge> raw;
  for (std::size_t i = 0; i < m; ++i)
    raw.push_back({static_cast<NodeId>(rng.below(n)), static_cast<NodeId>(rng.below(n))});
  return DirectedGraph::ingest(n, raw);
}

DirectedGraph directed_clique_pair() {
  std::vector<Edge> e;
  for (int base : {0, 4})
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j)
        if (i != j) e.push_back({base + i, base + j});
  return DirectedGraph(8, e);
}

// Modularity from the textbook double sum over node pairs of the symmetrized graph.
double modularity_oracle(const DirectedGraph& g, const std::vector<int>& c) {
  const auto n = static_cast<NodeId>(g.num_nodes());
  std::vector<std::vector<int>> A(n, std::vector<int>(n, 0));
  for (const auto& e : g.edges()) A[e.src][e.dst] = A[e.dst][e.src] = 1;
  std::vector<double> k(n, 0);
  double two_m = 0;
  for (NodeId i = 0; i < n; ++i)
    for (NodeId j = 0; j < n; ++j) {
      k[i] += A[i][j];
      two_m += A[i][j];
    }
  double q = 0;
  for (NodeId i = 0; i < n; ++i)
    for (NodeId j = 0; j < n; ++j)
      if (c[i] == c[j]) q += A[i][j] - k[i] * k[j] / two_m;
  return q / two_m;
}

// Every set partition as a restricted growth string.
void for_each_partition(int n, const std::function<void(const std::vector<int>&)>& f) {
  std::vector<int> a(n, 0);
  std::function<void(int, int)> rec = [&](int i, int maxc) {
    if (i == n) {
      f(a);
      return;
    }
    for (int c = 0; c <= maxc + 1; ++c) {
      a[i] = c;
      rec(i + 1, std::max(maxc, c));
    }
  };
  a[0] = 0;
  rec(1, 0);
}

// Same partition regardless of label names.
bool same_partition(const std::vector<int>& a, const std::vector<int>& b) {
  std::map<int, int> ab, ba;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (ab.emplace(a[i], b[i]).first->second != b[i]) return false;
    if (ba.emplace(b[i], a[i]).first->second != a[i]) return false;
  }
  return true;
}

}  // namespace

TEST(Drnl, HashExamples) {
  EXPECT_EQ(drnl_hash(1, 1), 2);
  EXPECT_EQ(drnl_hash(1, 2), 3);
  EXPECT_EQ(drnl_hash(2, 1), 3);
}

TEST(Drnl, HashInjectiveOnUnorderedDistancePairs) {
  std::map<int, std::pair<int, int>> seen;
  for (int dx = 1; dx <= 20; ++dx)
    for (int dy = dx; dy <= 20; ++dy) {
      const int h = drnl_hash(dx, dy);
      EXPECT_GE(h, 2);
      const auto [it, fresh] = seen.emplace(h, std::pair{dx, dy});
      EXPECT_TRUE(fresh) << "(" << dx << "," << dy << ") collides with (" << it->second.first << ","
                         << it->second.second << ")";
      EXPECT_EQ(drnl_hash(dy, dx), h);
    }
  // Labels for d_x + d_y <= 10 form one contiguous block.
  std::vector<int> small;
  for (int dx = 1; dx <= 9; ++dx)
    for (int dy = dx; dx + dy <= 10; ++dy) small.push_back(drnl_hash(dx, dy));
  std::sort(small.begin(), small.end());
  for (std::size_t i = 0; i < small.size(); ++i) EXPECT_EQ(small[i], static_cast<int>(i) + 2);
}

TEST(Drnl, LabelsOnSmallGraph) {
  // x=0, y=1, common neighbor 2, node 3 hangs off 2, node 4 isolated.
  const DirectedGraph g(5, {{0, 1}, {0, 2}, {2, 1}, {3, 2}});
  const auto l = drnl_label(g, 0, 1);
  EXPECT_EQ(l[0], 1);
  EXPECT_EQ(l[1], 1);
  EXPECT_EQ(l[2], 2);
  EXPECT_EQ(l[3], drnl_hash(2, 2));
  EXPECT_EQ(l[4], 0);
}

TEST(Drnl, TargetLinkIsMasked) {
  // Path 0-1-2 plus the target link 2->0: without masking node 1 would be at (1,1) either way,
  // but node 3 attached to 0 only is reachable from 2 only through the masked link or via 1.
  const DirectedGraph g(4, {{0, 1}, {1, 2}, {2, 0}, {3, 0}});
  const auto l = drnl_label(g, 2, 0);
  EXPECT_EQ(l[3], drnl_hash(3, 1));  // d(3,2) = 3 once 2-0 is removed
}

TEST(Drnl, Errors) {
  const DirectedGraph g(3, {{0, 1}});
  EXPECT_THROW(drnl_label(g, 1, 1), std::invalid_argument);
  EXPECT_THROW(drnl_label(g, 0, 3), std::out_of_range);
}

TEST(OneHot, Examples) {
  const auto m = onehot_labels({1, 1, 2}, 4);
  ASSERT_EQ(m.rows(), 3);
  ASSERT_EQ(m.cols(), 5);
  EXPECT_EQ(m.data(0, 1), 1.0);
  EXPECT_EQ(m.data(1, 1), 1.0);
  EXPECT_EQ(m.data(2, 2), 1.0);
  EXPECT_EQ(m.data.sum(), 3.0);
  EXPECT_EQ(onehot_labels({9}, 4).data(0, 4), 1.0);
  const auto d = onehot_labels({0, 1, 2, 3, 4}, 4);
  for (Eigen::Index i = 0; i < d.rows(); ++i) EXPECT_EQ(d.data.row(i).sum(), 1.0);
  EXPECT_THROW(onehot_labels({1}, 0), std::invalid_argument);
}

TEST(Fuse, WidthsOffsetsAndOrder) {
  Rng rng(1);
  FeatureMatrix p(4, 5, FeatureKind::path_onehot), c(4, 3, FeatureKind::community_onehot), e(4, 8, FeatureKind::embedding);
  for (auto* m : {&p, &c, &e})
    for (Eigen::Index i = 0; i < m->rows(); ++i)
      for (Eigen::Index j = 0; j < m->cols(); ++j) m->data(i, j) = rng.uniform();
  const auto h = fuse(p, c, e);
  EXPECT_EQ(h.cols(), 16);
  EXPECT_EQ(h.kind, FeatureKind::hybrid);
  EXPECT_EQ(RowMatrix(h.data.leftCols(5)), p.data);
  EXPECT_EQ(RowMatrix(h.data.middleCols(5, 3)), c.data);
  EXPECT_EQ(RowMatrix(h.data.rightCols(8)), e.data);
  EXPECT_NE(fuse(c, p, e).data, h.data);

  const FeatureMatrix zeros(4, 3, FeatureKind::community_onehot);
  EXPECT_TRUE(fuse(p, zeros, e).data.middleCols(5, 3).isZero());
  const FeatureMatrix none(4, 0, FeatureKind::community_onehot);
  EXPECT_EQ(fuse(p, none, e).cols(), 13);
  EXPECT_THROW(fuse(p, FeatureMatrix(3, 2, FeatureKind::embedding), e), std::invalid_argument);
}

TEST(FeatureMatrixIo, RoundTrip) {
  const auto oh = onehot_labels({0, 3, 1}, 3);
  std::stringstream a;
  write_feature_matrix(a, oh);
  EXPECT_EQ(a.str(), "3 4 path_onehot\n1 0 0 0\n0 0 0 1\n0 1 0 0\n");
  const auto back = read_feature_matrix(a);
  EXPECT_EQ(back.data, oh.data);
  EXPECT_EQ(back.kind, FeatureKind::path_onehot);

  FeatureMatrix e(2, 2, FeatureKind::embedding);
  e.data << 0.1, -1.0 / 3.0, 2.5e-17, 7.0;
  std::stringstream b;
  write_feature_matrix(b, e);
  EXPECT_EQ(read_feature_matrix(b).data, e.data);
}

TEST(Communities, TwoCliquesMatchExhaustiveOptimum) {
  const auto g = directed_clique_pair();
  double best = -1;
  std::vector<int> best_part;
  for_each_partition(8, [&](const std::vector<int>& part) {
    const double q = modularity_oracle(g, part);
    if (q > best + 1e-12) {
      best = q;
      best_part = part;
    }
  });
  EXPECT_NEAR(best, 0.5, 1e-12);
  const auto a = detect_communities(g);
  EXPECT_EQ(a.num_communities, 2);
  EXPECT_NEAR(a.modularity, best, 1e-12);
  EXPECT_TRUE(same_partition(a.node_to_community, best_part));
  EXPECT_EQ(a.node_to_community, (std::vector<int>{0, 0, 0, 0, 1, 1, 1, 1}));
}

TEST(Communities, ReportedModularityMatchesOracle) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto g = random_graph(40, 90, seed);
    const auto a = detect_communities(g);
    EXPECT_NEAR(a.modularity, modularity_oracle(g, a.node_to_community), 1e-12);
    EXPECT_NEAR(modularity(g, a.node_to_community), a.modularity, 1e-12);
    EXPECT_GE(a.modularity, -0.5);
    EXPECT_LE(a.modularity, 1.0);
    std::vector<int> ids = a.node_to_community;
    std::sort(ids.begin(), ids.end());
    ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
    EXPECT_EQ(static_cast<int>(ids.size()), a.num_communities);
    EXPECT_EQ(ids.back(), a.num_communities - 1);
  }
}

TEST(Communities, SmallGraphsReachTheExhaustiveOptimumOrClose) {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const auto g = random_graph(8, 12, seed + 40);
    double best = -1;
    for_each_partition(8, [&](const std::vector<int>& part) { best = std::max(best, modularity_oracle(g, part)); });
    const auto a = detect_communities(g);
    EXPECT_LE(a.modularity, best + 1e-12);
    EXPECT_GE(a.modularity, 0.8 * best);
  }
}

TEST(Communities, CompleteGraphIsOneCommunity) {
  std::vector<Edge> e;
  for (int i = 0; i < 6; ++i)
    for (int j = 0; j < 6; ++j)
      if (i != j) e.push_back({i, j});
  const auto a = detect_communities(DirectedGraph(6, e));
  EXPECT_EQ(a.num_communities, 1);
  EXPECT_NEAR(a.modularity, 0.0, 1e-12);
}

TEST(Communities, EdgelessGraphGivesSingletons) {
  const auto a = detect_communities(DirectedGraph(4, {}));
  EXPECT_EQ(a.num_communities, 4);
  EXPECT_EQ(a.modularity, 0.0);
  EXPECT_THROW(detect_communities(DirectedGraph(0, {})), std::invalid_argument);
}

TEST(Communities, RecoversPlantedSbmPartition) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto s = generate_sbm({2, 50, 0.5, 0.01}, seed);
    const auto a = detect_communities(s.graph);
    // Best agreement over all maps from detected to planted labels (majority vote per detected id).
    std::map<int, std::array<int, 2>> votes;
    for (std::size_t v = 0; v < 100; ++v) ++votes[a.node_to_community[v]][s.communities[v]];
    int agree = 0;
    for (const auto& [c, vs] : votes) agree += std::max(vs[0], vs[1]);
    // Majority vote with at most two detected groups is exactly the best permutation.
    EXPECT_EQ(a.num_communities, 2) << "seed " << seed;
    EXPECT_GE(agree, 95) << "seed " << seed;
  }
}

TEST(Communities, MergeHistoryRisesToThePeak) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto s = generate_sbm({3, 30, 0.3, 0.02}, seed);
    const auto a = detect_communities(s.graph);
    const auto& h = a.merge_history;
    ASSERT_FALSE(h.empty());
    const auto peak = std::max_element(h.begin(), h.end()) - h.begin();
    EXPECT_NEAR(h[peak], a.modularity, 1e-12);
    for (std::ptrdiff_t i = 1; i <= peak; ++i) EXPECT_GE(h[i], h[i - 1]) << "seed " << seed << " step " << i;
  }
}

TEST(Communities, OneHotAndJson) {
  CommunityAssignment a;
  a.node_to_community = {0, 1, 0};
  a.num_communities = 2;
  a.modularity = 0.25;
  const auto m = community_onehot(a);
  RowMatrix expect(3, 2);
  expect << 1, 0, 0, 1, 1, 0;
  EXPECT_EQ(m.data, expect);
  const auto back = community_from_json(nlohmann::json::parse(to_json(a).dump()));
  EXPECT_EQ(back.node_to_community, a.node_to_community);
  EXPECT_EQ(back.num_communities, 2);
  EXPECT_EQ(back.modularity, 0.25);

  CommunityAssignment one;
  one.node_to_community = {0, 0, 0, 0};
  one.num_communities = 1;
  EXPECT_EQ(community_onehot(one).data, RowMatrix::Ones(4, 1));
}

TEST(Embedding, TwoCycle) {
  const auto m = embed_nodes(DirectedGraph(2, {{0, 1}, {1, 0}}), 1);
  EXPECT_NEAR(std::abs(m.data(0, 0)), 1.0, 1e-9);
  EXPECT_NEAR(std::abs(m.data(1, 0)), 1.0, 1e-9);
}

TEST(Embedding, IsolatedNodeRowIsZero) {
  const auto m = embed_nodes(DirectedGraph(5, {{0, 1}, {1, 2}, {2, 0}, {2, 3}}), 3);
  EXPECT_TRUE(m.data.row(4).isZero());
  for (Eigen::Index i = 0; i < 4; ++i) EXPECT_NEAR(m.data.row(i).norm(), 1.0, 1e-9);
}

TEST(Embedding, RingSingularStructureMatchesDenseSolver) {
  const DirectedGraph ring(4, {{0, 1}, {1, 2}, {2, 3}, {3, 0}});
  const Eigen::MatrixXd M = Eigen::MatrixXd(normalized_adjacency(ring));
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(M * M.transpose());
  const auto trip = top_singular_triplets(normalized_adjacency(ring), 2);
  const Eigen::VectorXd ref = es.eigenvalues().reverse().cwiseSqrt();
  EXPECT_NEAR(trip.sigma(0), ref(0), 1e-9);
  EXPECT_NEAR(trip.sigma(1), ref(1), 1e-9);
  for (Eigen::Index j = 0; j < 2; ++j) {
    EXPECT_NEAR((M * trip.V.col(j) - trip.sigma(j) * trip.U.col(j)).norm(), 0.0, 1e-9);
    EXPECT_NEAR((M.transpose() * trip.U.col(j) - trip.sigma(j) * trip.V.col(j)).norm(), 0.0, 1e-9);
  }
  const auto e = embed_nodes(ring, 2);
  // All singular values are 1, so every node's row has unit norm and the
  // Gram matrix is symmetric with unit diagonal.
  const RowMatrix gram = e.data * e.data.transpose();
  for (int i = 0; i < 4; ++i) EXPECT_NEAR(gram(i, i), 1.0, 1e-9);
}

TEST(Embedding, MatchesDenseSvdOnRandomGraphs) {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const auto g = random_graph(30, 120, seed);
    const Eigen::MatrixXd M = Eigen::MatrixXd(normalized_adjacency(g));
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(M, Eigen::ComputeFullU | Eigen::ComputeFullV);
    const auto trip = top_singular_triplets(normalized_adjacency(g), 4);
    for (int j = 0; j < 4; ++j) {
      EXPECT_NEAR(trip.sigma(j), svd.singularValues()(j), 1e-5) << "seed " << seed;
      const double overlap = std::abs(svd.matrixU().col(j).dot(trip.U.col(j)));
      // Only check directions for well-separated singular values.
      const double gap = std::min(j > 0 ? svd.singularValues()(j - 1) - svd.singularValues()(j) : 1.0,
                                  svd.singularValues()(j) - svd.singularValues()(j + 1));
      if (gap > 1e-2) EXPECT_NEAR(overlap, 1.0, 1e-4) << "seed " << seed << " col " << j;
    }
  }
}

TEST(Embedding, DeterministicAndSeedIndependent) {
  const auto g = random_graph(60, 200, 3);
  const auto a = embed_nodes(g, 8, 1);
  const auto b = embed_nodes(g, 8, 1);
  const auto c = embed_nodes(g, 8, 999);
  EXPECT_EQ(a.data, b.data);
  EXPECT_EQ(a.data, c.data);
  EXPECT_TRUE(a.data.allFinite());
  EXPECT_EQ(a.kind, FeatureKind::embedding);
}

TEST(Embedding, DimensionChecks) {
  const DirectedGraph g(3, {{0, 1}});
  EXPECT_THROW(embed_nodes(g, 4), std::invalid_argument);
  EXPECT_THROW(embed_nodes(g, 0), std::invalid_argument);
  EXPECT_TRUE(embed_nodes(DirectedGraph(3, {}), 2).data.isZero());
}
