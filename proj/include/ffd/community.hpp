/**
 * @file community.hpp
 * @brief Greedy agglomerative modularity maximization (Clauset-Newman-Moore).
 *
 * Works on the symmetrized, unweighted view of a directed graph. All
 * modularity bookkeeping is done in integers scaled by (2m)^2, so merge
 * order and tie-breaking are exact.
 */
#pragma once

#include <cstdint>
#include <fstream>
#include <map>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "ffd/features.hpp"
#include "ffd/graph.hpp"

namespace ffd {

struct CommunityAssignment {
  std::vector<int> node_to_community;
  int num_communities = 0;
  double modularity = 0.0;
  /// Modularity after each merge, in merge order (diagnostic).
  std::vector<double> merge_history;
};

/// Newman modularity of a partition of the symmetrized graph.
inline double modularity(const DirectedGraph& g, const std::vector<int>& community) {
  std::size_t two_m = 0;
  for (std::size_t v = 0; v < g.num_nodes(); ++v) two_m += g.neighbors(static_cast<NodeId>(v)).size();
  if (two_m == 0) return 0.0;
  int k = 0;
  for (int c : community) k = std::max(k, c + 1);
  std::vector<double> internal(k, 0.0), degree(k, 0.0);
  for (std::size_t v = 0; v < g.num_nodes(); ++v) {
    const int cv = community[v];
    degree[cv] += static_cast<double>(g.neighbors(static_cast<NodeId>(v)).size());
    for (NodeId u : g.neighbors(static_cast<NodeId>(v)))
      if (community[u] == cv) internal[cv] += 1.0;
  }
  const double tm = static_cast<double>(two_m);
  double q = 0.0;
  for (int c = 0; c < k; ++c) q += internal[c] / tm - (degree[c] / tm) * (degree[c] / tm);
  return q;
}

/**
 * @brief Detect communities by greedy modularity merging.
 *
 * Repeatedly merges the adjacent pair with the largest modularity gain
 * (ties: lexicographically smallest id pair, the larger id folds into the
 * smaller) until no adjacent pairs remain, then returns the partition with
 * the highest modularity seen. Community ids are dense and ordered by the
 * smallest node they contain.
 */
inline CommunityAssignment detect_communities(const DirectedGraph& g) {
  const std::size_t n = g.num_nodes();
  if (n == 0) throw std::invalid_argument("detect_communities: empty graph");

  // Scaled quantities: E[i][j] = number of undirected edges between i and j,
  // K[i] = degree sum; gain(i,j) * (2m)^2 = 2 (2m E_ij - K_i K_j).
  std::vector<std::map<int, std::int64_t>> links(n);
  std::vector<std::int64_t> K(n, 0);
  std::int64_t two_m = 0;
  for (std::size_t v = 0; v < n; ++v) {
    const auto nb = g.neighbors(static_cast<NodeId>(v));
    K[v] = static_cast<std::int64_t>(nb.size());
    two_m += K[v];
    for (NodeId u : nb) links[v][u] = 1;
  }

  CommunityAssignment out;
  if (two_m == 0) {
    out.node_to_community.resize(n);
    std::iota(out.node_to_community.begin(), out.node_to_community.end(), 0);
    out.num_communities = static_cast<int>(n);
    out.modularity = 0.0;
    return out;
  }

  const double scale = static_cast<double>(two_m) * static_cast<double>(two_m);
  std::int64_t q_scaled = 0;
  for (std::size_t v = 0; v < n; ++v) q_scaled -= K[v] * K[v];

  auto gain = [&](int i, int j, std::int64_t e) { return 2 * (two_m * e - K[i] * K[j]); };

  // Cached best partner per community (largest gain, then smallest id).
  std::vector<int> best_j(n, -1);
  std::vector<std::int64_t> best_gain(n, 0);
  auto refresh = [&](int i) {
    best_j[i] = -1;
    for (const auto& [j, e] : links[i]) {
      const std::int64_t gv = gain(i, j, e);
      if (best_j[i] < 0 || gv > best_gain[i]) {  // map order gives smallest j on ties
        best_j[i] = j;
        best_gain[i] = gv;
      }
    }
  };
  for (std::size_t i = 0; i < n; ++i) refresh(static_cast<int>(i));

  std::vector<char> alive(n, 1);
  std::vector<std::pair<int, int>> merges;
  std::int64_t best_q = q_scaled;
  std::size_t best_step = 0;

  for (;;) {
    int bi = -1, bj = -1;
    std::int64_t bg = 0;
    for (std::size_t i = 0; i < n; ++i) {
      if (!alive[i] || best_j[i] < 0) continue;
      const int a = std::min(static_cast<int>(i), best_j[i]);
      const int b = std::max(static_cast<int>(i), best_j[i]);
      if (bi < 0 || best_gain[i] > bg || (best_gain[i] == bg && std::pair(a, b) < std::pair(bi, bj))) {
        bi = a;
        bj = b;
        bg = best_gain[i];
      }
    }
    if (bi < 0) break;

    // Fold bj into bi.
    q_scaled += bg;
    merges.emplace_back(bi, bj);
    out.merge_history.push_back(static_cast<double>(q_scaled) / scale);
    if (q_scaled > best_q) {
      best_q = q_scaled;
      best_step = merges.size();
    }
    for (const auto& [k, e] : links[bj]) {
      if (k == bi) continue;
      links[bi][k] += e;
      auto& lk = links[k];
      lk.erase(bj);
      lk[bi] += e;
    }
    links[bi].erase(bj);
    links[bj].clear();
    K[bi] += K[bj];
    K[bj] = 0;
    alive[bj] = 0;
    best_j[bj] = -1;
    refresh(bi);
    for (const auto& [k, e] : links[bi]) refresh(k);
  }

  // Replay the merges up to the modularity peak.
  std::vector<int> parent(n);
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](int v) {
    while (parent[v] != v) v = parent[v] = parent[parent[v]];
    return v;
  };
  for (std::size_t s = 0; s < best_step; ++s) parent[find(merges[s].second)] = find(merges[s].first);

  out.node_to_community.assign(n, -1);
  std::vector<int> dense(n, -1);
  int next = 0;
  for (std::size_t v = 0; v < n; ++v) {
    const int r = find(static_cast<int>(v));
    if (dense[r] < 0) dense[r] = next++;
    out.node_to_community[v] = dense[r];
  }
  out.num_communities = next;
  out.modularity = static_cast<double>(best_q) / scale;
  return out;
}

inline FeatureMatrix community_onehot(const CommunityAssignment& a) {
  FeatureMatrix m(static_cast<Eigen::Index>(a.node_to_community.size()), a.num_communities,
                  FeatureKind::community_onehot);
  for (std::size_t v = 0; v < a.node_to_community.size(); ++v)
    m.data(static_cast<Eigen::Index>(v), a.node_to_community[v]) = 1.0;
  return m;
}

inline nlohmann::json to_json(const CommunityAssignment& a) {
  return {{"node_to_community", a.node_to_community}, {"modularity", a.modularity}};
}

inline CommunityAssignment community_from_json(const nlohmann::json& j) {
  CommunityAssignment a;
  a.node_to_community = j.at("node_to_community").get<std::vector<int>>();
  a.modularity = j.at("modularity").get<double>();
  for (int c : a.node_to_community) a.num_communities = std::max(a.num_communities, c + 1);
  return a;
}

inline void save_communities(const std::string& path, const CommunityAssignment& a) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot write communities: " + path);
  os << to_json(a).dump() << '\n';
}

}  // namespace ffd
