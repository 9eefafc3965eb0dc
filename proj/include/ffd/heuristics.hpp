/**
 * @file heuristics.hpp
 * @brief Classical neighborhood and path similarity indices.
 *
 * All indices read the symmetrized graph: Gamma(v) is the union of
 * successors and predecessors and k_v = |Gamma(v)|.
 */
#pragma once

#include <array>
#include <cmath>
#include <map>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "ffd/graph.hpp"
#include "ffd/split.hpp"

namespace ffd {

enum class HeuristicIndex { CN, Salton, Jaccard, Sorensen, HPI, HDI, LHN1, PA, AA, RA, LP, Katz };

inline constexpr std::array<HeuristicIndex, 12> kAllHeuristics = {
    HeuristicIndex::CN,   HeuristicIndex::Salton, HeuristicIndex::Jaccard, HeuristicIndex::Sorensen,
    HeuristicIndex::HPI,  HeuristicIndex::HDI,    HeuristicIndex::LHN1,    HeuristicIndex::PA,
    HeuristicIndex::AA,   HeuristicIndex::RA,     HeuristicIndex::LP,      HeuristicIndex::Katz};

inline std::string_view name_of(HeuristicIndex h) {
  switch (h) {
    case HeuristicIndex::CN: return "CN";
    case HeuristicIndex::Salton: return "Salton";
    case HeuristicIndex::Jaccard: return "Jaccard";
    case HeuristicIndex::Sorensen: return "Sorensen";
    case HeuristicIndex::HPI: return "HPI";
    case HeuristicIndex::HDI: return "HDI";
    case HeuristicIndex::LHN1: return "LHN1";
    case HeuristicIndex::PA: return "PA";
    case HeuristicIndex::AA: return "AA";
    case HeuristicIndex::RA: return "RA";
    case HeuristicIndex::LP: return "LP";
    case HeuristicIndex::Katz: return "Katz";
  }
  return "?";
}

inline HeuristicIndex heuristic_from_name(std::string_view s) {
  for (auto h : kAllHeuristics)
    if (name_of(h) == s) return h;
  throw std::invalid_argument("unknown heuristic: " + std::string(s));
}

struct HeuristicParams {
  double katz_beta = 0.05;
  int katz_max_length = 5;
  double lp_beta = 0.01;
};

/// Number of walks of each length 1..max_len from x, as dense vectors (index 0 = length 1).
inline std::vector<std::vector<double>> walk_counts(const DirectedGraph& g, NodeId x, int max_len) {
  const std::size_t n = g.num_nodes();
  std::vector<std::vector<double>> out;
  std::vector<double> cur(n, 0.0);
  cur[x] = 1.0;
  for (int l = 1; l <= max_len; ++l) {
    std::vector<double> next(n, 0.0);
    for (std::size_t u = 0; u < n; ++u) {
      if (cur[u] == 0.0) continue;
      for (NodeId v : g.neighbors(static_cast<NodeId>(u))) next[v] += cur[u];
    }
    out.push_back(next);
    cur = std::move(next);
  }
  return out;
}

namespace detail {

struct NeighborStats {
  double cn = 0.0, aa = 0.0, ra = 0.0;
  double kx = 0.0, ky = 0.0, union_size = 0.0;
};

inline NeighborStats neighbor_stats(const DirectedGraph& g, NodeId x, NodeId y) {
  NeighborStats s;
  const auto gx = g.neighbors(x);
  const auto gy = g.neighbors(y);
  s.kx = static_cast<double>(gx.size());
  s.ky = static_cast<double>(gy.size());
  std::size_t i = 0, j = 0;
  while (i < gx.size() && j < gy.size()) {
    if (gx[i] < gy[j]) {
      ++i;
    } else if (gy[j] < gx[i]) {
      ++j;
    } else {
      const auto kz = static_cast<double>(g.neighbors(gx[i]).size());
      s.cn += 1.0;
      s.ra += 1.0 / kz;
      if (kz > 1.0) s.aa += 1.0 / std::log(kz);
      ++i;
      ++j;
    }
  }
  s.union_size = s.kx + s.ky - s.cn;
  return s;
}

inline double safe_div(double a, double b) { return b == 0.0 ? 0.0 : a / b; }

inline double path_index(HeuristicIndex h, const std::vector<std::vector<double>>& walks, NodeId y,
                         const HeuristicParams& prm) {
  if (h == HeuristicIndex::LP) return walks[1][y] + prm.lp_beta * walks[2][y];
  double score = 0.0, beta_l = 1.0;
  for (int l = 1; l <= prm.katz_max_length; ++l) {
    beta_l *= prm.katz_beta;
    score += beta_l * walks[l - 1][y];
  }
  return score;
}

inline int walk_depth(HeuristicIndex h, const HeuristicParams& prm) {
  return h == HeuristicIndex::LP ? 3 : prm.katz_max_length;
}

}  // namespace detail

/**
 * @brief Score one candidate pair.
 *
 * Degree-normalized indices return 0 when their denominator is 0; AA skips
 * common neighbors of degree <= 1. LP = (A^2 + beta A^3)_xy and Katz is the
 * beta-weighted walk count truncated at `katz_max_length`.
 */
inline double heuristic_score(const DirectedGraph& g, HeuristicIndex h, NodeId x, NodeId y,
                              const HeuristicParams& prm = {}) {
  const auto n = static_cast<NodeId>(g.num_nodes());
  if (x < 0 || y < 0 || x >= n || y >= n) throw std::out_of_range("heuristic_score: node out of range");
  using detail::safe_div;
  if (h == HeuristicIndex::LP || h == HeuristicIndex::Katz) {
    return detail::path_index(h, walk_counts(g, x, detail::walk_depth(h, prm)), y, prm);
  }
  const auto s = detail::neighbor_stats(g, x, y);
  switch (h) {
    case HeuristicIndex::CN: return s.cn;
    case HeuristicIndex::Salton: return safe_div(s.cn, std::sqrt(s.kx * s.ky));
    case HeuristicIndex::Jaccard: return safe_div(s.cn, s.union_size);
    case HeuristicIndex::Sorensen: return safe_div(2.0 * s.cn, s.kx + s.ky);
    case HeuristicIndex::HPI: return safe_div(s.cn, std::min(s.kx, s.ky));
    case HeuristicIndex::HDI: return safe_div(s.cn, std::max(s.kx, s.ky));
    case HeuristicIndex::LHN1: return safe_div(s.cn, s.kx * s.ky);
    case HeuristicIndex::PA: return s.kx * s.ky;
    case HeuristicIndex::AA: return s.aa;
    case HeuristicIndex::RA: return s.ra;
    default: break;
  }
  throw std::logic_error("heuristic_score: unhandled index");
}

/// Scores many pairs, sharing walk computations between pairs with the same source.
inline std::vector<double> heuristic_scores(const DirectedGraph& g, HeuristicIndex h,
                                            const std::vector<LabeledPair>& pairs, const HeuristicParams& prm = {}) {
  std::vector<double> out(pairs.size());
  if (h != HeuristicIndex::LP && h != HeuristicIndex::Katz) {
    for (std::size_t i = 0; i < pairs.size(); ++i) out[i] = heuristic_score(g, h, pairs[i].src, pairs[i].dst, prm);
    return out;
  }
  std::map<NodeId, std::vector<std::size_t>> by_src;
  for (std::size_t i = 0; i < pairs.size(); ++i) by_src[pairs[i].src].push_back(i);
  for (const auto& [x, idx] : by_src) {
    const auto walks = walk_counts(g, x, detail::walk_depth(h, prm));
    for (std::size_t i : idx) out[i] = detail::path_index(h, walks, pairs[i].dst, prm);
  }
  return out;
}

}  // namespace ffd
