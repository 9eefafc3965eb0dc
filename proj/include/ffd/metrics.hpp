/**
 * @file metrics.hpp
 * @brief AUC and average precision for scored link candidates.
 */
#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "ffd/graph.hpp"
#include "ffd/split.hpp"

namespace ffd {

struct ScoredPair {
  NodeId src = 0;
  NodeId dst = 0;
  double score = 0.0;
  int label = 0;
};

/**
 * @brief Area under the ROC curve as the Mann-Whitney statistic.
 *
 * Ties between a positive and a negative count one half. Runs in
 * O(n log n) via average ranks.
 */
inline double auc(const std::vector<ScoredPair>& pairs) {
  std::size_t n_pos = 0;
  for (const auto& p : pairs) {
    if (!std::isfinite(p.score)) throw std::invalid_argument("auc: non-finite score");
    n_pos += p.label == 1;
  }
  const std::size_t n_neg = pairs.size() - n_pos;
  if (n_pos == 0 || n_neg == 0) throw std::invalid_argument("auc: need both positive and negative pairs");

  std::vector<std::size_t> order(pairs.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return pairs[a].score < pairs[b].score; });

  // Sum of 2 * rank over positives, ranks 1-based and averaged over ties;
  // doubling keeps the tie midpoints integral.
  std::uint64_t twice_rank_sum = 0;
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j < order.size() && pairs[order[j]].score == pairs[order[i]].score) ++j;
    const std::uint64_t twice_avg = static_cast<std::uint64_t>(i + 1 + j);  // 2 * mean of ranks i+1..j
    for (std::size_t k = i; k < j; ++k)
      if (pairs[order[k]].label == 1) twice_rank_sum += twice_avg;
    i = j;
  }
  const double np = static_cast<double>(n_pos), nn = static_cast<double>(n_neg);
  const double u = (static_cast<double>(twice_rank_sum) - np * (np + 1.0)) / 2.0;
  return u / (np * nn);
}

/**
 * @brief Mean of precision@rank over the positives.
 *
 * Sorted by descending score; equal scores keep their input order.
 */
inline double average_precision(const std::vector<ScoredPair>& pairs) {
  std::vector<std::size_t> order(pairs.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return pairs[a].score > pairs[b].score; });
  double sum = 0.0;
  std::size_t hits = 0;
  for (std::size_t r = 0; r < order.size(); ++r) {
    if (pairs[order[r]].label == 1) {
      ++hits;
      sum += static_cast<double>(hits) / static_cast<double>(r + 1);
    }
  }
  if (hits == 0) throw std::invalid_argument("average_precision: no positive pairs");
  return sum / static_cast<double>(hits);
}

struct Metrics {
  double auc = 0.0;
  double ap = 0.0;
};

using PairScorer = std::function<double(NodeId, NodeId)>;

inline std::vector<ScoredPair> score_pairs(const PairScorer& scorer, const std::vector<LabeledPair>& test) {
  std::vector<ScoredPair> out;
  out.reserve(test.size());
  for (const auto& p : test) out.push_back({p.src, p.dst, scorer(p.src, p.dst), p.label});
  return out;
}

inline Metrics evaluate_model(const PairScorer& scorer, const std::vector<LabeledPair>& test) {
  if (test.empty()) throw std::invalid_argument("evaluate_model: empty test set");
  const auto scored = score_pairs(scorer, test);
  return {auc(scored), average_precision(scored)};
}

}  // namespace ffd
