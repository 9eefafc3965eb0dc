/**
 * @file features.hpp
 * @brief Node feature blocks: path labels, community one-hots, embeddings and
 *        their concatenation.
 */
#pragma once

#include <algorithm>
#include <deque>
#include <fstream>
#include <limits>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "ffd/graph.hpp"

namespace ffd {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

enum class FeatureKind { path_onehot, community_onehot, embedding, hybrid };

inline const char* to_string(FeatureKind k) {
  switch (k) {
    case FeatureKind::path_onehot: return "path_onehot";
    case FeatureKind::community_onehot: return "community_onehot";
    case FeatureKind::embedding: return "embedding";
    case FeatureKind::hybrid: return "hybrid";
  }
  return "?";
}

inline FeatureKind feature_kind_from_string(const std::string& s) {
  if (s == "path_onehot") return FeatureKind::path_onehot;
  if (s == "community_onehot") return FeatureKind::community_onehot;
  if (s == "embedding") return FeatureKind::embedding;
  if (s == "hybrid") return FeatureKind::hybrid;
  throw std::invalid_argument("unknown feature kind: " + s);
}

struct FeatureMatrix {
  RowMatrix data;
  FeatureKind kind = FeatureKind::hybrid;

  FeatureMatrix() = default;
  FeatureMatrix(RowMatrix d, FeatureKind k) : data(std::move(d)), kind(k) {}
  FeatureMatrix(Eigen::Index rows, Eigen::Index cols, FeatureKind k) : data(RowMatrix::Zero(rows, cols)), kind(k) {}

  Eigen::Index rows() const { return data.rows(); }
  Eigen::Index cols() const { return data.cols(); }
};

inline constexpr int kUnreachable = 0;

/// The double-radius hash for a node at distances (dx, dy) from the targets.
inline int drnl_hash(int dx, int dy) {
  const int d = dx + dy;
  const int half = d / 2;
  return 1 + std::min(dx, dy) + half * (half + d % 2 - 1);
}

namespace detail {

/// BFS on the symmetrized graph ignoring the undirected pair {mask_a, mask_b}.
inline std::vector<int> masked_bfs(const DirectedGraph& g, NodeId source, NodeId mask_a, NodeId mask_b) {
  std::vector<int> dist(g.num_nodes(), -1);
  std::deque<NodeId> queue{source};
  dist[source] = 0;
  while (!queue.empty()) {
    const NodeId u = queue.front();
    queue.pop_front();
    for (NodeId v : g.neighbors(u)) {
      if ((u == mask_a && v == mask_b) || (u == mask_b && v == mask_a)) continue;
      if (dist[v] < 0) {
        dist[v] = dist[u] + 1;
        queue.push_back(v);
      }
    }
  }
  return dist;
}

}  // namespace detail

/**
 * @brief Double-radius node labels relative to the target pair (x, y).
 *
 * Distances come from BFS on the symmetrized graph with the x-y connection
 * removed. Targets get 1, nodes unreachable from either target get 0.
 */
inline std::vector<int> drnl_label(const DirectedGraph& sub, NodeId x, NodeId y) {
  if (x == y) throw std::invalid_argument("drnl_label: target nodes must differ");
  const auto n = static_cast<NodeId>(sub.num_nodes());
  if (x < 0 || y < 0 || x >= n || y >= n) throw std::out_of_range("drnl_label: target outside subgraph");
  const auto dx = detail::masked_bfs(sub, x, x, y);
  const auto dy = detail::masked_bfs(sub, y, x, y);
  std::vector<int> labels(sub.num_nodes(), kUnreachable);
  for (NodeId v = 0; v < n; ++v) {
    if (v == x || v == y) {
      labels[v] = 1;
    } else if (dx[v] >= 0 && dy[v] >= 0) {
      labels[v] = drnl_hash(dx[v], dy[v]);
    }
  }
  return labels;
}

/// One-hot path labels of width cap + 1; column 0 marks unreachable nodes.
inline FeatureMatrix onehot_labels(const std::vector<int>& labels, int cap) {
  if (cap < 1) throw std::invalid_argument("onehot_labels: cap must be >= 1");
  FeatureMatrix m(static_cast<Eigen::Index>(labels.size()), cap + 1, FeatureKind::path_onehot);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const int col = std::clamp(labels[i], 0, cap);
    m.data(static_cast<Eigen::Index>(i), col) = 1.0;
  }
  return m;
}

/**
 * @brief Concatenate feature blocks column-wise in argument order.
 *
 * Blocks with zero columns are allowed and contribute nothing.
 */
inline FeatureMatrix fuse(const std::vector<const FeatureMatrix*>& blocks) {
  if (blocks.empty()) throw std::invalid_argument("fuse: no blocks");
  const Eigen::Index rows = blocks.front()->rows();
  Eigen::Index cols = 0;
  for (const auto* b : blocks) {
    if (b->rows() != rows) throw std::invalid_argument("fuse: row-count mismatch");
    cols += b->cols();
  }
  FeatureMatrix out(rows, cols, FeatureKind::hybrid);
  Eigen::Index off = 0;
  for (const auto* b : blocks) {
    if (b->cols() > 0) out.data.middleCols(off, b->cols()) = b->data;
    off += b->cols();
  }
  return out;
}

inline FeatureMatrix fuse(const FeatureMatrix& o_p, const FeatureMatrix& o_c, const FeatureMatrix& o_e) {
  return fuse({&o_p, &o_c, &o_e});
}

/// Text format: header `N D kind`, then N rows of D space-separated reals.
inline void write_feature_matrix(std::ostream& os, const FeatureMatrix& m) {
  os << m.rows() << ' ' << m.cols() << ' ' << to_string(m.kind) << '\n';
  const bool onehot = m.kind == FeatureKind::path_onehot || m.kind == FeatureKind::community_onehot;
  std::ostringstream row;
  row.precision(17);
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    row.str("");
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      if (j) row << ' ';
      if (onehot) {
        row << (m.data(i, j) != 0.0 ? '1' : '0');
      } else {
        row << m.data(i, j);
      }
    }
    os << row.str() << '\n';
  }
}

inline FeatureMatrix read_feature_matrix(std::istream& is) {
  Eigen::Index n = 0, d = 0;
  std::string kind;
  if (!(is >> n >> d >> kind) || n < 0 || d < 0) throw std::runtime_error("feature matrix: bad header");
  FeatureMatrix m(n, d, feature_kind_from_string(kind));
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < d; ++j)
      if (!(is >> m.data(i, j))) throw std::runtime_error("feature matrix: truncated at row " + std::to_string(i));
  return m;
}

inline void save_feature_matrix(const std::string& path, const FeatureMatrix& m) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot write feature matrix: " + path);
  write_feature_matrix(os, m);
}

inline FeatureMatrix load_feature_matrix(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open feature matrix: " + path);
  return read_feature_matrix(is);
}

}  // namespace ffd
