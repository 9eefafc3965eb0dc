/**
 * @file embedding.hpp
 * @brief Spectral node embedding of the degree-normalized adjacency.
 */
#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "ffd/features.hpp"
#include "ffd/graph.hpp"
#include "ffd/rng.hpp"

namespace ffd {

/// Any map graph -> N x dim finite matrix can stand in for the default provider.
using EmbeddingProvider = std::function<FeatureMatrix(const DirectedGraph&, int dim, std::uint64_t seed)>;

struct SpectralOptions {
  double tolerance = 1e-6;
  int max_iterations = 3000;
  int oversample = 8;
};

struct SingularTriplets {
  Eigen::MatrixXd U;         ///< n x k left singular vectors
  Eigen::VectorXd sigma;     ///< descending
  Eigen::MatrixXd V;         ///< n x k right singular vectors
  int iterations = 0;
  bool converged = false;
};

/// D_out^{-1/2} A D_in^{-1/2}; rows/columns of zero-degree nodes are empty.
inline Eigen::SparseMatrix<double, Eigen::RowMajor> normalized_adjacency(const DirectedGraph& g) {
  const auto n = static_cast<Eigen::Index>(g.num_nodes());
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(g.num_edges());
  for (const Edge& e : g.edges()) {
    const double w = 1.0 / std::sqrt(static_cast<double>(g.out_degree(e.src)) * static_cast<double>(g.in_degree(e.dst)));
    trip.emplace_back(e.src, e.dst, w);
  }
  Eigen::SparseMatrix<double, Eigen::RowMajor> m(n, n);
  m.setFromTriplets(trip.begin(), trip.end());
  return m;
}

/**
 * @brief Top-k singular triplets by orthogonal (subspace) iteration on M M^T.
 *
 * Stops when every leading Ritz value changes by less than `tolerance`
 * relative to the largest one. The start block is fixed, so results do not
 * depend on any caller seed. Each left vector is signed so its
 * largest-magnitude entry is positive (first index wins ties).
 */
inline SingularTriplets top_singular_triplets(const Eigen::SparseMatrix<double, Eigen::RowMajor>& M, int k,
                                              const SpectralOptions& opt = {}) {
  const Eigen::Index n = M.rows();
  if (k < 1 || k > n) throw std::invalid_argument("top_singular_triplets: need 1 <= k <= n");
  const Eigen::Index block = std::min<Eigen::Index>(n, k + opt.oversample);
  const Eigen::SparseMatrix<double, Eigen::RowMajor> Mt = M.transpose();

  Rng rng(derive_seed(0x5EEDULL, "embedding/start-block"));
  Eigen::MatrixXd X(n, block);
  for (Eigen::Index j = 0; j < block; ++j)
    for (Eigen::Index i = 0; i < n; ++i) X(i, j) = rng.uniform(-1.0, 1.0);
  X = Eigen::HouseholderQR<Eigen::MatrixXd>(X).householderQ() * Eigen::MatrixXd::Identity(n, block);

  SingularTriplets out;
  Eigen::VectorXd prev = Eigen::VectorXd::Constant(block, -1.0);
  Eigen::MatrixXd Y;
  Eigen::VectorXd ritz;
  for (int it = 1; it <= opt.max_iterations; ++it) {
    Y = M * (Mt * X);
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(Y);
    X = qr.householderQ() * Eigen::MatrixXd::Identity(n, block);
    // Ritz values of M M^T on span(X).
    const Eigen::MatrixXd B = Mt * X;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(B.transpose() * B);
    ritz = es.eigenvalues().reverse();
    out.iterations = it;
    const double top = std::max(ritz(0), 1e-300);
    if (((ritz.head(k) - prev.head(k)).cwiseAbs().array() <= opt.tolerance * top).all()) {
      out.converged = true;
      break;
    }
    prev = ritz;
  }

  // Rayleigh-Ritz rotation to singular directions.
  const Eigen::MatrixXd B = Mt * X;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(B.transpose() * B);
  Eigen::MatrixXd rot = es.eigenvectors().rowwise().reverse();
  out.U = (X * rot).leftCols(k);
  out.sigma = es.eigenvalues().reverse().head(k).cwiseMax(0.0).cwiseSqrt();
  for (Eigen::Index j = 0; j < k; ++j) {
    Eigen::Index arg = 0;
    out.U.col(j).cwiseAbs().maxCoeff(&arg);
    if (out.U(arg, j) < 0) out.U.col(j) *= -1.0;
  }
  out.V = Eigen::MatrixXd::Zero(n, k);
  const double floor = 1e-12 * std::max(out.sigma(0), 1e-300);
  for (Eigen::Index j = 0; j < k; ++j) {
    if (out.sigma(j) > floor) out.V.col(j) = (Mt * out.U.col(j)) / out.sigma(j);
  }
  return out;
}

/**
 * @brief Default embedding provider.
 *
 * Uses the top ceil(dim/2) singular triplets of D_out^{-1/2} A D_in^{-1/2}:
 * the first columns are U sqrt(Sigma) (source role), the remaining columns
 * V sqrt(Sigma) (target role), truncated to `dim`. Rows are scaled to unit
 * norm; all-zero rows (isolated nodes) stay zero. `seed` is accepted for
 * interface compatibility and does not affect the result.
 */
inline FeatureMatrix embed_nodes(const DirectedGraph& g, int dim, std::uint64_t /*seed*/ = 0,
                                 const SpectralOptions& opt = {}) {
  const auto n = static_cast<Eigen::Index>(g.num_nodes());
  if (dim < 1 || dim > n) throw std::invalid_argument("embed_nodes: need 1 <= dim <= num_nodes");
  FeatureMatrix out(n, dim, FeatureKind::embedding);
  if (g.num_edges() == 0) return out;

  const int k = (dim + 1) / 2;
  const auto trip = top_singular_triplets(normalized_adjacency(g), k, opt);
  const Eigen::VectorXd root = trip.sigma.cwiseSqrt();
  for (int c = 0; c < dim; ++c) {
    if (c < k) {
      out.data.col(c) = trip.U.col(c) * root(c);
    } else {
      out.data.col(c) = trip.V.col(c - k) * root(c - k);
    }
  }
  for (Eigen::Index i = 0; i < n; ++i) {
    const double norm = out.data.row(i).norm();
    if (norm > 1e-12) {
      out.data.row(i) /= norm;
    } else {
      out.data.row(i).setZero();
    }
  }
  return out;
}

}  // namespace ffd
