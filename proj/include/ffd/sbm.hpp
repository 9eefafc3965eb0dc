/**
 * @file sbm.hpp
 * @brief Planted-partition blockmodel and numerical checks of the community
 *        labeling condition.
 *
 * The quantities here describe a benchmark of linked and unlinked node pairs
 * drawn from a K-community blockmodel:
 *
 *   theta_L = p / (p + (K-1) q)               P(same community | linked)
 *   theta_U = (1-p) / (K - [p + (K-1) q])     P(same community | unlinked)
 *   g       = (p-q)(theta_L + theta_U) + 1 - eps0 - eps1
 *
 * and the condition g >= ((1 - W_nc) / W_c) (E_U + E_L) under which mixing a
 * community predictor into a non-community one is expected to help.
 */
#pragma once

#include <cmath>
#include <cstdint>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "ffd/graph.hpp"
#include "ffd/rng.hpp"

namespace ffd {

struct SbmSpec {
  int K = 2;
  int community_size = 10;
  double p = 0.5;
  double q = 0.1;

  /// Probabilities may touch 0 here so degenerate test graphs can be built.
  void validate() const {
    if (K < 2) throw std::invalid_argument("SBM needs K >= 2");
    if (community_size < 1) throw std::invalid_argument("SBM community_size must be >= 1");
    if (!(p >= 0.0 && p <= 1.0) || !(q >= 0.0 && q <= 1.0)) {
      throw std::invalid_argument("SBM probabilities must lie in [0, 1]");
    }
  }
};

struct PredictorModel {
  double e_unlinked = 0.5;  ///< accuracy of the non-community predictor on unlinked pairs
  double e_linked = 0.5;    ///< accuracy of the non-community predictor on linked pairs
  double eps0 = 0.0;        ///< community detector error rate on unlinked pairs
  double eps1 = 0.0;        ///< community detector error rate on linked pairs
  double w_nc = 0.5;
  double w_c = 0.5;

  /// Rescales the weights to sum to one.
  PredictorModel normalized() const {
    PredictorModel m = *this;
    const double s = w_nc + w_c;
    if (s <= 0.0) throw std::invalid_argument("predictor weights must have a positive sum");
    m.w_nc /= s;
    m.w_c /= s;
    return m;
  }
};

struct TheoremReport {
  double theta_l = 0.0;
  double theta_u = 0.0;
  double g_value = 0.0;
  double rhs = 0.0;  ///< ((1 - W_nc) / W_c) (E_U + E_L)
  bool condition_holds = false;
  /// W_nc (E_U + E_L) + W_c g: the summed-class hybrid score the closed form predicts.
  double closed_form_hybrid_score = 0.0;

  // Monte Carlo part (zero when not simulated).
  std::size_t mc_trials = 0;
  double mc_acc_hybrid = 0.0;
  double mc_acc_noncommunity = 0.0;
  double mc_acc_community = 0.0;
  double mc_hybrid_linked = 0.0, mc_hybrid_unlinked = 0.0;
  double mc_nc_linked = 0.0, mc_nc_unlinked = 0.0;
  double mc_intra_linked = 0.0, mc_intra_unlinked = 0.0;
  /// Exact expectations for the simulated predictors.
  double expected_acc_hybrid = 0.0;
  double expected_acc_noncommunity = 0.0;
  /// Standard error of the per-pair accuracy difference hybrid - non-community.
  double mc_margin_sigma = 0.0;
  bool mc_consistent = true;
};

struct SbmSample {
  DirectedGraph graph;
  std::vector<int> communities;
};

/**
 * @brief Draw a directed blockmodel graph.
 *
 * Node v belongs to community v / community_size. Each ordered pair (u, v),
 * u != v, is an edge independently with probability p (same community) or q.
 */
inline SbmSample generate_sbm(const SbmSpec& spec, std::uint64_t seed) {
  spec.validate();
  const auto n = static_cast<std::size_t>(spec.K) * static_cast<std::size_t>(spec.community_size);
  SbmSample out;
  out.communities.resize(n);
  for (std::size_t v = 0; v < n; ++v) out.communities[v] = static_cast<int>(v / spec.community_size);
  Rng rng(derive_seed(seed, "sbm/edges"));
  std::vector<Edge> edges;
  for (std::size_t u = 0; u < n; ++u) {
    for (std::size_t v = 0; v < n; ++v) {
      if (u == v) continue;
      const double prob = out.communities[u] == out.communities[v] ? spec.p : spec.q;
      if (rng.uniform() < prob) edges.push_back({static_cast<NodeId>(u), static_cast<NodeId>(v)});
    }
  }
  out.graph = DirectedGraph(n, std::move(edges));
  return out;
}

inline double theta_linked(int K, double p, double q) {
  const double denom = p + (K - 1) * q;
  if (!(denom > 0.0)) throw std::domain_error("theta_linked: p + (K-1) q must be positive");
  return p / denom;
}

inline double theta_unlinked(int K, double p, double q) {
  const double denom = K - (p + (K - 1) * q);
  if (!(denom > 0.0)) throw std::domain_error("theta_unlinked: K - [p + (K-1) q] must be positive");
  return (1.0 - p) / denom;
}

inline double theta_linked(const SbmSpec& s) { return theta_linked(s.K, s.p, s.q); }
inline double theta_unlinked(const SbmSpec& s) { return theta_unlinked(s.K, s.p, s.q); }

/// Left side of the condition.
inline double g_function(double p, double q, int K, double eps0 = 0.0, double eps1 = 0.0) {
  return (p - q) * (theta_linked(K, p, q) + theta_unlinked(K, p, q)) + 1.0 - eps0 - eps1;
}

/// Closed-form partial derivatives of g with respect to p and q.
struct GGradient {
  double dp = 0.0;
  double dq = 0.0;
};

inline GGradient g_gradient(double p, double q, int K) {
  const double a = p + (K - 1) * q;
  const double b = K - a;
  const double tl = p / a;
  const double tu = (1.0 - p) / b;
  GGradient gr;
  gr.dp = tl + tu + (p - q) * ((K - 1) * q / (a * a) + ((K - 1) * q - K + 1) / (b * b));
  gr.dq = -(tl + tu) + (p - q) * ((1 - K) * (p - 1) / (b * b) - (K - 1) * p / (a * a));
  return gr;
}

/**
 * @brief Evaluate the closed-form part of the condition.
 * @throws std::invalid_argument when W_c == 0 (the right side is undefined).
 */
inline TheoremReport g_condition(const SbmSpec& spec, const PredictorModel& m) {
  if (m.w_c == 0.0) throw std::invalid_argument("g_condition: W_c must be nonzero");
  TheoremReport r;
  r.theta_l = theta_linked(spec);
  r.theta_u = theta_unlinked(spec);
  r.g_value = (spec.p - spec.q) * (r.theta_l + r.theta_u) + 1.0 - m.eps0 - m.eps1;
  r.rhs = (1.0 - m.w_nc) / m.w_c * (m.e_unlinked + m.e_linked);
  r.condition_holds = r.g_value >= r.rhs;
  r.closed_form_hybrid_score = m.w_nc * (m.e_unlinked + m.e_linked) + m.w_c * r.g_value;
  return r;
}

struct MonotonicityViolation {
  double p = 0.0, q = 0.0;
  double dg_dp = 0.0, dg_dq = 0.0;
};

struct MonotonicityReport {
  int K = 0;
  int grid_resolution = 0;
  std::size_t points = 0;
  std::vector<MonotonicityViolation> violations;
  double min_dg_dp = 0.0;
  double max_dg_dq = 0.0;
};

/// Grid coordinate i (1-based) of a resolution-r grid strictly inside (0, 1).
inline double grid_point(int i, int resolution) { return static_cast<double>(i) / (resolution + 1); }

/**
 * @brief Check signs of dg/dp and dg/dq by central differences over a grid.
 *
 * A point violates when dg/dp < -tol or dg/dq > tol, tol = 1e-9 |g| + 1e-12.
 * Grid points are i / (resolution + 1), i = 1..resolution, on both axes.
 */
inline MonotonicityReport g_monotonicity_check(int K, int grid_resolution) {
  if (K < 2 || grid_resolution < 1) throw std::invalid_argument("monotonicity check needs K >= 2 and a nonempty grid");
  MonotonicityReport rep;
  rep.K = K;
  rep.grid_resolution = grid_resolution;
  rep.min_dg_dp = INFINITY;
  rep.max_dg_dq = -INFINITY;
  constexpr double h = 1e-6;
  for (int i = 1; i <= grid_resolution; ++i) {
    for (int j = 1; j <= grid_resolution; ++j) {
      const double p = grid_point(i, grid_resolution);
      const double q = grid_point(j, grid_resolution);
      const double g = g_function(p, q, K);
      const double dp = (g_function(p + h, q, K) - g_function(p - h, q, K)) / (2 * h);
      const double dq = (g_function(p, q + h, K) - g_function(p, q - h, K)) / (2 * h);
      const double tol = 1e-9 * std::abs(g) + 1e-12;
      ++rep.points;
      rep.min_dg_dp = std::min(rep.min_dg_dp, dp);
      rep.max_dg_dq = std::max(rep.max_dg_dq, dq);
      if (dp < -tol || dq > tol) rep.violations.push_back({p, q, dp, dq});
    }
  }
  return rep;
}

/// CSV rows `p,q,K,g_value` for surface plotting (error rates zero).
inline std::string g_surface_csv(const std::vector<int>& Ks, int grid_resolution) {
  std::ostringstream os;
  os.precision(17);
  os << "p,q,K,g_value\n";
  for (int K : Ks)
    for (int i = 1; i <= grid_resolution; ++i)
      for (int j = 1; j <= grid_resolution; ++j) {
        const double p = grid_point(i, grid_resolution), q = grid_point(j, grid_resolution);
        os << p << ',' << q << ',' << K << ',' << g_function(p, q, K) << '\n';
      }
  return os.str();
}

namespace detail {

/// P(hybrid correct) given each predictor's accuracy on a class, predictors independent.
inline double hybrid_class_accuracy(double acc_nc, double acc_c, double w_nc, double w_c) {
  double total = 0.0;
  for (int nc_ok = 0; nc_ok < 2; ++nc_ok) {
    for (int c_ok = 0; c_ok < 2; ++c_ok) {
      const double prob = (nc_ok ? acc_nc : 1 - acc_nc) * (c_ok ? acc_c : 1 - acc_c);
      // Score signed so that positive means "correct".
      const double s = w_nc * (nc_ok ? 1.0 : -1.0) + w_c * (c_ok ? 1.0 : -1.0);
      total += prob * (s > 0 ? 1.0 : s < 0 ? 0.0 : 0.5);
    }
  }
  return total;
}

}  // namespace detail

/**
 * @brief Simulate the hybrid predictor on blockmodel pairs.
 *
 * Half the trials draw a linked pair, half an unlinked one. Community
 * memberships are uniform over K blocks and a pair is accepted as linked
 * with probability p (same block) or q, mirroring the generative process.
 * The community predictor answers "linked" iff its (possibly erroneous)
 * view says both nodes share a block; its same-block bit is flipped with
 * probability eps1 on linked pairs and eps0 on unlinked pairs. The
 * non-community predictor is right with probability E_L / E_U. The hybrid
 * answer is the sign of W_nc f_nc + W_c f_c with f in {-1, +1}; an exact
 * zero is resolved by a fair coin.
 */
inline TheoremReport monte_carlo_theorem(const SbmSpec& spec, const PredictorModel& m, std::size_t trials,
                                         std::uint64_t seed) {
  if (trials < 1000) throw std::invalid_argument("monte_carlo_theorem needs at least 1000 trials");
  TheoremReport r;
  if (m.w_c != 0.0) {
    r = g_condition(spec, m);
  } else {
    r.theta_l = theta_linked(spec);
    r.theta_u = theta_unlinked(spec);
    r.g_value = (spec.p - spec.q) * (r.theta_l + r.theta_u) + 1.0 - m.eps0 - m.eps1;
  }

  Rng rng(derive_seed(seed, "theorem/monte-carlo"));
  const auto K = static_cast<std::uint64_t>(spec.K);
  std::size_t n_link = 0, n_unlink = 0;
  std::size_t h_link = 0, h_unlink = 0, nc_link = 0, nc_unlink = 0, c_ok_total = 0;
  std::size_t intra_link = 0, intra_unlink = 0;
  double diff_sum = 0.0, diff_sq = 0.0;

  for (std::size_t t = 0; t < trials; ++t) {
    const bool linked = (t % 2) == 0;
    bool same;
    for (;;) {
      same = rng.below(K) == rng.below(K);
      const double prob = same ? spec.p : spec.q;
      if (rng.uniform() < (linked ? prob : 1.0 - prob)) break;
    }
    const bool flip = rng.bernoulli(linked ? m.eps1 : m.eps0);
    const double f_c = (same != flip) ? 1.0 : -1.0;
    const bool nc_correct = rng.bernoulli(linked ? m.e_linked : m.e_unlinked);
    const double f_nc = (nc_correct == linked) ? 1.0 : -1.0;
    const double s = m.w_nc * f_nc + m.w_c * f_c;
    const bool tie_coin = rng.bernoulli(0.5);
    const bool predict_link = s > 0 || (s == 0 && tie_coin);
    const bool h_correct = predict_link == linked;
    const bool c_correct = (f_c > 0) == linked;

    if (linked) {
      ++n_link;
      intra_link += same;
      h_link += h_correct;
      nc_link += nc_correct;
    } else {
      ++n_unlink;
      intra_unlink += same;
      h_unlink += h_correct;
      nc_unlink += nc_correct;
    }
    c_ok_total += c_correct;
    const double d = static_cast<double>(h_correct) - static_cast<double>(nc_correct);
    diff_sum += d;
    diff_sq += d * d;
  }

  const auto frac = [](std::size_t a, std::size_t b) { return static_cast<double>(a) / static_cast<double>(b); };
  r.mc_trials = trials;
  r.mc_hybrid_linked = frac(h_link, n_link);
  r.mc_hybrid_unlinked = frac(h_unlink, n_unlink);
  r.mc_nc_linked = frac(nc_link, n_link);
  r.mc_nc_unlinked = frac(nc_unlink, n_unlink);
  r.mc_intra_linked = frac(intra_link, n_link);
  r.mc_intra_unlinked = frac(intra_unlink, n_unlink);
  r.mc_acc_hybrid = frac(h_link + h_unlink, trials);
  r.mc_acc_noncommunity = frac(nc_link + nc_unlink, trials);
  r.mc_acc_community = frac(c_ok_total, trials);

  const double nt = static_cast<double>(trials);
  const double mean_d = diff_sum / nt;
  const double var_d = std::max(0.0, diff_sq / nt - mean_d * mean_d);
  r.mc_margin_sigma = std::sqrt(var_d / nt);

  const double c_link = r.theta_l * (1 - m.eps1) + (1 - r.theta_l) * m.eps1;
  const double c_unlink = (1 - r.theta_u) * (1 - m.eps0) + r.theta_u * m.eps0;
  r.expected_acc_hybrid = 0.5 * (detail::hybrid_class_accuracy(m.e_linked, c_link, m.w_nc, m.w_c) +
                                 detail::hybrid_class_accuracy(m.e_unlinked, c_unlink, m.w_nc, m.w_c));
  r.expected_acc_noncommunity = 0.5 * (m.e_linked + m.e_unlinked);

  if (r.condition_holds && r.g_value - r.rhs >= 0.05) {
    r.mc_consistent = r.mc_acc_hybrid >= r.mc_acc_noncommunity - 3 * r.mc_margin_sigma;
  }
  return r;
}

inline nlohmann::json to_json(const TheoremReport& r) {
  return {{"theta_l", r.theta_l},
          {"theta_u", r.theta_u},
          {"g_value", r.g_value},
          {"rhs", r.rhs},
          {"condition_holds", r.condition_holds},
          {"closed_form_hybrid_score", r.closed_form_hybrid_score},
          {"mc_trials", r.mc_trials},
          {"mc_acc_hybrid", r.mc_acc_hybrid},
          {"mc_acc_noncommunity", r.mc_acc_noncommunity},
          {"mc_acc_community", r.mc_acc_community},
          {"mc_hybrid_linked", r.mc_hybrid_linked},
          {"mc_hybrid_unlinked", r.mc_hybrid_unlinked},
          {"mc_noncommunity_linked", r.mc_nc_linked},
          {"mc_noncommunity_unlinked", r.mc_nc_unlinked},
          {"mc_intra_fraction_linked", r.mc_intra_linked},
          {"mc_intra_fraction_unlinked", r.mc_intra_unlinked},
          {"expected_acc_hybrid", r.expected_acc_hybrid},
          {"expected_acc_noncommunity", r.expected_acc_noncommunity},
          {"mc_margin_sigma", r.mc_margin_sigma},
          {"mc_consistent", r.mc_consistent}};
}

}  // namespace ffd
