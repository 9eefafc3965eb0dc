/**
 * @file model.hpp
 * @brief Graph convolution over line graphs with a logistic head.
 *
 * Layer rule: H_{l+1} = tanh(N H_l W_l), N = D^{-1}(S + I) with S the
 * symmetrized line-graph adjacency. The target line node's hidden states
 * from every layer are concatenated and passed through a tanh hidden layer
 * and a logistic output. Gradients are derived by hand.
 */
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "ffd/features.hpp"
#include "ffd/line_graph.hpp"
#include "ffd/rng.hpp"

namespace ffd {

struct Hyper {
  int num_gcn_layers = 3;
  int hidden_width = 32;
  int head_width = 64;
  double learning_rate = 0.005;
  int batch_size = 50;
  int epochs = 50;
  std::uint64_t seed = 0;
};

inline constexpr double kProbClamp = 1e-7;

struct ModelParams {
  Hyper hyper;
  int input_width = 0;
  std::vector<RowMatrix> layer_weights;  ///< W_l, in-width x out-width
  RowMatrix head_weights;                ///< (layers * hidden) x head_width
  Eigen::VectorXd head_bias;
  Eigen::VectorXd out_weights;
  Eigen::VectorXd out_bias;  ///< size 1

  int readout_width() const { return hyper.num_gcn_layers * hyper.hidden_width; }

  /// Zero-valued parameters with the right shapes.
  static ModelParams zeros(int input_width, const Hyper& h) {
    if (input_width < 1 || h.num_gcn_layers < 1 || h.hidden_width < 1 || h.head_width < 1) {
      throw std::invalid_argument("ModelParams: widths must be positive");
    }
    ModelParams p;
    p.hyper = h;
    p.input_width = input_width;
    int in = input_width;
    for (int l = 0; l < h.num_gcn_layers; ++l) {
      p.layer_weights.push_back(RowMatrix::Zero(in, h.hidden_width));
      in = h.hidden_width;
    }
    p.head_weights = RowMatrix::Zero(p.readout_width(), h.head_width);
    p.head_bias = Eigen::VectorXd::Zero(h.head_width);
    p.out_weights = Eigen::VectorXd::Zero(h.head_width);
    p.out_bias = Eigen::VectorXd::Zero(1);
    return p;
  }

  /// Glorot-uniform weights, zero biases.
  static ModelParams init(int input_width, const Hyper& h) {
    ModelParams p = zeros(input_width, h);
    Rng rng(derive_seed(h.seed, "model/init"));
    auto fill = [&](auto& m, double fan_in, double fan_out) {
      const double s = std::sqrt(6.0 / (fan_in + fan_out));
      for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = rng.uniform(-s, s);
    };
    for (auto& w : p.layer_weights) fill(w, static_cast<double>(w.rows()), static_cast<double>(w.cols()));
    fill(p.head_weights, static_cast<double>(p.head_weights.rows()), static_cast<double>(p.head_weights.cols()));
    fill(p.out_weights, static_cast<double>(h.head_width), 1.0);
    return p;
  }

  /// Flat views of every tensor in declaration order.
  std::vector<std::span<double>> tensors() {
    std::vector<std::span<double>> t;
    for (auto& w : layer_weights) t.emplace_back(w.data(), static_cast<std::size_t>(w.size()));
    t.emplace_back(head_weights.data(), static_cast<std::size_t>(head_weights.size()));
    t.emplace_back(head_bias.data(), static_cast<std::size_t>(head_bias.size()));
    t.emplace_back(out_weights.data(), static_cast<std::size_t>(out_weights.size()));
    t.emplace_back(out_bias.data(), static_cast<std::size_t>(out_bias.size()));
    return t;
  }

  std::vector<std::span<const double>> tensors() const {
    std::vector<std::span<const double>> t;
    for (auto s : const_cast<ModelParams*>(this)->tensors()) t.emplace_back(s.data(), s.size());
    return t;
  }

  std::vector<std::string> tensor_names() const {
    std::vector<std::string> n;
    for (std::size_t l = 0; l < layer_weights.size(); ++l) n.push_back("gcn." + std::to_string(l) + ".weight");
    n.insert(n.end(), {"head.hidden.weight", "head.hidden.bias", "head.out.weight", "head.out.bias"});
    return n;
  }

  /// this += alpha * other
  void axpy(double alpha, const ModelParams& other) {
    auto dst = tensors();
    auto src = other.tensors();
    for (std::size_t t = 0; t < dst.size(); ++t)
      for (std::size_t i = 0; i < dst[t].size(); ++i) dst[t][i] += alpha * src[t][i];
  }

  bool all_finite() const {
    for (auto t : tensors())
      for (double v : t)
        if (!std::isfinite(v)) return false;
    return true;
  }

  friend bool operator==(const ModelParams& a, const ModelParams& b) {
    if (a.input_width != b.input_width || a.layer_weights.size() != b.layer_weights.size()) return false;
    auto ta = a.tensors(), tb = b.tensors();
    for (std::size_t t = 0; t < ta.size(); ++t)
      if (ta[t].size() != tb[t].size() || !std::equal(ta[t].begin(), ta[t].end(), tb[t].begin())) return false;
    return true;
  }
};

/// Row-normalized symmetric adjacency with self-loops, in CSR form.
struct Propagation {
  std::vector<int> offsets;
  std::vector<int> cols;
  std::vector<double> inv_degree;

  static Propagation build(const LineGraph& lg) {
    const std::size_t n = lg.size();
    std::vector<std::vector<int>> nb(n);
    for (std::size_t a = 0; a < n; ++a) nb[a].push_back(static_cast<int>(a));
    for (auto [a, b] : lg.line_edges) {
      nb[a].push_back(b);
      nb[b].push_back(a);
    }
    Propagation p;
    p.offsets.reserve(n + 1);
    p.offsets.push_back(0);
    for (auto& row : nb) {
      std::sort(row.begin(), row.end());
      row.erase(std::unique(row.begin(), row.end()), row.end());
      p.cols.insert(p.cols.end(), row.begin(), row.end());
      p.offsets.push_back(static_cast<int>(p.cols.size()));
      p.inv_degree.push_back(1.0 / static_cast<double>(row.size()));
    }
    return p;
  }

  std::size_t size() const { return inv_degree.size(); }

  /// N X
  RowMatrix apply(const RowMatrix& x) const {
    RowMatrix y = RowMatrix::Zero(x.rows(), x.cols());
    for (std::size_t a = 0; a < size(); ++a) {
      auto row = y.row(static_cast<Eigen::Index>(a));
      for (int k = offsets[a]; k < offsets[a + 1]; ++k) row += x.row(cols[k]);
      row *= inv_degree[a];
    }
    return y;
  }

  /// N^T X (the pattern is symmetric, only the scaling moves to the source side)
  RowMatrix apply_transpose(const RowMatrix& x) const {
    RowMatrix y = RowMatrix::Zero(x.rows(), x.cols());
    for (std::size_t a = 0; a < size(); ++a) {
      auto row = y.row(static_cast<Eigen::Index>(a));
      for (int k = offsets[a]; k < offsets[a + 1]; ++k) row += inv_degree[cols[k]] * x.row(cols[k]);
    }
    return y;
  }

  /// Dense N (tests only).
  Eigen::MatrixXd dense() const {
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(size()), static_cast<Eigen::Index>(size()));
    for (std::size_t a = 0; a < size(); ++a)
      for (int k = offsets[a]; k < offsets[a + 1]; ++k) m(static_cast<Eigen::Index>(a), cols[k]) = inv_degree[a];
    return m;
  }
};

struct ForwardResult {
  std::vector<RowMatrix> hidden;  ///< H_1 .. H_L, one row per line node
  Eigen::VectorXd readout;
  Eigen::VectorXd head_hidden;
  double logit = 0.0;
  double probability = 0.5;
};

class NonFiniteError : public std::runtime_error {
 public:
  NonFiniteError(int layer, const std::string& what) : std::runtime_error(what), layer_(layer) {}
  int layer() const { return layer_; }

 private:
  int layer_;
};

inline double logistic(double s) {
  return s >= 0 ? 1.0 / (1.0 + std::exp(-s)) : std::exp(s) / (1.0 + std::exp(s));
}

namespace detail {

/// X W_0 without materializing X: row (i, j) is F[i] W_top + F[j] W_bottom.
inline RowMatrix first_layer_product(const LineGraph& lg, const RowMatrix& w0) {
  const Eigen::Index d = lg.endpoint_features.cols();
  const RowMatrix src_part = lg.endpoint_features * w0.topRows(d);
  const RowMatrix dst_part = lg.endpoint_features * w0.bottomRows(d);
  RowMatrix out(static_cast<Eigen::Index>(lg.size()), w0.cols());
  for (std::size_t a = 0; a < lg.size(); ++a)
    out.row(static_cast<Eigen::Index>(a)) = src_part.row(lg.line_nodes[a].src) + dst_part.row(lg.line_nodes[a].dst);
  return out;
}

inline ForwardResult forward_impl(const ModelParams& params, const LineGraph& lg, const Propagation& prop) {
  if (lg.feature_width() != params.input_width) {
    throw std::invalid_argument("forward: line-graph feature width " + std::to_string(lg.feature_width()) +
                                " != model input width " + std::to_string(params.input_width));
  }
  if (lg.target_index < 0 || static_cast<std::size_t>(lg.target_index) >= lg.size()) {
    throw std::invalid_argument("forward: invalid target index");
  }
  ForwardResult fr;
  const int L = params.hyper.num_gcn_layers;
  const int hw = params.hyper.hidden_width;
  fr.readout.resize(params.readout_width());
  for (int l = 0; l < L; ++l) {
    const RowMatrix mixed = l == 0 ? first_layer_product(lg, params.layer_weights[0])
                                   : RowMatrix(fr.hidden.back() * params.layer_weights[l]);
    RowMatrix h = prop.apply(mixed).array().tanh().matrix();
    if (!h.allFinite()) throw NonFiniteError(l, "non-finite activation in graph convolution layer " + std::to_string(l));
    fr.readout.segment(l * hw, hw) = h.row(lg.target_index).transpose();
    fr.hidden.push_back(std::move(h));
  }
  fr.head_hidden = (params.head_weights.transpose() * fr.readout + params.head_bias).array().tanh().matrix();
  fr.logit = params.out_weights.dot(fr.head_hidden) + params.out_bias(0);
  if (!std::isfinite(fr.logit)) throw NonFiniteError(L, "non-finite logit");
  fr.probability = logistic(fr.logit);
  return fr;
}

}  // namespace detail

inline ForwardResult forward(const ModelParams& params, const LineGraph& lg) {
  return detail::forward_impl(params, lg, Propagation::build(lg));
}

/// Clamped binary cross-entropy of one prediction.
inline double cross_entropy(double prob, int label) {
  const double b = std::clamp(prob, kProbClamp, 1.0 - kProbClamp);
  return label == 1 ? -std::log(b) : -std::log(1.0 - b);
}

/**
 * @brief Add weight * d(loss)/d(params) for one sample into `grads`.
 * @return the sample's loss.
 */
inline double accumulate_gradient(const ModelParams& params, const LineGraph& lg, int label, double weight,
                                  ModelParams& grads) {
  const Propagation prop = Propagation::build(lg);
  const ForwardResult fr = detail::forward_impl(params, lg, prop);
  const double loss = cross_entropy(fr.probability, label);

  // d loss / d logit; zero once the clamp is active.
  const bool clamped = fr.probability < kProbClamp || fr.probability > 1.0 - kProbClamp;
  const double dlogit = clamped ? 0.0 : weight * (fr.probability - static_cast<double>(label));
  if (dlogit == 0.0) return loss;

  const int L = params.hyper.num_gcn_layers;
  const int hw = params.hyper.hidden_width;
  const int t = lg.target_index;

  grads.out_bias(0) += dlogit;
  grads.out_weights += dlogit * fr.head_hidden;
  const Eigen::VectorXd dpre =
      (dlogit * params.out_weights).cwiseProduct((1.0 - fr.head_hidden.array().square()).matrix());
  grads.head_bias += dpre;
  grads.head_weights.noalias() += fr.readout * dpre.transpose();
  const Eigen::VectorXd dreadout = params.head_weights * dpre;

  // Walk the convolution stack backwards; dh is d loss / d H_{l+1}.
  RowMatrix dh = RowMatrix::Zero(static_cast<Eigen::Index>(lg.size()), hw);
  for (int l = L - 1; l >= 0; --l) {
    dh.row(t) += dreadout.segment(l * hw, hw).transpose();
    const RowMatrix dact = dh.cwiseProduct((1.0 - fr.hidden[l].array().square()).matrix());
    const RowMatrix dmixed = prop.apply_transpose(dact);
    if (l > 0) {
      grads.layer_weights[l].noalias() += fr.hidden[l - 1].transpose() * dmixed;
      dh = dmixed * params.layer_weights[l].transpose();
    } else {
      const Eigen::Index d = lg.endpoint_features.cols();
      RowMatrix by_src = RowMatrix::Zero(lg.endpoint_features.rows(), hw);
      RowMatrix by_dst = RowMatrix::Zero(lg.endpoint_features.rows(), hw);
      for (std::size_t a = 0; a < lg.size(); ++a) {
        by_src.row(lg.line_nodes[a].src) += dmixed.row(static_cast<Eigen::Index>(a));
        by_dst.row(lg.line_nodes[a].dst) += dmixed.row(static_cast<Eigen::Index>(a));
      }
      grads.layer_weights[0].topRows(d).noalias() += lg.endpoint_features.transpose() * by_src;
      grads.layer_weights[0].bottomRows(d).noalias() += lg.endpoint_features.transpose() * by_dst;
    }
  }
  return loss;
}

struct LossAndGrads {
  double loss = 0.0;
  ModelParams grads;
};

/// Mean cross-entropy over the batch and its exact gradient, reduced in batch order.
inline LossAndGrads loss_and_grads(const ModelParams& params,
                                   const std::vector<std::pair<const LineGraph*, int>>& batch) {
  if (batch.empty()) throw std::invalid_argument("loss_and_grads: empty batch");
  LossAndGrads out;
  out.grads = ModelParams::zeros(params.input_width, params.hyper);
  const double w = 1.0 / static_cast<double>(batch.size());
  for (const auto& [lg, label] : batch) {
    if (label != 0 && label != 1) throw std::invalid_argument("loss_and_grads: labels must be 0 or 1");
    out.loss += w * accumulate_gradient(params, *lg, label, w, out.grads);
  }
  return out;
}

inline nlohmann::json hyper_to_json(const Hyper& h) {
  return {{"num_gcn_layers", h.num_gcn_layers}, {"hidden_width", h.hidden_width}, {"head_width", h.head_width},
          {"learning_rate", h.learning_rate},   {"batch_size", h.batch_size},     {"epochs", h.epochs},
          {"seed", h.seed}};
}

inline Hyper hyper_from_json(const nlohmann::json& j, Hyper h = {}) {
  h.num_gcn_layers = j.value("num_gcn_layers", h.num_gcn_layers);
  h.hidden_width = j.value("hidden_width", h.hidden_width);
  h.head_width = j.value("head_width", h.head_width);
  h.learning_rate = j.value("learning_rate", h.learning_rate);
  h.batch_size = j.value("batch_size", h.batch_size);
  h.epochs = j.value("epochs", h.epochs);
  h.seed = j.value("seed", h.seed);
  return h;
}

inline constexpr int kCheckpointVersion = 1;

/// JSON checkpoint: hyper block, input width, and flat tensors in declaration order.
inline nlohmann::json checkpoint_to_json(const ModelParams& p) {
  nlohmann::json tensors = nlohmann::json::array();
  const auto names = p.tensor_names();
  const auto data = p.tensors();
  for (std::size_t t = 0; t < data.size(); ++t) {
    tensors.push_back({{"name", names[t]}, {"values", std::vector<double>(data[t].begin(), data[t].end())}});
  }
  return {{"version", kCheckpointVersion}, {"hyper", hyper_to_json(p.hyper)}, {"input_width", p.input_width},
          {"tensors", tensors}};
}

inline ModelParams checkpoint_from_json(const nlohmann::json& j) {
  if (j.at("version").get<int>() != kCheckpointVersion) throw std::runtime_error("unsupported checkpoint version");
  ModelParams p = ModelParams::zeros(j.at("input_width").get<int>(), hyper_from_json(j.at("hyper")));
  auto dst = p.tensors();
  const auto& src = j.at("tensors");
  if (src.size() != dst.size()) throw std::runtime_error("checkpoint tensor count mismatch");
  for (std::size_t t = 0; t < dst.size(); ++t) {
    const auto values = src[t].at("values").get<std::vector<double>>();
    if (values.size() != dst[t].size()) throw std::runtime_error("checkpoint tensor size mismatch");
    std::copy(values.begin(), values.end(), dst[t].begin());
  }
  return p;
}

inline void save_checkpoint(const std::string& path, const ModelParams& p) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot write checkpoint: " + path);
  os << checkpoint_to_json(p).dump() << '\n';
}

inline ModelParams load_checkpoint(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open checkpoint: " + path);
  return checkpoint_from_json(nlohmann::json::parse(is));
}

}  // namespace ffd
