/**
 * @file pipeline.hpp
 * @brief End-to-end link scoring: features -> enclosing subgraph -> line
 *        graph -> GNN, plus the SGD training loop.
 */
#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "ffd/community.hpp"
#include "ffd/embedding.hpp"
#include "ffd/features.hpp"
#include "ffd/line_graph.hpp"
#include "ffd/metrics.hpp"
#include "ffd/model.hpp"
#include "ffd/split.hpp"

namespace ffd {

struct FeatureConfig {
  int hops = 1;
  std::size_t max_nodes = 100;
  int label_cap = 50;
  int embed_dim = 32;
  bool use_path = true;
  bool use_community = true;
  bool use_embedding = true;
};

/**
 * @brief Global feature blocks of the observed graph plus the recipe for
 *        per-pair samples.
 *
 * Community labels and embeddings are computed once on the observed
 * (train-only) graph; path labels are recomputed inside every enclosing
 * subgraph.
 */
class PipelineContext {
 public:
  PipelineContext(DirectedGraph observed, FeatureConfig cfg, std::uint64_t seed,
                  const EmbeddingProvider& embed = nullptr)
      : observed_(std::move(observed)), cfg_(cfg), seed_(seed) {
    if (!cfg_.use_path && !cfg_.use_community && !cfg_.use_embedding) {
      throw std::invalid_argument("at least one feature block must be enabled");
    }
    if (observed_.num_nodes() == 0) throw std::invalid_argument("observed graph is empty");
    if (cfg_.use_community) {
      communities_ = detect_communities(observed_);
      community_block_ = community_onehot(communities_);
    } else {
      community_block_ = FeatureMatrix(static_cast<Eigen::Index>(observed_.num_nodes()), 0, FeatureKind::community_onehot);
    }
    if (cfg_.use_embedding) {
      const std::uint64_t es = derive_seed(seed_, "embedding");
      embedding_block_ = embed ? embed(observed_, cfg_.embed_dim, es) : embed_nodes(observed_, cfg_.embed_dim, es);
      if (embedding_block_.rows() != static_cast<Eigen::Index>(observed_.num_nodes()) || !embedding_block_.data.allFinite()) {
        throw std::runtime_error("embedding provider returned an invalid matrix");
      }
    } else {
      embedding_block_ = FeatureMatrix(static_cast<Eigen::Index>(observed_.num_nodes()), 0, FeatureKind::embedding);
    }
  }

  const DirectedGraph& observed() const { return observed_; }
  const FeatureConfig& config() const { return cfg_; }
  const CommunityAssignment& communities() const { return communities_; }
  const FeatureMatrix& community_block() const { return community_block_; }
  const FeatureMatrix& embedding_block() const { return embedding_block_; }

  int path_width() const { return cfg_.use_path ? cfg_.label_cap + 1 : 0; }
  int hybrid_width() const {
    return path_width() + static_cast<int>(community_block_.cols()) + static_cast<int>(embedding_block_.cols());
  }
  int line_feature_width() const { return 2 * hybrid_width(); }

  /// O_H restricted to the subgraph's nodes, in local order.
  FeatureMatrix local_features(const EnclosingSubgraph& sub) const {
    const auto n = static_cast<Eigen::Index>(sub.nodes.size());
    FeatureMatrix o_p(n, 0, FeatureKind::path_onehot);
    if (cfg_.use_path) o_p = onehot_labels(drnl_label(sub.graph, sub.target_src, sub.target_dst), cfg_.label_cap);
    FeatureMatrix o_c(n, community_block_.cols(), FeatureKind::community_onehot);
    FeatureMatrix o_e(n, embedding_block_.cols(), FeatureKind::embedding);
    for (Eigen::Index i = 0; i < n; ++i) {
      if (o_c.cols() > 0) o_c.data.row(i) = community_block_.data.row(sub.nodes[i]);
      if (o_e.cols() > 0) o_e.data.row(i) = embedding_block_.data.row(sub.nodes[i]);
    }
    return fuse(o_p, o_c, o_e);
  }

  EnclosingSubgraph subgraph(NodeId x, NodeId y) const {
    return extract_subgraph(observed_, x, y, cfg_.hops, cfg_.max_nodes, derive_seed(seed_, "subgraph"));
  }

  LineGraph sample(NodeId x, NodeId y) const {
    const auto sub = subgraph(x, y);
    return to_line_graph(sub, local_features(sub));
  }

 private:
  DirectedGraph observed_;
  FeatureConfig cfg_;
  std::uint64_t seed_;
  CommunityAssignment communities_;
  FeatureMatrix community_block_;
  FeatureMatrix embedding_block_;
};

inline double predict(const ModelParams& params, NodeId x, NodeId y, const PipelineContext& ctx) {
  return forward(params, ctx.sample(x, y)).probability;
}

inline std::vector<ScoredPair> score_samples(const ModelParams& params, const std::vector<LabeledPair>& samples,
                                             const PipelineContext& ctx) {
  std::vector<ScoredPair> out;
  out.reserve(samples.size());
  for (const auto& s : samples) out.push_back({s.src, s.dst, predict(params, s.src, s.dst, ctx), s.label});
  return out;
}

struct EpochRecord {
  int epoch = 0;
  double mean_loss = 0.0;
  double test_auc = 0.0;
  double test_ap = 0.0;
};

struct TrainReport {
  std::vector<EpochRecord> epochs;
  ModelParams best_params;
  int best_epoch = 0;
  double best_auc = -1.0;
};

class TrainingDiverged : public std::runtime_error {
 public:
  TrainingDiverged(int epoch, int batch)
      : std::runtime_error("training diverged (non-finite loss) at epoch " + std::to_string(epoch) + ", batch " +
                           std::to_string(batch)),
        epoch_(epoch),
        batch_(batch) {}
  int epoch() const { return epoch_; }
  int batch() const { return batch_; }

 private:
  int epoch_, batch_;
};

/// One plain SGD step on a batch; returns the batch loss before the step.
inline double sgd_step(ModelParams& params, const std::vector<std::pair<const LineGraph*, int>>& batch) {
  auto lg = loss_and_grads(params, batch);
  if (std::isfinite(lg.loss)) params.axpy(-params.hyper.learning_rate, lg.grads);
  return lg.loss;
}

using EpochCallback = std::function<void(const EpochRecord&)>;

/**
 * @brief Mini-batch SGD over the train samples.
 *
 * Samples are reshuffled every epoch from the "train/shuffle" substream of
 * hyper.seed. Test AUC/AP are recorded after every epoch and the parameters
 * of the best-AUC epoch (earliest on ties) are returned.
 */
inline TrainReport train(ModelParams& params, const std::vector<LabeledPair>& train_samples,
                         const std::vector<LabeledPair>& test_samples, const PipelineContext& ctx,
                         const EpochCallback& on_epoch = nullptr) {
  if (train_samples.empty()) throw std::invalid_argument("train: no training samples");
  if (params.input_width != ctx.line_feature_width()) {
    throw std::invalid_argument("train: model input width does not match the pipeline features");
  }
  const Hyper& h = params.hyper;
  if (h.batch_size < 1) throw std::invalid_argument("train: batch_size must be >= 1");
  TrainReport report;
  report.best_params = params;
  Rng shuffle_rng(derive_seed(h.seed, "train/shuffle"));
  std::vector<std::size_t> order(train_samples.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

  for (int epoch = 1; epoch <= h.epochs; ++epoch) {
    shuffle_rng.shuffle(order);
    double loss_sum = 0.0;
    int batches = 0;
    for (std::size_t start = 0; start < order.size(); start += static_cast<std::size_t>(h.batch_size)) {
      const std::size_t stop = std::min(order.size(), start + static_cast<std::size_t>(h.batch_size));
      std::vector<LineGraph> graphs;
      graphs.reserve(stop - start);
      std::vector<std::pair<const LineGraph*, int>> batch;
      for (std::size_t i = start; i < stop; ++i) {
        const auto& s = train_samples[order[i]];
        graphs.push_back(ctx.sample(s.src, s.dst));
      }
      for (std::size_t i = start; i < stop; ++i) batch.emplace_back(&graphs[i - start], train_samples[order[i]].label);
      ++batches;
      const double loss = sgd_step(params, batch);
      if (!std::isfinite(loss) || !params.all_finite()) throw TrainingDiverged(epoch, batches);
      loss_sum += loss;
    }
    EpochRecord rec;
    rec.epoch = epoch;
    rec.mean_loss = loss_sum / batches;
    if (!test_samples.empty()) {
      const auto scored = score_samples(params, test_samples, ctx);
      rec.test_auc = auc(scored);
      rec.test_ap = average_precision(scored);
    }
    report.epochs.push_back(rec);
    if (rec.test_auc > report.best_auc) {
      report.best_auc = rec.test_auc;
      report.best_epoch = epoch;
      report.best_params = params;
    }
    if (on_epoch) on_epoch(rec);
  }
  return report;
}

inline std::string train_report_csv(const TrainReport& r) {
  std::ostringstream os;
  os.precision(17);
  os << "epoch,loss,auc,ap\n";
  for (const auto& e : r.epochs) os << e.epoch << ',' << e.mean_loss << ',' << e.test_auc << ',' << e.test_ap << '\n';
  return os.str();
}

}  // namespace ffd
