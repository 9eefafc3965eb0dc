/**
 * @file experiment.hpp
 * @brief Config-driven experiment runs and their on-disk artifacts.
 *
 * A run config is one JSON document:
 *
 *   {
 *     "seed": 7,                                  // required
 *     "dataset": "edges.tsv",                     // or "sbm": {...}
 *     "sbm": {"K": 4, "community_size": 100, "p": 0.2, "q": 0.02},
 *     "split": {"train_fraction": 0.5, "negative_ratio": 1.0},
 *     "features": {"hops": 1, "max_nodes": 100, "label_cap": 50, "embed_dim": 32},
 *     "model": {"epochs": 50, "learning_rate": 0.005, "batch_size": 50, ...},
 *     "out": "runs/sbm"
 *   }
 *
 * Every stochastic stage draws from its own substream of `seed`.
 */
#pragma once

#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "ffd/graph.hpp"
#include "ffd/heuristics.hpp"
#include "ffd/metrics.hpp"
#include "ffd/pipeline.hpp"
#include "ffd/sbm.hpp"
#include "ffd/split.hpp"

namespace ffd {

/** @brief Invalid or incomplete configuration (CLI exit code 2). */
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct RunConfig {
  std::optional<std::string> dataset;
  std::optional<SbmSpec> sbm;
  SplitSpec split;
  FeatureConfig features;
  Hyper hyper;
  std::string out_dir = "ffd-out";
  std::optional<std::uint64_t> seed;
  nlohmann::json raw = nlohmann::json::object();

  std::uint64_t root_seed() const {
    if (!seed) throw ConfigError("config: 'seed' is required");
    return *seed;
  }

  /// Checks invariants; call after flag overrides are applied.
  void validate(bool needs_data = true) const {
    if (!seed) throw ConfigError("config: 'seed' is required");
    if (needs_data) {
      if (dataset.has_value() == sbm.has_value()) throw ConfigError("config: give exactly one of 'dataset' or 'sbm'");
      if (dataset && !std::filesystem::exists(*dataset)) throw ConfigError("config: dataset not found: " + *dataset);
      if (sbm) {
        try {
          sbm->validate();
        } catch (const std::invalid_argument& e) {
          throw ConfigError(std::string("config: ") + e.what());
        }
      }
    }
    if (!(split.train_fraction > 0.0 && split.train_fraction < 1.0)) {
      throw ConfigError("config: train_fraction must lie in (0, 1)");
    }
    if (!(split.negative_ratio > 0.0)) throw ConfigError("config: negative_ratio must be positive");
    if (features.hops < 1 || features.max_nodes < 2 || features.label_cap < 1 || features.embed_dim < 1) {
      throw ConfigError("config: invalid feature parameters");
    }
    if (hyper.epochs < 0 || hyper.batch_size < 1 || !(hyper.learning_rate >= 0.0)) {
      throw ConfigError("config: invalid model hyperparameters");
    }
  }
};

inline RunConfig config_from_json(const nlohmann::json& j) {
  RunConfig c;
  c.raw = j;
  try {
    if (j.contains("seed")) c.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("dataset") && !j.at("dataset").is_null()) c.dataset = j.at("dataset").get<std::string>();
    if (j.contains("sbm") && !j.at("sbm").is_null()) {
      const auto& s = j.at("sbm");
      SbmSpec spec;
      spec.K = s.value("K", spec.K);
      spec.community_size = s.value("community_size", spec.community_size);
      spec.p = s.value("p", spec.p);
      spec.q = s.value("q", spec.q);
      c.sbm = spec;
    }
    if (j.contains("split")) {
      const auto& s = j.at("split");
      c.split.train_fraction = s.value("train_fraction", c.split.train_fraction);
      c.split.negative_ratio = s.value("negative_ratio", c.split.negative_ratio);
    }
    if (j.contains("features")) {
      const auto& f = j.at("features");
      c.features.hops = f.value("hops", c.features.hops);
      c.features.max_nodes = f.value("max_nodes", c.features.max_nodes);
      c.features.label_cap = f.value("label_cap", c.features.label_cap);
      c.features.embed_dim = f.value("embed_dim", c.features.embed_dim);
      c.features.use_path = f.value("use_path", c.features.use_path);
      c.features.use_community = f.value("use_community", c.features.use_community);
      c.features.use_embedding = f.value("use_embedding", c.features.use_embedding);
    }
    if (j.contains("model")) c.hyper = hyper_from_json(j.at("model"), c.hyper);
    c.out_dir = j.value("out", c.out_dir);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  return c;
}

inline RunConfig load_config(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot open config: " + path);
  try {
    return config_from_json(nlohmann::json::parse(is));
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
}

/// Named substreams of the root seed.
struct SeedPlan {
  std::uint64_t data, split, features, model;
  explicit SeedPlan(std::uint64_t root)
      : data(derive_seed(root, "data")),
        split(derive_seed(root, "split")),
        features(derive_seed(root, "features")),
        model(derive_seed(root, "model")) {}
};

inline DirectedGraph load_run_graph(const RunConfig& cfg) {
  if (cfg.dataset) return load_edge_list(*cfg.dataset).graph;
  return generate_sbm(*cfg.sbm, SeedPlan(cfg.root_seed()).data).graph;
}

inline std::string dataset_name(const RunConfig& cfg) {
  if (cfg.dataset) return std::filesystem::path(*cfg.dataset).stem().string();
  return "sbm";
}

inline std::string split_name(double train_fraction) {
  return std::to_string(static_cast<int>(std::lround(train_fraction * 100))) + "Tr";
}

inline void write_text(const std::filesystem::path& p, const std::string& text) {
  std::ofstream os(p, std::ios::binary);
  if (!os) throw std::runtime_error("cannot write " + p.string());
  os << text;
}

struct RunOutcome {
  Metrics metrics;
  TrainReport report;
  int best_epoch = 0;
};

/**
 * @brief Train and evaluate one configuration on an existing split.
 *
 * Reported metrics belong to the best-AUC epoch checkpoint.
 */
inline RunOutcome train_and_evaluate(const RunConfig& cfg, const SplitResult& sp, const EpochCallback& on_epoch = nullptr) {
  const SeedPlan seeds(cfg.root_seed());
  PipelineContext ctx(sp.observed, cfg.features, seeds.features);
  Hyper h = cfg.hyper;
  h.seed = seeds.model;
  ModelParams params = ModelParams::init(ctx.line_feature_width(), h);
  RunOutcome out;
  out.report = train(params, sp.train, sp.test, ctx, on_epoch);
  out.best_epoch = out.report.best_epoch;
  if (out.report.epochs.empty()) {
    const auto scored = score_samples(params, sp.test, ctx);
    out.metrics = {auc(scored), average_precision(scored)};
  } else {
    const auto& best = out.report.epochs[static_cast<std::size_t>(out.best_epoch - 1)];
    out.metrics = {best.test_auc, best.test_ap};
  }
  return out;
}

inline std::string metrics_json(const Metrics& m) {
  return nlohmann::json{{"auc", m.auc}, {"ap", m.ap}}.dump() + "\n";
}

/**
 * @brief Full pipeline run; writes split, feature blocks, per-epoch report,
 *        metrics and checkpoint into cfg.out_dir.
 *
 * On failure a `FAILED` file naming the stage is left behind and the error
 * is rethrown.
 */
inline RunOutcome run_experiment(const RunConfig& cfg, const EpochCallback& on_epoch = nullptr) {
  cfg.validate();
  namespace fs = std::filesystem;
  const fs::path out(cfg.out_dir);
  fs::create_directories(out);
  fs::remove(out / "FAILED");
  std::string stage = "load";
  try {
    const SeedPlan seeds(cfg.root_seed());
    const DirectedGraph g = load_run_graph(cfg);
    stage = "split";
    SplitSpec ss = cfg.split;
    ss.seed = seeds.split;
    const SplitResult sp = split(g, ss);
    save_split((out / "split.json").string(), sp);

    stage = "features";
    PipelineContext ctx(sp.observed, cfg.features, seeds.features);
    if (cfg.features.use_community) {
      save_communities((out / "communities.json").string(), ctx.communities());
      save_feature_matrix((out / "community_onehot.txt").string(), ctx.community_block());
    }
    if (cfg.features.use_embedding) save_feature_matrix((out / "embedding.txt").string(), ctx.embedding_block());

    stage = "train";
    Hyper h = cfg.hyper;
    h.seed = seeds.model;
    ModelParams params = ModelParams::init(ctx.line_feature_width(), h);
    RunOutcome res;
    res.report = train(params, sp.train, sp.test, ctx, on_epoch);
    res.best_epoch = res.report.best_epoch;
    if (res.report.epochs.empty()) {
      const auto scored = score_samples(params, sp.test, ctx);
      res.metrics = {auc(scored), average_precision(scored)};
      res.report.best_params = params;
    } else {
      const auto& best = res.report.epochs[static_cast<std::size_t>(res.best_epoch - 1)];
      res.metrics = {best.test_auc, best.test_ap};
    }

    stage = "write";
    write_text(out / "train_report.csv", train_report_csv(res.report));
    write_text(out / "metrics.json", metrics_json(res.metrics));
    save_checkpoint((out / "checkpoint.json").string(), res.report.best_params);
    return res;
  } catch (const std::exception& e) {
    write_text(out / "FAILED", "stage: " + stage + "\n" + e.what() + "\n");
    throw std::runtime_error("stage '" + stage + "': " + e.what());
  }
}

struct AblationSetting {
  std::string name;
  bool use_path = true, use_community = true, use_embedding = true;
};

/// Parses block strings like "PCE", "P", "PE" (P = path labels, C = communities, E = embedding).
inline AblationSetting ablation_from_string(const std::string& s) {
  AblationSetting a{s, false, false, false};
  for (char ch : s) {
    switch (ch) {
      case 'P': a.use_path = true; break;
      case 'C': a.use_community = true; break;
      case 'E': a.use_embedding = true; break;
      default: throw ConfigError("ablation setting '" + s + "': unknown block '" + std::string(1, ch) + "'");
    }
  }
  if (!a.use_path && !a.use_community && !a.use_embedding) throw ConfigError("ablation setting disables every block");
  return a;
}

struct AblationRow {
  AblationSetting setting;
  Metrics metrics;
  int best_epoch = 0;
};

/// Runs every setting on one shared split; the model seed is the same for each.
inline std::vector<AblationRow> run_ablation(const RunConfig& cfg, const std::vector<AblationSetting>& settings,
                                             const EpochCallback& on_epoch = nullptr) {
  cfg.validate();
  if (settings.empty()) throw ConfigError("ablation: no settings");
  const SeedPlan seeds(cfg.root_seed());
  const DirectedGraph g = load_run_graph(cfg);
  SplitSpec ss = cfg.split;
  ss.seed = seeds.split;
  const SplitResult sp = split(g, ss);
  std::vector<AblationRow> rows;
  for (const auto& s : settings) {
    RunConfig c = cfg;
    c.features.use_path = s.use_path;
    c.features.use_community = s.use_community;
    c.features.use_embedding = s.use_embedding;
    const auto res = train_and_evaluate(c, sp, on_epoch);
    rows.push_back({s, res.metrics, res.best_epoch});
  }
  return rows;
}

inline std::string ablation_csv(const std::vector<AblationRow>& rows, const std::string& dataset, const std::string& split) {
  std::ostringstream os;
  os.precision(17);
  os << "setting,dataset,split,use_path,use_community,use_embedding,auc,ap,best_epoch\n";
  for (const auto& r : rows) {
    os << r.setting.name << ',' << dataset << ',' << split << ',' << r.setting.use_path << ','
       << r.setting.use_community << ',' << r.setting.use_embedding << ',' << r.metrics.auc << ',' << r.metrics.ap
       << ',' << r.best_epoch << '\n';
  }
  return os.str();
}

struct BaselineRow {
  std::string method;
  Metrics metrics;
};

inline std::vector<BaselineRow> run_baselines(const DirectedGraph& observed, const std::vector<LabeledPair>& test,
                                              const HeuristicParams& prm = {}) {
  std::vector<BaselineRow> rows;
  for (HeuristicIndex h : kAllHeuristics) {
    const auto scores = heuristic_scores(observed, h, test, prm);
    std::vector<ScoredPair> sp;
    sp.reserve(test.size());
    for (std::size_t i = 0; i < test.size(); ++i) sp.push_back({test[i].src, test[i].dst, scores[i], test[i].label});
    rows.push_back({std::string(name_of(h)), {auc(sp), average_precision(sp)}});
  }
  return rows;
}

inline std::string baselines_csv(const std::vector<BaselineRow>& rows, const std::string& dataset, const std::string& split) {
  std::ostringstream os;
  os.precision(17);
  os << "method,dataset,split,auc,ap\n";
  for (const auto& r : rows) os << r.method << ',' << dataset << ',' << split << ',' << r.metrics.auc << ',' << r.metrics.ap << '\n';
  return os.str();
}

}  // namespace ffd
