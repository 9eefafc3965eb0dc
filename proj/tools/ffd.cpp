// Command-line front end: ffd <run|theorem|baselines|ablate|split|embed|communities>
//
// Settings come from built-in defaults, then --config <json>, then flags.
// Exit codes: 0 success, 2 configuration error, 3 runtime error.

#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "ffd/community.hpp"
#include "ffd/embedding.hpp"
#include "ffd/experiment.hpp"
#include "ffd/sbm.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitRuntime = 3;

struct CommonFlags {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::string dataset;
  std::optional<double> train_fraction;
};

void add_common(CLI::App* cmd, CommonFlags& f) {
  cmd->add_option("--config", f.config, "JSON config file");
  cmd->add_option("--seed", f.seed, "root seed (overrides config)");
  cmd->add_option("--out", f.out, "output directory (overrides config)");
  cmd->add_option("--dataset", f.dataset, "edge-list file (overrides config)");
  cmd->add_option("--train-fraction", f.train_fraction, "fraction of edges used as train positives");
}

ffd::RunConfig resolve(const CommonFlags& f) {
  ffd::RunConfig cfg = f.config.empty() ? ffd::config_from_json(json::object()) : ffd::load_config(f.config);
  if (f.seed) cfg.seed = *f.seed;
  if (!f.out.empty()) cfg.out_dir = f.out;
  if (!f.dataset.empty()) {
    cfg.dataset = f.dataset;
    cfg.sbm.reset();
  }
  if (f.train_fraction) cfg.split.train_fraction = *f.train_fraction;
  return cfg;
}

void log_epoch(const ffd::EpochRecord& r) {
  std::cerr << "epoch " << r.epoch << "  loss " << r.mean_loss << "  auc " << r.test_auc << "  ap " << r.test_ap
            << '\n';
}

int cmd_run(const CommonFlags& f, bool quiet) {
  const auto cfg = resolve(f);
  const auto res = ffd::run_experiment(cfg, quiet ? ffd::EpochCallback{} : ffd::EpochCallback{log_epoch});
  std::cout << ffd::metrics_json(res.metrics);
  return 0;
}

int cmd_theorem(const CommonFlags& f) {
  const auto cfg = resolve(f);
  cfg.root_seed();
  const json t = cfg.raw.value("theorem", json::object());
  ffd::SbmSpec spec;
  spec.K = t.value("K", 4);
  spec.p = t.value("p", 0.2);
  spec.q = t.value("q", 0.02);
  ffd::PredictorModel m;
  m.e_linked = t.value("e_linked", 0.6);
  m.e_unlinked = t.value("e_unlinked", 0.6);
  m.eps0 = t.value("eps0", 0.0);
  m.eps1 = t.value("eps1", 0.0);
  m.w_nc = t.value("w_nc", 0.5);
  m.w_c = t.value("w_c", 0.5);
  const auto trials = t.value("trials", std::size_t{100000});
  const auto grid_K = t.value("grid_K", std::vector<int>{2, 5, 10, 15, 20});
  const int resolution = t.value("grid_resolution", 19);

  const auto report = ffd::monte_carlo_theorem(spec, m, trials, ffd::derive_seed(*cfg.seed, "theorem"));
  json mono = json::array();
  std::size_t violations = 0;
  for (int K : grid_K) {
    const auto r = ffd::g_monotonicity_check(K, resolution);
    violations += r.violations.size();
    mono.push_back({{"K", K},
                    {"points", r.points},
                    {"violations", r.violations.size()},
                    {"min_dg_dp", r.min_dg_dp},
                    {"max_dg_dq", r.max_dg_dq}});
  }
  json doc = ffd::to_json(report);
  doc["spec"] = {{"K", spec.K}, {"p", spec.p}, {"q", spec.q}};
  doc["monotonicity"] = mono;

  const fs::path out(cfg.out_dir);
  fs::create_directories(out);
  ffd::write_text(out / "theorem.json", doc.dump(2) + "\n");
  ffd::write_text(out / "g_surface.csv", ffd::g_surface_csv(grid_K, resolution));
  std::cout << doc.dump(2) << '\n';
  return (violations == 0 && report.mc_consistent) ? 0 : kExitRuntime;
}

int cmd_baselines(const CommonFlags& f) {
  auto cfg = resolve(f);
  cfg.validate();
  const ffd::SeedPlan seeds(cfg.root_seed());
  const auto g = ffd::load_run_graph(cfg);
  ffd::SplitSpec ss = cfg.split;
  ss.seed = seeds.split;
  const auto sp = ffd::split(g, ss);
  ffd::HeuristicParams prm;
  const json b = cfg.raw.value("baselines", json::object());
  prm.katz_beta = b.value("katz_beta", prm.katz_beta);
  prm.lp_beta = b.value("lp_beta", prm.lp_beta);
  const auto rows = ffd::run_baselines(sp.observed, sp.test, prm);
  const auto csv = ffd::baselines_csv(rows, ffd::dataset_name(cfg), ffd::split_name(cfg.split.train_fraction));
  fs::create_directories(cfg.out_dir);
  ffd::write_text(fs::path(cfg.out_dir) / "baselines.csv", csv);
  std::cout << csv;
  return 0;
}

int cmd_ablate(const CommonFlags& f, const std::vector<std::string>& settings_flag, bool quiet) {
  const auto cfg = resolve(f);
  std::vector<std::string> names = settings_flag;
  if (names.empty()) names = cfg.raw.value("ablate", std::vector<std::string>{"P", "PC", "PE", "PCE"});
  std::vector<ffd::AblationSetting> settings;
  for (const auto& n : names) settings.push_back(ffd::ablation_from_string(n));
  const auto rows = ffd::run_ablation(cfg, settings, quiet ? ffd::EpochCallback{} : ffd::EpochCallback{log_epoch});
  const auto csv = ffd::ablation_csv(rows, ffd::dataset_name(cfg), ffd::split_name(cfg.split.train_fraction));
  fs::create_directories(cfg.out_dir);
  ffd::write_text(fs::path(cfg.out_dir) / "ablation.csv", csv);
  std::cout << csv;
  return 0;
}

int cmd_split(const CommonFlags& f) {
  auto cfg = resolve(f);
  cfg.validate();
  const ffd::SeedPlan seeds(cfg.root_seed());
  const auto g = ffd::load_run_graph(cfg);
  ffd::SplitSpec ss = cfg.split;
  ss.seed = seeds.split;
  const auto sp = ffd::split(g, ss);
  fs::create_directories(cfg.out_dir);
  ffd::save_split((fs::path(cfg.out_dir) / "split.json").string(), sp);
  std::cout << "train " << sp.train.size() << " test " << sp.test.size() << '\n';
  return 0;
}

/// Loads the dataset (or SBM), writing an id map next to the outputs when ids were relabeled.
ffd::DirectedGraph load_for_features(const ffd::RunConfig& cfg) {
  if (!cfg.dataset) return ffd::load_run_graph(cfg);
  auto loaded = ffd::load_edge_list(*cfg.dataset);
  if (loaded.dropped.self_loops || loaded.dropped.duplicates) {
    std::cerr << "dropped " << loaded.dropped.self_loops << " self-loops and " << loaded.dropped.duplicates
              << " duplicate edges\n";
  }
  if (loaded.relabeled) ffd::save_id_map((fs::path(cfg.out_dir) / "id_map.tsv").string(), loaded.original_id);
  return loaded.graph;
}

int cmd_embed(const CommonFlags& f, std::optional<int> dim) {
  auto cfg = resolve(f);
  cfg.validate();
  fs::create_directories(cfg.out_dir);
  const auto g = load_for_features(cfg);
  const auto m = ffd::embed_nodes(g, dim.value_or(cfg.features.embed_dim), ffd::SeedPlan(cfg.root_seed()).features);
  ffd::save_feature_matrix((fs::path(cfg.out_dir) / "embedding.txt").string(), m);
  std::cout << "embedding " << m.rows() << " x " << m.cols() << '\n';
  return 0;
}

int cmd_communities(const CommonFlags& f) {
  auto cfg = resolve(f);
  cfg.validate();
  fs::create_directories(cfg.out_dir);
  const auto g = load_for_features(cfg);
  const auto a = ffd::detect_communities(g);
  ffd::save_communities((fs::path(cfg.out_dir) / "communities.json").string(), a);
  std::cout << "communities " << a.num_communities << " modularity " << a.modularity << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Feature-fused directed line-graph link prediction"};
  app.require_subcommand(1);
  bool quiet = false;
  app.add_flag("-q,--quiet", quiet, "suppress per-epoch progress");

  CommonFlags run_f, thm_f, base_f, abl_f, split_f, emb_f, com_f;
  auto* run = app.add_subcommand("run", "train and evaluate the full pipeline");
  add_common(run, run_f);
  auto* thm = app.add_subcommand("theorem", "closed-form, monotonicity and Monte Carlo checks on blockmodels");
  add_common(thm, thm_f);
  auto* base = app.add_subcommand("baselines", "score the test split with classical similarity indices");
  add_common(base, base_f);
  auto* abl = app.add_subcommand("ablate", "train with feature blocks toggled");
  add_common(abl, abl_f);
  std::vector<std::string> settings;
  abl->add_option("--settings", settings, "block sets such as P PC PE PCE");
  auto* spl = app.add_subcommand("split", "write the train/test split");
  add_common(spl, split_f);
  auto* emb = app.add_subcommand("embed", "write the spectral node embedding");
  add_common(emb, emb_f);
  std::optional<int> dim;
  emb->add_option("--dim", dim, "embedding width");
  auto* com = app.add_subcommand("communities", "write greedy-modularity communities");
  add_common(com, com_f);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitConfig;
  }

  try {
    if (run->parsed()) return cmd_run(run_f, quiet);
    if (thm->parsed()) return cmd_theorem(thm_f);
    if (base->parsed()) return cmd_baselines(base_f);
    if (abl->parsed()) return cmd_ablate(abl_f, settings, quiet);
    if (spl->parsed()) return cmd_split(split_f);
    if (emb->parsed()) return cmd_embed(emb_f, dim);
    if (com->parsed()) return cmd_communities(com_f);
  } catch (const ffd::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
  return kExitConfig;
}
