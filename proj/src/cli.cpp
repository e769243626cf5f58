#include "a3gcn/cli.hpp"

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "a3gcn/experiment.hpp"

namespace a3gcn {

namespace {

using nlohmann::json;

json load_json_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  json j = json::parse(ss.str(), nullptr, false);
  if (j.is_discarded()) throw ConfigError("malformed JSON: " + path);
  return j;
}

// Applies --set key=value overrides onto the raw config document. Values are
// parsed as JSON when possible so numbers and booleans come out typed;
// anything else is taken as a string.
void apply_overrides(json& doc, const std::vector<std::string>& sets) {
  for (const std::string& kv : sets) {
    const std::size_t eq = kv.find('=');
    if (eq == std::string::npos)
      throw ConfigError("--set expects key=value, got '" + kv + "'");
    const std::string key = kv.substr(0, eq);
    const std::string raw = kv.substr(eq + 1);
    json value = json::parse(raw, nullptr, false);
    if (value.is_discarded()) value = raw;
    doc[key] = value;
  }
}

ExperimentConfig config_from_cli(const std::string& path,
                                 const std::vector<std::string>& sets,
                                 const std::optional<std::uint64_t>& seed) {
  json doc = load_json_file(path);
  apply_overrides(doc, sets);
  if (seed) doc["master_seed"] = *seed;
  return ExperimentConfig::from_json(doc);
}

void emit_requested_figures(const ExperimentResult& result,
                            const std::vector<std::string>& figures,
                            const std::filesystem::path& out_dir) {
  for (const std::string& fig : figures)
    emit_figure_data(result, fig, out_dir / ("figure_" + fig + ".csv"));
}

int cmd_validate(const std::string& bundle) {
  const Dataset d = load_bundle(bundle);
  std::cout << "nodes=" << d.num_nodes << " edges=" << d.edges.size()
            << " features=" << d.feature_dim() << " classes=" << d.num_classes
            << " train=" << d.train_mask.size() << " val=" << d.val_mask.size()
            << " test=" << d.test_mask.size() << "\n";
  return 0;
}

int cmd_export_embeddings(const ExperimentConfig& config, int epoch,
                          const std::string& out_path) {
  if (epoch < 1 || epoch > config.max_epochs)
    throw ConfigError("export epoch out of range [1, max_epochs]");
  ExperimentConfig cfg = config;
  cfg.max_epochs = epoch;  // run exactly up to the exporting epoch

  const std::optional<Dataset> bundle = load_config_bundle(cfg);
  const std::uint64_t seed = trial_seed(cfg.master_seed, 0);
  const Dataset dataset = resolve_trial_dataset(cfg, bundle ? &*bundle : nullptr, seed);
  const SparseFeatures x = SparseFeatures::from_dense(dataset.features);

  const EpochObserver observer = [&](int e, const EnsembleState& state,
                                     const EpochMetrics&) {
    if (e != epoch) return;
    const DenseMatrix h = state.consensus_model.hidden_embeddings(state.original, x);
    EmbeddingFlags flags;
    flags.high_confidence.assign(dataset.num_nodes, 0);
    flags.agreed.assign(dataset.num_nodes, 0);
    for (int u : state.last_high_conf_union) flags.high_confidence[u] = 1;
    for (int u : state.last_consensus.nodes) flags.agreed[u] = 1;
    export_embeddings(h, dataset.labels, flags, out_path);
  };
  run_trial(cfg, dataset, seed, observer);
  std::cout << "wrote " << out_path << "\n";
  return 0;
}

}  // namespace

int run_cli(int argc, const char* const* argv) {
  CLI::App app{"ensemble GCN trainer for semi-supervised node classification"};
  app.require_subcommand(1);

  std::string config_path, out_dir = "out";
  std::vector<std::string> sets, figures;
  std::optional<std::uint64_t> seed;
  int jobs = 1;

  const auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("config", config_path, "experiment config JSON")->required();
    cmd->add_option("--out", out_dir, "output directory");
    cmd->add_option("--set", sets, "override a config field (key=value, repeatable)");
    cmd->add_option("--seed", seed, "override master_seed");
    cmd->add_option("--jobs", jobs, "worker threads for trials")
        ->check(CLI::PositiveNumber);
  };

  CLI::App* run_cmd = app.add_subcommand("run", "run one experiment");
  add_common(run_cmd);
  run_cmd->add_option("--figures", figures,
                      "per-epoch figure CSVs to emit (correctness, accuracy, threshold)");

  CLI::App* sweep_cmd = app.add_subcommand("sweep", "run a parameter grid");
  add_common(sweep_cmd);
  sweep_cmd->add_option("--figures", figures, "sweep figure CSVs (sensitivity, noise)");

  std::string sbm_spec_path, gen_out;
  std::uint64_t gen_seed = 1;
  CLI::App* gen_cmd = app.add_subcommand("gen-sbm", "generate a planted-partition bundle");
  gen_cmd->add_option("spec", sbm_spec_path, "SBM spec JSON")->required();
  gen_cmd->add_option("out_dir", gen_out, "bundle output directory")->required();
  gen_cmd->add_option("--seed", gen_seed, "generator seed");

  std::string noise_bundle, noise_out;
  double noise_q = 0.0;
  std::uint64_t noise_seed = 1;
  CLI::App* noise_cmd =
      app.add_subcommand("inject-noise", "rebuild a bundle with synthetic cross-class edges");
  noise_cmd->add_option("bundle", noise_bundle, "input bundle directory")->required();
  noise_cmd->add_option("q", noise_q, "cross-class edges as a ratio of clean edges")
      ->required()
      ->check(CLI::NonNegativeNumber);
  noise_cmd->add_option("out_dir", noise_out, "bundle output directory")->required();
  noise_cmd->add_option("--seed", noise_seed, "sampling seed");

  std::string export_config, export_out;
  int export_epoch = 0;
  CLI::App* export_cmd = app.add_subcommand(
      "export-embeddings", "write consensus hidden embeddings at a given epoch");
  export_cmd->add_option("config", export_config, "experiment config JSON")->required();
  export_cmd->add_option("epoch", export_epoch, "epoch to export")->required();
  export_cmd->add_option("out", export_out, "output CSV path")->required();
  export_cmd->add_option("--set", sets, "override a config field (key=value, repeatable)");
  export_cmd->add_option("--seed", seed, "override master_seed");

  std::string validate_bundle;
  CLI::App* validate_cmd = app.add_subcommand("validate", "check a bundle and print its shape");
  validate_cmd->add_option("bundle", validate_bundle, "bundle directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (run_cmd->parsed()) {
      const ExperimentConfig config = config_from_cli(config_path, sets, seed);
      const ExperimentResult result = run_experiment(config, out_dir, jobs);
      emit_requested_figures(result, figures, out_dir);
      std::cout << "mean_test_accuracy=" << format_metric(result.mean_accuracy)
                << " std=" << format_metric(result.std_accuracy) << " trials="
                << result.trials.size() << "\n";
      return 0;
    }
    if (sweep_cmd->parsed()) {
      const ExperimentConfig config = config_from_cli(config_path, sets, seed);
      const SweepResult result = run_sweep(config, out_dir, jobs);
      for (const std::string& fig : figures)
        emit_sweep_figure(result, fig, std::filesystem::path(out_dir) /
                                           ("figure_" + fig + ".csv"));
      std::cout << "grid_points=" << result.rows.size() << "\n";
      return 0;
    }
    if (gen_cmd->parsed()) {
      const SbmParams params = sbm_params_from_json(load_json_file(sbm_spec_path));
      Rng rng(gen_seed);
      const Dataset d = generate_sbm(params, rng);
      write_bundle(d, gen_out);
      std::cout << "wrote bundle: nodes=" << d.num_nodes << " edges=" << d.edges.size()
                << " classes=" << d.num_classes << "\n";
      return 0;
    }
    if (noise_cmd->parsed()) {
      const Dataset d = load_bundle(noise_bundle);
      Rng rng(noise_seed);
      const Dataset noisy = inject_noisy_edges(d, noise_q, rng);
      write_bundle(noisy, noise_out);
      std::cout << "wrote bundle: edges=" << noisy.edges.size() << "\n";
      return 0;
    }
    if (export_cmd->parsed()) {
      const ExperimentConfig config = config_from_cli(export_config, sets, seed);
      return cmd_export_embeddings(config, export_epoch, export_out);
    }
    if (validate_cmd->parsed()) return cmd_validate(validate_bundle);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

}  // namespace a3gcn
