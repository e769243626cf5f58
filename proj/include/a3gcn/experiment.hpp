#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "a3gcn/config.hpp"
#include "a3gcn/dataset.hpp"
#include "a3gcn/ensemble.hpp"

namespace a3gcn {

struct ExperimentResult {
  ExperimentConfig config;  // effective config
  std::vector<TrialResult> trials;
  double mean_accuracy = 0.0;
  double std_accuracy = 0.0;  // sample standard deviation (n - 1)
};

/// Seed of trial t, derived from the master seed with the documented 64-bit
/// mix (see Rng::hash2).
std::uint64_t trial_seed(std::uint64_t master_seed, int trial);

/// Loads or generates the dataset for one trial: a bundle is read once and
/// shared; an SBM spec is regenerated per trial from the trial seed; the
/// optional per_class / q_noise transforms are applied per trial.
Dataset resolve_trial_dataset(const ExperimentConfig& config, const Dataset* bundle,
                              std::uint64_t seed);

/// Loads the bundle named by the config (with optional feature row
/// normalization). Returns an empty optional for SBM configs.
std::optional<Dataset> load_config_bundle(const ExperimentConfig& config);

/// Runs config.trials trials (optionally on `jobs` worker threads), writes
/// one per-epoch CSV per trial plus summary.json under out_dir, and returns
/// the in-memory results. Re-running with the same config and master seed
/// reproduces all output files byte for byte.
ExperimentResult run_experiment(const ExperimentConfig& config,
                                const std::filesystem::path& out_dir, int jobs = 1);

struct SweepRow {
  int k = 0;
  double alpha = 0.0;
  double p_drop = 0.0;
  int per_class = 0;
  double q = -1.0;
  double mean_accuracy = 0.0;
  double std_accuracy = 0.0;
};

struct SweepResult {
  ExperimentConfig base_config;
  std::vector<SweepRow> rows;
};

/// Cartesian product over the sweep axes; each grid point runs a full
/// experiment into out_dir/point_NNN and contributes one summary row to
/// out_dir/sweep_summary.csv.
SweepResult run_sweep(const ExperimentConfig& config,
                      const std::filesystem::path& out_dir, int jobs = 1);

/// Per-epoch figure data averaged over trials. Supported ids:
///   correctness  - epoch vs mean pseudo-label correctness ratio
///   accuracy     - epoch vs individual mean/std and consensus accuracy
///   threshold    - epoch vs mean confidence threshold
/// Throws std::invalid_argument for unknown ids or missing metrics.
void emit_figure_data(const ExperimentResult& result, const std::string& figure,
                      const std::filesystem::path& csv_path);

/// Grid figure data from a sweep (ids: sensitivity, noise). The noise figure
/// requires a q axis in the sweep.
void emit_sweep_figure(const SweepResult& result, const std::string& figure,
                       const std::filesystem::path& csv_path);

/// Formats a double with shortest round-trip precision (shared by all
/// metric writers so outputs stay byte-stable).
std::string format_metric(double v);

}  // namespace a3gcn
