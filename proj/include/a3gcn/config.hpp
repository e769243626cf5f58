#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "a3gcn/dataset.hpp"

namespace a3gcn {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class Variant {
  BaselineGcn,
  A3,
  Conservative,
  AblationFixedTheta,
  AblationAdaptiveThetaOnly,
  AblationAdaptiveSamplingOnly,
  NoEnsemble,
};

const char* variant_name(Variant v);
Variant variant_from_name(const std::string& name);

/// Which parts of the training loop a variant enables.
struct VariantSwitches {
  bool pseudo_labels = true;     // pseudo-label machinery at all
  bool adaptive_theta = true;    // threshold follows the agreement signal
  bool adaptive_sampling = true; // subset ratio = agreement (else 1)
  bool conservative = false;     // consensus set restricted to all-model high-confidence
};

/// Grid axes for parameter sweeps. Empty vectors mean "not swept".
struct SweepSpec {
  std::vector<int> k;
  std::vector<double> alpha;
  std::vector<double> p_drop;
  std::vector<int> per_class;
  std::vector<double> q;

  bool empty() const {
    return k.empty() && alpha.empty() && p_drop.empty() && per_class.empty() && q.empty();
  }
};

struct ExperimentConfig {
  // Exactly one of bundle_path / sbm identifies the dataset.
  std::string bundle_path;
  std::optional<SbmParams> sbm;

  Variant variant = Variant::A3;
  int k = 10;
  double alpha = 0.1;
  double beta = 1.0;
  double p_drop = 0.2;
  double theta_init = 0.95;
  double theta_min = 0.5;
  double theta_max = 0.99;
  double fixed_theta = 0.99;  // threshold for the fixed-theta ablations
  int max_epochs = 200;
  int hidden_dim = 16;
  double dropout = 0.5;
  double lr = 0.01;
  double weight_decay = 5e-4;
  int trials = 10;
  std::uint64_t master_seed = 1;
  bool input_dropout = true;
  bool label_aware_agreement = false;
  bool select_best_val = false;
  bool row_normalize_features = false;
  int per_class = 0;      // 0 keeps the dataset's own training split
  double q_noise = -1.0;  // negative disables noisy-edge injection
  SweepSpec sweep;

  VariantSwitches switches() const;

  /// Initial threshold the variant actually starts from (fixed-theta
  /// ablations pin it to fixed_theta).
  double effective_theta_init() const;

  /// Throws ConfigError with the offending field named.
  void validate() const;

  static ExperimentConfig from_json(const nlohmann::json& j);
  static ExperimentConfig from_file(const std::filesystem::path& path);

  /// Full effective config, every field present.
  nlohmann::ordered_json to_json() const;
};

/// Parses an SBM spec object ({"num_nodes": ..., "p_intra": ..., ...}).
/// Unknown keys are rejected.
SbmParams sbm_params_from_json(const nlohmann::json& j);

}  // namespace a3gcn
