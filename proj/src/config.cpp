#include "a3gcn/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

namespace a3gcn {

using nlohmann::json;
using nlohmann::ordered_json;

const char* variant_name(Variant v) {
  switch (v) {
    case Variant::BaselineGcn: return "baseline-gcn";
    case Variant::A3: return "a3";
    case Variant::Conservative: return "conservative";
    case Variant::AblationFixedTheta: return "ablation-fixed-theta";
    case Variant::AblationAdaptiveThetaOnly: return "ablation-adaptive-theta-only";
    case Variant::AblationAdaptiveSamplingOnly: return "ablation-adaptive-sampling-only";
    case Variant::NoEnsemble: return "no-ensemble";
  }
  return "?";
}

Variant variant_from_name(const std::string& name) {
  for (Variant v : {Variant::BaselineGcn, Variant::A3, Variant::Conservative,
                    Variant::AblationFixedTheta, Variant::AblationAdaptiveThetaOnly,
                    Variant::AblationAdaptiveSamplingOnly, Variant::NoEnsemble}) {
    if (name == variant_name(v)) return v;
  }
  throw ConfigError("unknown variant '" + name + "'");
}

VariantSwitches ExperimentConfig::switches() const {
  switch (variant) {
    case Variant::BaselineGcn:
    case Variant::NoEnsemble:
      return {.pseudo_labels = false, .adaptive_theta = false,
              .adaptive_sampling = false, .conservative = false};
    case Variant::A3:
      return {.pseudo_labels = true, .adaptive_theta = true,
              .adaptive_sampling = true, .conservative = false};
    case Variant::Conservative:
      return {.pseudo_labels = true, .adaptive_theta = true,
              .adaptive_sampling = true, .conservative = true};
    case Variant::AblationFixedTheta:
      return {.pseudo_labels = true, .adaptive_theta = false,
              .adaptive_sampling = false, .conservative = false};
    case Variant::AblationAdaptiveThetaOnly:
      return {.pseudo_labels = true, .adaptive_theta = true,
              .adaptive_sampling = false, .conservative = false};
    case Variant::AblationAdaptiveSamplingOnly:
      return {.pseudo_labels = true, .adaptive_theta = false,
              .adaptive_sampling = true, .conservative = false};
  }
  return {};
}

double ExperimentConfig::effective_theta_init() const {
  if (variant == Variant::AblationFixedTheta ||
      variant == Variant::AblationAdaptiveSamplingOnly)
    return fixed_theta;
  return theta_init;
}

void ExperimentConfig::validate() const {
  const auto fail = [](const std::string& field, const std::string& why) {
    throw ConfigError("config field '" + field + "': " + why);
  };
  if (bundle_path.empty() == !sbm.has_value())
    fail("dataset", "exactly one of a bundle path or an sbm spec is required");
  if (k < 1) fail("k", "must be >= 1");
  if (alpha < 0.0) fail("alpha", "must be >= 0");
  if (beta <= 0.0 || beta > 1.0) fail("beta", "must be in (0, 1]");
  if (p_drop < 0.0 || p_drop > 1.0) fail("p_drop", "must be in [0, 1]");
  if (dropout < 0.0 || dropout >= 1.0) fail("dropout", "must be in [0, 1)");
  if (theta_min <= 0.0 || theta_min > theta_max || theta_max > 1.0)
    fail("theta_min/theta_max", "need 0 < theta_min <= theta_max <= 1");
  if (theta_init < theta_min || theta_init > theta_max)
    fail("theta_init", "must lie in [theta_min, theta_max]");
  if (fixed_theta < theta_min || fixed_theta > theta_max)
    fail("fixed_theta", "must lie in [theta_min, theta_max]");
  if (max_epochs < 1) fail("max_epochs", "must be >= 1");
  if (hidden_dim < 1) fail("hidden_dim", "must be >= 1");
  if (lr <= 0.0) fail("lr", "must be > 0");
  if (weight_decay < 0.0) fail("weight_decay", "must be >= 0");
  if (trials < 1) fail("trials", "must be >= 1");
  if (per_class < 0) fail("per_class", "must be >= 1 (or 0 to keep the split)");

  const bool single_model =
      variant == Variant::BaselineGcn || variant == Variant::NoEnsemble;
  if (single_model) {
    if (k != 1) fail("k", std::string("variant '") + variant_name(variant) + "' requires k = 1");
    if (alpha != 0.0)
      fail("alpha", std::string("variant '") + variant_name(variant) + "' requires alpha = 0");
    if (p_drop != 0.0)
      fail("p_drop", std::string("variant '") + variant_name(variant) + "' requires p_drop = 0");
  }
  if (sbm) {
    if (sbm->p_intra < 0.0 || sbm->p_intra > 1.0 || sbm->p_inter < 0.0 || sbm->p_inter > 1.0)
      fail("sbm", "probabilities must be in [0, 1]");
    if (sbm->num_nodes <= 0 || sbm->num_classes <= 0) fail("sbm", "non-positive shape");
    if (sbm->feature_dim < sbm->num_classes) fail("sbm", "feature_dim must be >= num_classes");
  }
}

SbmParams sbm_params_from_json(const json& j) {
  static const std::set<std::string> known = {"num_nodes",   "num_classes", "p_intra",
                                              "p_inter",     "feature_dim", "feature_noise"};
  for (const auto& [key, _] : j.items())
    if (!known.count(key)) throw ConfigError("unknown sbm field '" + key + "'");
  SbmParams p;
  p.num_nodes = j.value("num_nodes", p.num_nodes);
  p.num_classes = j.value("num_classes", p.num_classes);
  p.p_intra = j.value("p_intra", p.p_intra);
  p.p_inter = j.value("p_inter", p.p_inter);
  p.feature_dim = j.value("feature_dim", p.num_classes);
  p.feature_noise = j.value("feature_noise", p.feature_noise);
  return p;
}

namespace {

template <typename T>
std::vector<T> axis_from_json(const json& j, const char* axis) {
  if (!j.is_array()) throw ConfigError(std::string("sweep axis '") + axis + "' must be an array");
  std::vector<T> values;
  for (const auto& v : j) values.push_back(v.get<T>());
  if (values.empty()) throw ConfigError(std::string("sweep axis '") + axis + "' is empty");
  return values;
}

}  // namespace

ExperimentConfig ExperimentConfig::from_json(const json& j) {
  static const std::set<std::string> known = {
      "dataset",       "variant",     "k",
      "alpha",         "beta",        "p_drop",
      "theta_init",    "theta_min",   "theta_max",
      "fixed_theta",   "max_epochs",  "hidden_dim",
      "dropout",       "lr",          "weight_decay",
      "trials",        "master_seed", "input_dropout",
      "label_aware_agreement",        "select_best_val",
      "row_normalize_features",       "per_class",
      "q_noise",       "sweep"};
  for (const auto& [key, _] : j.items())
    if (!known.count(key)) throw ConfigError("unknown config field '" + key + "'");

  ExperimentConfig c;
  try {
    if (j.contains("dataset")) {
      const json& d = j.at("dataset");
      if (d.is_string()) {
        c.bundle_path = d.get<std::string>();
      } else if (d.is_object() && d.contains("sbm")) {
        c.sbm = sbm_params_from_json(d.at("sbm"));
      } else {
        throw ConfigError("config field 'dataset': expected a path or {\"sbm\": {...}}");
      }
    }
    if (j.contains("variant")) c.variant = variant_from_name(j.at("variant").get<std::string>());

    const bool single_model =
        c.variant == Variant::BaselineGcn || c.variant == Variant::NoEnsemble;
    if (single_model) {
      // baseline variants force the degenerate settings unless overridden
      // (and validate() rejects contradicting overrides)
      c.k = 1;
      c.alpha = 0.0;
      c.p_drop = 0.0;
    }

    c.k = j.value("k", c.k);
    c.alpha = j.value("alpha", c.alpha);
    c.beta = j.value("beta", c.beta);
    c.p_drop = j.value("p_drop", c.p_drop);
    c.theta_init = j.value("theta_init", c.theta_init);
    c.theta_min = j.value("theta_min", c.theta_min);
    c.theta_max = j.value("theta_max", c.theta_max);
    c.fixed_theta = j.value("fixed_theta", c.fixed_theta);
    c.max_epochs = j.value("max_epochs", c.max_epochs);
    c.hidden_dim = j.value("hidden_dim", c.hidden_dim);
    c.dropout = j.value("dropout", c.dropout);
    c.lr = j.value("lr", c.lr);
    c.weight_decay = j.value("weight_decay", c.weight_decay);
    c.trials = j.value("trials", c.trials);
    c.master_seed = j.value("master_seed", c.master_seed);
    c.input_dropout = j.value("input_dropout", c.input_dropout);
    c.label_aware_agreement = j.value("label_aware_agreement", c.label_aware_agreement);
    c.select_best_val = j.value("select_best_val", c.select_best_val);
    c.row_normalize_features = j.value("row_normalize_features", c.row_normalize_features);
    c.per_class = j.value("per_class", c.per_class);
    c.q_noise = j.value("q_noise", c.q_noise);

    if (j.contains("sweep")) {
      const json& s = j.at("sweep");
      static const std::set<std::string> axes = {"k", "alpha", "p_drop", "per_class", "q"};
      for (const auto& [key, _] : s.items())
        if (!axes.count(key)) throw ConfigError("unknown sweep axis '" + key + "'");
      if (s.contains("k")) c.sweep.k = axis_from_json<int>(s.at("k"), "k");
      if (s.contains("alpha")) c.sweep.alpha = axis_from_json<double>(s.at("alpha"), "alpha");
      if (s.contains("p_drop")) c.sweep.p_drop = axis_from_json<double>(s.at("p_drop"), "p_drop");
      if (s.contains("per_class"))
        c.sweep.per_class = axis_from_json<int>(s.at("per_class"), "per_class");
      if (s.contains("q")) c.sweep.q = axis_from_json<double>(s.at("q"), "q");
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config parse error: ") + e.what());
  }

  c.validate();
  return c;
}

ExperimentConfig ExperimentConfig::from_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open config file: " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  json j = json::parse(ss.str(), nullptr, false);
  if (j.is_discarded()) throw ConfigError("malformed JSON in config file: " + path.string());
  return from_json(j);
}

ordered_json ExperimentConfig::to_json() const {
  ordered_json j;
  if (sbm) {
    ordered_json s;
    s["num_nodes"] = sbm->num_nodes;
    s["num_classes"] = sbm->num_classes;
    s["p_intra"] = sbm->p_intra;
    s["p_inter"] = sbm->p_inter;
    s["feature_dim"] = sbm->feature_dim;
    s["feature_noise"] = sbm->feature_noise;
    j["dataset"] = ordered_json{{"sbm", s}};
  } else {
    j["dataset"] = bundle_path;
  }
  j["variant"] = variant_name(variant);
  j["k"] = k;
  j["alpha"] = alpha;
  j["beta"] = beta;
  j["p_drop"] = p_drop;
  j["theta_init"] = theta_init;
  j["theta_min"] = theta_min;
  j["theta_max"] = theta_max;
  j["fixed_theta"] = fixed_theta;
  j["max_epochs"] = max_epochs;
  j["hidden_dim"] = hidden_dim;
  j["dropout"] = dropout;
  j["lr"] = lr;
  j["weight_decay"] = weight_decay;
  j["trials"] = trials;
  j["master_seed"] = master_seed;
  j["input_dropout"] = input_dropout;
  j["label_aware_agreement"] = label_aware_agreement;
  j["select_best_val"] = select_best_val;
  j["row_normalize_features"] = row_normalize_features;
  j["per_class"] = per_class;
  j["q_noise"] = q_noise;
  ordered_json sweep_json = ordered_json::object();
  if (!sweep.k.empty()) sweep_json["k"] = sweep.k;
  if (!sweep.alpha.empty()) sweep_json["alpha"] = sweep.alpha;
  if (!sweep.p_drop.empty()) sweep_json["p_drop"] = sweep.p_drop;
  if (!sweep.per_class.empty()) sweep_json["per_class"] = sweep.per_class;
  if (!sweep.q.empty()) sweep_json["q"] = sweep.q;
  j["sweep"] = sweep_json;
  return j;
}

}  // namespace a3gcn
