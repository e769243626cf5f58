#pragma once

#include <functional>
#include <vector>

#include "a3gcn/config.hpp"
#include "a3gcn/dataset.hpp"
#include "a3gcn/gcn.hpp"
#include "a3gcn/graph.hpp"
#include "a3gcn/rng.hpp"

namespace a3gcn {

/// One model's high-confidence pseudo-label candidates: unlabeled nodes whose
/// top softmax probability meets the threshold, with their argmax labels.
/// Nodes are ascending; labels are parallel.
struct HighConfidence {
  std::vector<int> nodes;
  std::vector<int> labels;

  std::size_t size() const { return nodes.size(); }
};

HighConfidence high_confidence_set(const Prediction& pred, double theta_conf,
                                   const std::vector<std::uint8_t>& is_labeled);

/// The k per-model sets plus their intersection and union. With
/// label_aware_intersection the intersection additionally requires all models
/// to predict the same label; the union stays membership-only.
struct PseudoLabelSets {
  std::vector<HighConfidence> per_model;
  std::vector<int> intersection;
  std::vector<int> set_union;
};

PseudoLabelSets build_pseudo_label_sets(std::vector<HighConfidence> sets,
                                        bool label_aware_intersection = false);

/// |intersection| / |union|; defined as 0 for an empty union.
double agreement_ratio(const PseudoLabelSets& sets);

/// theta + alpha * (s_prev - s_curr), clamped to [theta_min, theta_max].
/// Rising agreement lowers the threshold.
double update_threshold(double theta, double alpha, double s_prev, double s_curr,
                        double theta_min, double theta_max);

/// Node ids with the labels to train on (ground truth for labeled nodes,
/// pseudo-labels for the sampled high-confidence nodes).
struct TrainingSet {
  std::vector<int> nodes;
  std::vector<int> labels;
};

/// Labeled set plus a uniform sample (without replacement) of
/// floor(s * |pseudo|) pseudo-labeled nodes.
TrainingSet sample_training_set(const std::vector<int>& labeled_nodes,
                                const std::vector<int>& ground_truth,
                                const HighConfidence& pseudo, double s, Rng& rng);

struct ConsensusSet {
  std::vector<int> nodes;        // ascending
  std::vector<int> labels;       // majority-vote label per node
  std::vector<int> agree_counts; // peak vote count per node

  std::size_t size() const { return nodes.size(); }
};

/// Majority vote over the k predictions. A node joins the set when its peak
/// vote count reaches ceil(beta * k). Vote ties break toward the class with
/// the higher mean softmax probability across models, then the lower class
/// index.
ConsensusSet consensus_vote(const std::vector<Prediction>& preds, double beta);

struct EpochMetrics {
  int epoch = 0;  // 1-based
  double s_agreement = 0.0;
  double theta = 0.0;
  int h_intersect = 0;
  int h_union = 0;
  int v_consensus = 0;
  double consensus_train_loss = 0.0;
  double val_accuracy = 0.0;
  double test_accuracy = 0.0;
  double individual_accuracy_mean = 0.0;
  double individual_accuracy_std = 0.0;
  double pseudo_label_correctness = 0.0;
  std::vector<double> individual_accuracy;  // per model, test mask
};

/// Everything one trial mutates across epochs. Views, models and streams are
/// pre-assigned at init so per-model work could run in any order (or in
/// parallel) without changing results.
struct EnsembleState {
  double theta;
  double theta_min, theta_max;
  double alpha, beta;
  std::vector<double> s_history;
  std::vector<GcnModel> models;
  std::vector<SparseGraph> views;
  GcnModel consensus_model;
  SparseGraph original;
  Rng subset_rng;
  VariantSwitches switches;
  bool label_aware_agreement = false;
  std::vector<std::uint8_t> is_labeled;
  // Snapshots of the latest epoch, for observers (embedding export).
  std::vector<int> last_high_conf_union;
  ConsensusSet last_consensus;
};

EnsembleState init_ensemble(const ExperimentConfig& config, const Dataset& dataset,
                            std::uint64_t seed);

/// One pass of the training loop: predict with every model, form the
/// high-confidence sets and the agreement ratio, train each model on its
/// sampled set, update the threshold from the agreement delta, vote, and
/// train the consensus model on the agreed nodes plus the labeled set.
EpochMetrics run_epoch(EnsembleState& state, const SparseFeatures& x,
                       const Dataset& dataset, int epoch);

struct TrialResult {
  std::uint64_t seed = 0;
  double final_test_accuracy = 0.0;
  std::vector<double> final_individual_accuracy;
  std::vector<EpochMetrics> epochs;
};

using EpochObserver =
    std::function<void(int epoch, const EnsembleState&, const EpochMetrics&)>;

/// Runs max_epochs epochs on the given dataset; the result carries the full
/// per-epoch trace. Identical (config, dataset, seed) give identical results.
TrialResult run_trial(const ExperimentConfig& config, const Dataset& dataset,
                      std::uint64_t seed, const EpochObserver& observer = nullptr);

}  // namespace a3gcn
