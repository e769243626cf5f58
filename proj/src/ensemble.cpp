#include "a3gcn/ensemble.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <unordered_map>

#include "a3gcn/augment.hpp"

namespace a3gcn {

namespace {

// Top-level substream purposes within one trial's root stream.
constexpr std::uint64_t kViewsStream = 1;
constexpr std::uint64_t kModelsStream = 2;
constexpr std::uint64_t kConsensusStream = 3;
constexpr std::uint64_t kSubsetStream = 4;

double accuracy(const std::vector<int>& predicted, const std::vector<int>& truth,
                const std::vector<int>& mask) {
  if (mask.empty()) return 0.0;
  int hits = 0;
  for (int u : mask) hits += predicted[u] == truth[u];
  return static_cast<double>(hits) / static_cast<double>(mask.size());
}

}  // namespace

HighConfidence high_confidence_set(const Prediction& pred, double theta_conf,
                                   const std::vector<std::uint8_t>& is_labeled) {
  HighConfidence out;
  const int n = static_cast<int>(pred.labels.size());
  for (int u = 0; u < n; ++u) {
    if (is_labeled[u]) continue;
    if (pred.confidence[u] >= theta_conf) {
      out.nodes.push_back(u);
      out.labels.push_back(pred.labels[u]);
    }
  }
  return out;
}

PseudoLabelSets build_pseudo_label_sets(std::vector<HighConfidence> sets,
                                        bool label_aware_intersection) {
  PseudoLabelSets out;
  out.per_model = std::move(sets);
  if (out.per_model.empty()) return out;

  const std::size_t k = out.per_model.size();
  // membership count and, for the label-aware mode, whether all members agree
  std::unordered_map<int, std::pair<int, int>> tally;  // node -> (count, first label)
  std::unordered_map<int, bool> consistent;
  for (const auto& hc : out.per_model) {
    for (std::size_t i = 0; i < hc.nodes.size(); ++i) {
      const int u = hc.nodes[i];
      auto [it, inserted] = tally.try_emplace(u, 0, hc.labels[i]);
      ++it->second.first;
      if (inserted)
        consistent[u] = true;
      else if (it->second.second != hc.labels[i])
        consistent[u] = false;
    }
  }
  for (const auto& [u, entry] : tally) {
    out.set_union.push_back(u);
    if (static_cast<std::size_t>(entry.first) == k &&
        (!label_aware_intersection || consistent[u]))
      out.intersection.push_back(u);
  }
  std::sort(out.set_union.begin(), out.set_union.end());
  std::sort(out.intersection.begin(), out.intersection.end());
  return out;
}

double agreement_ratio(const PseudoLabelSets& sets) {
  if (sets.set_union.empty()) return 0.0;
  return static_cast<double>(sets.intersection.size()) /
         static_cast<double>(sets.set_union.size());
}

double update_threshold(double theta, double alpha, double s_prev, double s_curr,
                        double theta_min, double theta_max) {
  if (alpha < 0.0) throw std::invalid_argument("update_threshold: alpha must be >= 0");
  return std::clamp(theta + alpha * (s_prev - s_curr), theta_min, theta_max);
}

TrainingSet sample_training_set(const std::vector<int>& labeled_nodes,
                                const std::vector<int>& ground_truth,
                                const HighConfidence& pseudo, double s, Rng& rng) {
  if (s < 0.0 || s > 1.0)
    throw std::invalid_argument("sample_training_set: s must be in [0, 1]");

  TrainingSet ts;
  for (int u : labeled_nodes) {
    ts.nodes.push_back(u);
    ts.labels.push_back(ground_truth[u]);
  }

  const std::size_t count =
      static_cast<std::size_t>(s * static_cast<double>(pseudo.size()));
  std::vector<std::size_t> order(pseudo.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  for (std::size_t i = 0; i < count; ++i) {
    const std::size_t j = i + rng.next_below(order.size() - i);
    std::swap(order[i], order[j]);
  }
  for (std::size_t i = 0; i < count; ++i) {
    ts.nodes.push_back(pseudo.nodes[order[i]]);
    ts.labels.push_back(pseudo.labels[order[i]]);
  }
  return ts;
}

ConsensusSet consensus_vote(const std::vector<Prediction>& preds, double beta) {
  if (preds.empty()) throw std::invalid_argument("consensus_vote: no predictions");
  if (beta <= 0.0 || beta > 1.0)
    throw std::invalid_argument("consensus_vote: beta must be in (0, 1]");

  const int k = static_cast<int>(preds.size());
  const int n = static_cast<int>(preds[0].labels.size());
  const int num_classes = preds[0].probs.cols();
  // Small epsilon guards against ceil(0.3 * 10) style float artifacts.
  const int needed = static_cast<int>(
      std::ceil(beta * static_cast<double>(k) - 1e-9));

  ConsensusSet out;
  std::vector<int> votes(num_classes);
  for (int u = 0; u < n; ++u) {
    std::fill(votes.begin(), votes.end(), 0);
    for (const auto& p : preds) ++votes[p.labels[u]];
    int best = 0;
    for (int c = 1; c < num_classes; ++c)
      if (votes[c] > votes[best]) best = c;
    if (votes[best] < needed) continue;

    // Break count ties by the higher mean probability across models.
    for (int c = 0; c < num_classes; ++c) {
      if (c == best || votes[c] != votes[best]) continue;
      double mean_c = 0.0, mean_best = 0.0;
      for (const auto& p : preds) {
        mean_c += p.probs(u, c);
        mean_best += p.probs(u, best);
      }
      if (mean_c > mean_best) best = c;
    }

    out.nodes.push_back(u);
    out.labels.push_back(best);
    out.agree_counts.push_back(votes[best]);
  }
  return out;
}

EnsembleState init_ensemble(const ExperimentConfig& config, const Dataset& dataset,
                            std::uint64_t seed) {
  const Rng root(seed);

  GcnConfig gcfg;
  gcfg.in_dim = dataset.feature_dim();
  gcfg.hidden_dim = config.hidden_dim;
  gcfg.num_classes = dataset.num_classes;
  gcfg.dropout = config.dropout;
  gcfg.input_dropout = config.input_dropout;
  gcfg.lr = config.lr;
  gcfg.weight_decay = config.weight_decay;

  std::vector<SparseGraph> views =
      make_views(dataset.edges, dataset.num_nodes, config.k, config.p_drop,
                 root.substream(kViewsStream));

  std::vector<GcnModel> models;
  models.reserve(config.k);
  const Rng model_root = root.substream(kModelsStream);
  for (int i = 0; i < config.k; ++i)
    models.emplace_back(gcfg, model_root.substream(static_cast<std::uint64_t>(i)));

  std::vector<std::uint8_t> is_labeled(dataset.num_nodes, 0);
  for (int u : dataset.train_mask) is_labeled[u] = 1;

  return EnsembleState{
      .theta = config.effective_theta_init(),
      .theta_min = config.theta_min,
      .theta_max = config.theta_max,
      .alpha = config.alpha,
      .beta = config.beta,
      .s_history = {},
      .models = std::move(models),
      .views = std::move(views),
      .consensus_model = GcnModel(gcfg, root.substream(kConsensusStream)),
      .original = normalize_adjacency(build_graph(dataset.num_nodes, dataset.edges)),
      .subset_rng = root.substream(kSubsetStream),
      .switches = config.switches(),
      .label_aware_agreement = config.label_aware_agreement,
      .is_labeled = std::move(is_labeled),
      .last_high_conf_union = {},
      .last_consensus = {},
  };
}

EpochMetrics run_epoch(EnsembleState& state, const SparseFeatures& x,
                       const Dataset& dataset, int epoch) {
  const int k = static_cast<int>(state.models.size());
  EpochMetrics m;
  m.epoch = epoch;

  // (1) current predictions of every model on its own view
  std::vector<Prediction> preds;
  preds.reserve(k);
  for (int i = 0; i < k; ++i)
    preds.push_back(state.models[i].predict(state.views[i], x));

  // (2) high-confidence candidate sets
  std::vector<HighConfidence> sets(k);
  if (state.switches.pseudo_labels) {
    for (int i = 0; i < k; ++i)
      sets[i] = high_confidence_set(preds[i], state.theta, state.is_labeled);
  }
  PseudoLabelSets pls =
      build_pseudo_label_sets(std::move(sets), state.label_aware_agreement);

  // (3) agreement ratio
  const double s = agreement_ratio(pls);
  state.s_history.push_back(s);
  m.s_agreement = s;
  m.h_intersect = static_cast<int>(pls.intersection.size());
  m.h_union = static_cast<int>(pls.set_union.size());

  // (4) one training step per model on its sampled set
  const Rng epoch_rng = state.subset_rng.substream(static_cast<std::uint64_t>(epoch));
  for (int i = 0; i < k; ++i) {
    TrainingSet ts;
    if (state.switches.pseudo_labels) {
      const double ratio = state.switches.adaptive_sampling ? s : 1.0;
      Rng model_rng = epoch_rng.substream(static_cast<std::uint64_t>(i));
      ts = sample_training_set(dataset.train_mask, dataset.labels, pls.per_model[i],
                               ratio, model_rng);
    } else {
      ts.nodes = dataset.train_mask;
      for (int u : ts.nodes) ts.labels.push_back(dataset.labels[u]);
    }
    std::vector<int> full_labels(dataset.num_nodes, -1);
    for (std::size_t j = 0; j < ts.nodes.size(); ++j) full_labels[ts.nodes[j]] = ts.labels[j];
    state.models[i].train_step(state.views[i], x, full_labels, ts.nodes);
  }

  // (5) threshold update from the agreement delta; no update on the first epoch
  if (state.switches.adaptive_theta && state.s_history.size() >= 2) {
    const double s_prev = state.s_history[state.s_history.size() - 2];
    state.theta = update_threshold(state.theta, state.alpha, s_prev, s,
                                   state.theta_min, state.theta_max);
  }
  m.theta = state.theta;

  // (6) majority vote
  const ConsensusSet consensus = consensus_vote(preds, state.beta);
  m.v_consensus = static_cast<int>(consensus.size());
  state.last_high_conf_union = pls.set_union;
  state.last_consensus = consensus;

  // (7) consensus model trains on the agreed nodes plus the labeled set,
  // ground truth overriding the vote on labeled nodes
  {
    std::vector<int> full_labels(dataset.num_nodes, -1);
    std::vector<int> mask;
    if (state.switches.pseudo_labels) {
      if (state.switches.conservative) {
        // only nodes that are high-confidence in every model and agreed
        for (std::size_t j = 0; j < consensus.nodes.size(); ++j) {
          const int u = consensus.nodes[j];
          if (std::binary_search(pls.intersection.begin(), pls.intersection.end(), u)) {
            full_labels[u] = consensus.labels[j];
            mask.push_back(u);
          }
        }
      } else {
        for (std::size_t j = 0; j < consensus.nodes.size(); ++j) {
          full_labels[consensus.nodes[j]] = consensus.labels[j];
          mask.push_back(consensus.nodes[j]);
        }
      }
    }
    for (int u : dataset.train_mask) {
      if (full_labels[u] == -1) mask.push_back(u);
      full_labels[u] = dataset.labels[u];
    }
    std::sort(mask.begin(), mask.end());
    m.consensus_train_loss =
        state.consensus_model.train_step(state.original, x, full_labels, mask);
  }

  // diagnostics
  {
    int correct = 0;
    for (std::size_t j = 0; j < consensus.nodes.size(); ++j)
      correct += consensus.labels[j] == dataset.labels[consensus.nodes[j]];
    m.pseudo_label_correctness =
        consensus.nodes.empty()
            ? 0.0
            : static_cast<double>(correct) / static_cast<double>(consensus.size());

    m.individual_accuracy.resize(k);
    for (int i = 0; i < k; ++i)
      m.individual_accuracy[i] = accuracy(preds[i].labels, dataset.labels, dataset.test_mask);
    double mean = 0.0;
    for (double a : m.individual_accuracy) mean += a;
    mean /= k;
    double var = 0.0;
    for (double a : m.individual_accuracy) var += (a - mean) * (a - mean);
    m.individual_accuracy_mean = mean;
    m.individual_accuracy_std = k > 1 ? std::sqrt(var / (k - 1)) : 0.0;

    const Prediction final_pred = state.consensus_model.predict(state.original, x);
    m.val_accuracy = accuracy(final_pred.labels, dataset.labels, dataset.val_mask);
    m.test_accuracy = accuracy(final_pred.labels, dataset.labels, dataset.test_mask);
  }
  return m;
}

TrialResult run_trial(const ExperimentConfig& config, const Dataset& dataset,
                      std::uint64_t seed, const EpochObserver& observer) {
  EnsembleState state = init_ensemble(config, dataset, seed);
  const SparseFeatures x = SparseFeatures::from_dense(dataset.features);

  TrialResult result;
  result.seed = seed;
  result.epochs.reserve(config.max_epochs);
  for (int epoch = 1; epoch <= config.max_epochs; ++epoch) {
    EpochMetrics m = run_epoch(state, x, dataset, epoch);
    if (observer) observer(epoch, state, m);
    result.epochs.push_back(std::move(m));
  }

  std::size_t best = result.epochs.size() - 1;
  if (config.select_best_val) {
    best = 0;
    for (std::size_t i = 1; i < result.epochs.size(); ++i)
      if (result.epochs[i].val_accuracy > result.epochs[best].val_accuracy) best = i;
  }
  result.final_test_accuracy = result.epochs[best].test_accuracy;
  result.final_individual_accuracy = result.epochs.back().individual_accuracy;
  return result;
}

}  // namespace a3gcn
