#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include "a3gcn/ensemble.hpp"
#include "support.hpp"

using namespace a3gcn;

namespace {

Prediction make_prediction(const std::vector<int>& labels,
                           const std::vector<double>& confidence, int num_classes) {
  Prediction p;
  p.labels = labels;
  p.confidence = confidence;
  p.probs = DenseMatrix(static_cast<int>(labels.size()), num_classes, 0.0);
  for (std::size_t u = 0; u < labels.size(); ++u) {
    // distribute the remainder uniformly so rows still sum to one
    const double rest = (1.0 - confidence[u]) / (num_classes - 1);
    for (int c = 0; c < num_classes; ++c) p.probs(static_cast<int>(u), c) = rest;
    p.probs(static_cast<int>(u), labels[u]) = confidence[u];
  }
  return p;
}

ExperimentConfig sbm_config(Variant variant, int k, int epochs) {
  ExperimentConfig c;
  c.sbm = SbmParams{.num_nodes = 120, .num_classes = 3, .p_intra = 0.1,
                    .p_inter = 0.01, .feature_dim = 3, .feature_noise = 0.8};
  c.variant = variant;
  c.k = k;
  c.max_epochs = epochs;
  c.trials = 1;
  if (variant == Variant::BaselineGcn || variant == Variant::NoEnsemble) {
    c.alpha = 0.0;
    c.p_drop = 0.0;
  }
  c.validate();
  return c;
}

}  // namespace

TEST_CASE("high_confidence_set filters on threshold and labeled status") {
  Prediction p = make_prediction({0, 1, 2, 1, 0}, {0.95, 0.60, 0.80, 0.99, 0.71}, 3);
  std::vector<std::uint8_t> labeled = {0, 0, 0, 1, 0};

  HighConfidence hc = high_confidence_set(p, 0.7, labeled);
  CHECK(hc.nodes == std::vector<int>{0, 2, 4});  // node 3 labeled, node 1 below
  CHECK(hc.labels == std::vector<int>{0, 2, 0});

  // uniform predictions below a high threshold leave the set empty
  Prediction uniform = make_prediction({0, 0, 0}, {1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0}, 3);
  std::vector<std::uint8_t> none(3, 0);
  CHECK(high_confidence_set(uniform, 0.9, none).nodes.empty());
}

TEST_CASE("high_confidence_set matches a brute-force filter") {
  Rng rng(1);
  for (int trial = 0; trial < 20; ++trial) {
    const int n = 30;
    std::vector<int> labels(n);
    std::vector<double> conf(n);
    std::vector<std::uint8_t> labeled(n);
    for (int u = 0; u < n; ++u) {
      labels[u] = static_cast<int>(rng.next_below(4));
      conf[u] = 0.25 + 0.75 * rng.next_uniform();
      labeled[u] = rng.next_uniform() < 0.2;
    }
    Prediction p = make_prediction(labels, conf, 4);
    HighConfidence hc = high_confidence_set(p, 0.7, labeled);
    std::vector<int> expect;
    for (int u = 0; u < n; ++u)
      if (!labeled[u] && conf[u] >= 0.7) expect.push_back(u);
    CHECK(hc.nodes == expect);
  }
}

TEST_CASE("agreement_ratio set algebra") {
  const auto make = [](std::vector<std::vector<int>> sets) {
    std::vector<HighConfidence> hcs;
    for (auto& s : sets) {
      HighConfidence hc;
      hc.nodes = s;
      hc.labels.assign(s.size(), 0);
      hcs.push_back(hc);
    }
    return build_pseudo_label_sets(std::move(hcs));
  };

  CHECK(agreement_ratio(make({{1, 2, 5}, {1, 2, 5}, {1, 2, 5}})) == 1.0);
  CHECK(agreement_ratio(make({{1, 2}, {3, 4}})) == 0.0);
  CHECK(agreement_ratio(make({{1, 2, 3}, {2, 3, 4}, {2, 3}})) == 0.5);
  CHECK(agreement_ratio(make({{}, {}})) == 0.0);  // empty union
}

TEST_CASE("label-aware intersection demands label agreement") {
  HighConfidence a, b;
  a.nodes = {1, 2};
  a.labels = {0, 1};
  b.nodes = {1, 2};
  b.labels = {0, 2};  // disagrees on node 2
  auto strict = build_pseudo_label_sets({a, b}, true);
  CHECK(strict.intersection == std::vector<int>{1});
  auto loose = build_pseudo_label_sets({a, b}, false);
  CHECK(loose.intersection == std::vector<int>{1, 2});
}

TEST_CASE("update_threshold arithmetic and clamping") {
  CHECK(update_threshold(0.8, 0.1, 0.4, 0.4, 0.5, 0.99) == 0.8);
  CHECK(update_threshold(0.95, 0.1, 0.2, 0.5, 0.5, 0.99) == doctest::Approx(0.92).epsilon(1e-12));
  CHECK(update_threshold(0.505, 0.1, 0.9, 0.2, 0.5, 0.99) == doctest::Approx(0.575).epsilon(1e-12));
  CHECK(update_threshold(0.505, 0.1, 0.2, 0.9, 0.5, 0.99) == 0.5);  // clamped at the floor
  CHECK(update_threshold(0.98, 0.5, 1.0, 0.0, 0.5, 0.99) == 0.99);  // clamped at the cap
}

TEST_CASE("update_threshold monotonicity in the current agreement") {
  Rng rng(2);
  for (int trial = 0; trial < 200; ++trial) {
    const double theta = 0.5 + 0.49 * rng.next_uniform();
    const double alpha = rng.next_uniform();
    const double s_prev = rng.next_uniform();
    const double s1 = rng.next_uniform();
    const double s2 = rng.next_uniform();
    const double lo = std::min(s1, s2), hi = std::max(s1, s2);
    const double t_lo = update_threshold(theta, alpha, s_prev, lo, 0.5, 0.99);
    const double t_hi = update_threshold(theta, alpha, s_prev, hi, 0.5, 0.99);
    CHECK(t_hi <= t_lo);  // more agreement, lower threshold
    CHECK(t_lo >= 0.5);
    CHECK(t_lo <= 0.99);
  }
}

TEST_CASE("sample_training_set boundary ratios") {
  std::vector<int> labeled = {0, 5};
  std::vector<int> truth = {2, 0, 0, 0, 0, 1, 0, 0};
  HighConfidence pseudo;
  pseudo.nodes = {1, 2, 3, 6};
  pseudo.labels = {1, 1, 0, 1};

  Rng r0(3);
  TrainingSet none = sample_training_set(labeled, truth, pseudo, 0.0, r0);
  CHECK(none.nodes == labeled);
  CHECK(none.labels == std::vector<int>{2, 1});

  Rng r1(4);
  TrainingSet all = sample_training_set(labeled, truth, pseudo, 1.0, r1);
  CHECK(all.nodes.size() == 6);
  std::set<int> got(all.nodes.begin(), all.nodes.end());
  CHECK(got == std::set<int>{0, 1, 2, 3, 5, 6});
}

TEST_CASE("sample_training_set draws uniformly without replacement") {
  std::vector<int> labeled;
  std::vector<int> truth(100, 0);
  HighConfidence pseudo;
  for (int i = 0; i < 100; ++i) {
    pseudo.nodes.push_back(i);
    pseudo.labels.push_back(0);
  }
  std::vector<int> hits(100, 0);
  const int trials = 10000;
  Rng rng(5);
  for (int t = 0; t < trials; ++t) {
    Rng r = rng.substream(t);
    TrainingSet ts = sample_training_set(labeled, truth, pseudo, 0.5, r);
    CHECK(ts.nodes.size() == 50);
    std::set<int> unique(ts.nodes.begin(), ts.nodes.end());
    CHECK(unique.size() == 50);
    for (int u : ts.nodes) ++hits[u];
  }
  for (int i = 0; i < 100; ++i) {
    const double freq = hits[i] / static_cast<double>(trials);
    CHECK(std::abs(freq - 0.5) <= 0.02);
  }
}

TEST_CASE("consensus_vote unanimity and majority thresholds") {
  SUBCASE("k=5, beta=1, unanimous") {
    std::vector<Prediction> preds;
    for (int i = 0; i < 5; ++i) preds.push_back(make_prediction({2}, {0.9}, 3));
    ConsensusSet cs = consensus_vote(preds, 1.0);
    REQUIRE(cs.nodes == std::vector<int>{0});
    CHECK(cs.labels[0] == 2);
    CHECK(cs.agree_counts[0] == 5);
  }
  SUBCASE("k=4, beta=1, a 3-1 split is excluded") {
    std::vector<Prediction> preds;
    for (int vote : {2, 2, 2, 0}) preds.push_back(make_prediction({vote}, {0.9}, 3));
    CHECK(consensus_vote(preds, 1.0).nodes.empty());
  }
  SUBCASE("k=6, beta=0.5, plurality of three wins") {
    std::vector<Prediction> preds;
    for (int vote : {1, 1, 1, 0, 0, 2}) preds.push_back(make_prediction({vote}, {0.9}, 3));
    ConsensusSet cs = consensus_vote(preds, 0.5);
    REQUIRE(cs.nodes == std::vector<int>{0});
    CHECK(cs.labels[0] == 1);
    CHECK(cs.agree_counts[0] == 3);
  }
}

TEST_CASE("consensus_vote matches a counting oracle on random votes") {
  Rng rng(6);
  for (int trial = 0; trial < 200; ++trial) {
    const int k = 2 + static_cast<int>(rng.next_below(5));   // <= 6
    const int n = 5 + static_cast<int>(rng.next_below(46));  // <= 50
    const int classes = 2 + static_cast<int>(rng.next_below(3));
    const double beta = 0.3 + 0.7 * rng.next_uniform();

    std::vector<Prediction> preds;
    for (int i = 0; i < k; ++i) {
      std::vector<int> labels(n);
      std::vector<double> conf(n);
      for (int u = 0; u < n; ++u) {
        labels[u] = static_cast<int>(rng.next_below(classes));
        conf[u] = 1.0 / classes + (1.0 - 1.0 / classes) * rng.next_uniform();
      }
      preds.push_back(make_prediction(labels, conf, classes));
    }
    ConsensusSet cs = consensus_vote(preds, beta);

    // independent recount
    const int needed = static_cast<int>(std::ceil(beta * k - 1e-9));
    std::size_t cursor = 0;
    for (int u = 0; u < n; ++u) {
      std::map<int, int> counts;
      for (const auto& p : preds) ++counts[p.labels[u]];
      int peak = 0;
      for (const auto& [c, count] : counts) peak = std::max(peak, count);
      if (peak < needed) continue;
      REQUIRE(cursor < cs.nodes.size());
      CHECK(cs.nodes[cursor] == u);
      CHECK(cs.agree_counts[cursor] == peak);
      // the winning class must hold the peak count, and no tied class may
      // have a strictly higher mean probability
      CHECK(counts[cs.labels[cursor]] == peak);
      double mean_win = 0.0;
      for (const auto& p : preds) mean_win += p.probs(u, cs.labels[cursor]);
      for (const auto& [c, count] : counts) {
        if (count != peak || c == cs.labels[cursor]) continue;
        double mean_c = 0.0;
        for (const auto& p : preds) mean_c += p.probs(u, c);
        CHECK(mean_c <= mean_win);
      }
      ++cursor;
    }
    CHECK(cursor == cs.nodes.size());
  }
}

TEST_CASE("run_epoch cold start leaves the threshold alone") {
  ExperimentConfig cfg = sbm_config(Variant::A3, 4, 2);
  Rng rng(7);
  Dataset d = generate_sbm(*cfg.sbm, rng);
  EnsembleState state = init_ensemble(cfg, d, 99);
  SparseFeatures x = SparseFeatures::from_dense(d.features);

  EpochMetrics m1 = run_epoch(state, x, d, 1);
  // untrained near-uniform models produce no high-confidence nodes at 0.95
  CHECK(m1.h_union == 0);
  CHECK(m1.s_agreement == 0.0);
  CHECK(m1.theta == cfg.theta_init);
  EpochMetrics m2 = run_epoch(state, x, d, 2);
  CHECK(m2.theta == cfg.theta_init);  // S stayed 0, delta is 0
}

TEST_CASE("pseudo-label sets never contain labeled nodes and nest properly") {
  ExperimentConfig cfg = sbm_config(Variant::A3, 3, 30);
  cfg.theta_init = 0.6;  // let sets form quickly
  cfg.theta_min = 0.5;
  Rng rng(8);
  Dataset d = generate_sbm(*cfg.sbm, rng);
  EnsembleState state = init_ensemble(cfg, d, 42);
  SparseFeatures x = SparseFeatures::from_dense(d.features);
  std::set<int> labeled(d.train_mask.begin(), d.train_mask.end());

  for (int epoch = 1; epoch <= 30; ++epoch) {
    run_epoch(state, x, d, epoch);
    std::set<int> hu(state.last_high_conf_union.begin(), state.last_high_conf_union.end());
    for (int u : hu) CHECK(labeled.count(u) == 0);
  }
  CHECK(state.last_high_conf_union.size() > 0);  // the ensemble did warm up
}

TEST_CASE("unanimous consensus equals the brute-force all-agree set") {
  ExperimentConfig cfg = sbm_config(Variant::A3, 4, 5);
  Rng rng(9);
  Dataset d = generate_sbm(*cfg.sbm, rng);
  EnsembleState state = init_ensemble(cfg, d, 7);
  SparseFeatures x = SparseFeatures::from_dense(d.features);
  for (int epoch = 1; epoch <= 5; ++epoch) run_epoch(state, x, d, epoch);

  std::vector<Prediction> preds;
  for (int i = 0; i < 4; ++i) preds.push_back(state.models[i].predict(state.views[i], x));
  ConsensusSet cs = consensus_vote(preds, 1.0);
  std::vector<int> expect;
  for (int u = 0; u < d.num_nodes; ++u) {
    bool all_agree = true;
    for (int i = 1; i < 4; ++i) all_agree &= preds[i].labels[u] == preds[0].labels[u];
    if (all_agree) expect.push_back(u);
  }
  CHECK(cs.nodes == expect);
}

TEST_CASE("k=1 degenerates to self-training with full agreement") {
  ExperimentConfig cfg = sbm_config(Variant::A3, 1, 3);
  cfg.p_drop = 0.0;
  Rng rng(10);
  Dataset d = generate_sbm(*cfg.sbm, rng);
  EnsembleState state = init_ensemble(cfg, d, 5);
  SparseFeatures x = SparseFeatures::from_dense(d.features);
  for (int epoch = 1; epoch <= 3; ++epoch) {
    EpochMetrics m = run_epoch(state, x, d, epoch);
    CHECK((m.s_agreement == 0.0 || m.s_agreement == 1.0));
    // a single model always agrees with itself everywhere
    CHECK(m.v_consensus == d.num_nodes);
  }
}

TEST_CASE("run_trial is bit-for-bit reproducible") {
  ExperimentConfig cfg = sbm_config(Variant::A3, 3, 10);
  Rng rng(11);
  Dataset d = generate_sbm(*cfg.sbm, rng);
  TrialResult a = run_trial(cfg, d, 1234);
  TrialResult b = run_trial(cfg, d, 1234);
  REQUIRE(a.epochs.size() == b.epochs.size());
  CHECK(a.final_test_accuracy == b.final_test_accuracy);
  for (std::size_t e = 0; e < a.epochs.size(); ++e) {
    CHECK(a.epochs[e].s_agreement == b.epochs[e].s_agreement);
    CHECK(a.epochs[e].theta == b.epochs[e].theta);
    CHECK(a.epochs[e].consensus_train_loss == b.epochs[e].consensus_train_loss);
    CHECK(a.epochs[e].test_accuracy == b.epochs[e].test_accuracy);
  }
}

TEST_CASE("baseline and no-ensemble variants coincide exactly") {
  ExperimentConfig base = sbm_config(Variant::BaselineGcn, 1, 15);
  ExperimentConfig none = sbm_config(Variant::NoEnsemble, 1, 15);
  Rng r1(12), r2(12);
  Dataset d1 = generate_sbm(*base.sbm, r1);
  Dataset d2 = generate_sbm(*none.sbm, r2);
  TrialResult a = run_trial(base, d1, 777);
  TrialResult b = run_trial(none, d2, 777);
  CHECK(a.final_test_accuracy == b.final_test_accuracy);
  for (std::size_t e = 0; e < a.epochs.size(); ++e) {
    CHECK(a.epochs[e].consensus_train_loss == b.epochs[e].consensus_train_loss);
    CHECK(a.epochs[e].test_accuracy == b.epochs[e].test_accuracy);
  }
}

TEST_CASE("theta stays clamped for arbitrary agreement sequences") {
  Rng rng(13);
  for (int trial = 0; trial < 50; ++trial) {
    double theta = 0.95;
    const double alpha = 2.0 * rng.next_uniform();  // deliberately large
    double s_prev = 0.0;
    for (int step = 0; step < 100; ++step) {
      const double s = rng.next_uniform();
      theta = update_threshold(theta, alpha, s_prev, s, 0.5, 0.99);
      s_prev = s;
      CHECK(theta >= 0.5);
      CHECK(theta <= 0.99);
    }
  }
}
