#include "a3gcn/experiment.hpp"

#include <atomic>
#include <charconv>
#include <cmath>
#include <exception>
#include <fstream>
#include <mutex>
#include <thread>

namespace a3gcn {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

std::string format_metric(double v) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  (void)ec;
  return std::string(buf, ptr);
}

std::uint64_t trial_seed(std::uint64_t master_seed, int trial) {
  return Rng::hash2(master_seed, static_cast<std::uint64_t>(trial));
}

namespace {

// Trial-local substream purposes for dataset resolution.
constexpr std::uint64_t kSbmStream = 101;
constexpr std::uint64_t kSplitStream = 102;
constexpr std::uint64_t kNoiseStream = 103;

void row_normalize(DenseMatrix& x) {
  for (int i = 0; i < x.rows(); ++i) {
    double sum = 0.0;
    double* row = x.row(i);
    for (int j = 0; j < x.cols(); ++j) sum += std::abs(row[j]);
    if (sum > 0.0)
      for (int j = 0; j < x.cols(); ++j) row[j] /= sum;
  }
}

void write_trial_csv(const fs::path& path, const TrialResult& trial) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << "epoch,s_agreement,theta,h_intersect,h_union,v_consensus,"
         "consensus_train_loss,val_accuracy,test_accuracy,"
         "individual_accuracy_mean,individual_accuracy_std,"
         "pseudo_label_correctness\n";
  for (const auto& m : trial.epochs) {
    out << m.epoch << ',' << format_metric(m.s_agreement) << ','
        << format_metric(m.theta) << ',' << m.h_intersect << ',' << m.h_union << ','
        << m.v_consensus << ',' << format_metric(m.consensus_train_loss) << ','
        << format_metric(m.val_accuracy) << ',' << format_metric(m.test_accuracy) << ','
        << format_metric(m.individual_accuracy_mean) << ','
        << format_metric(m.individual_accuracy_std) << ','
        << format_metric(m.pseudo_label_correctness) << '\n';
  }
}

std::string trial_file_name(int trial) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "trial_%03d.csv", trial);
  return buf;
}

void summarize(ExperimentResult& result) {
  const int n = static_cast<int>(result.trials.size());
  double mean = 0.0;
  for (const auto& t : result.trials) mean += t.final_test_accuracy;
  mean /= n;
  double var = 0.0;
  for (const auto& t : result.trials) {
    const double d = t.final_test_accuracy - mean;
    var += d * d;
  }
  result.mean_accuracy = mean;
  result.std_accuracy = n > 1 ? std::sqrt(var / (n - 1)) : 0.0;
}

void write_summary(const ExperimentResult& result, const fs::path& path) {
  ordered_json j;
  j["config"] = result.config.to_json();
  ordered_json trials = ordered_json::array();
  for (std::size_t t = 0; t < result.trials.size(); ++t) {
    ordered_json row;
    row["trial"] = t;
    row["seed"] = result.trials[t].seed;
    row["final_test_accuracy"] = result.trials[t].final_test_accuracy;
    trials.push_back(row);
  }
  j["trials"] = trials;
  j["mean_test_accuracy"] = result.mean_accuracy;
  j["std_test_accuracy"] = result.std_accuracy;
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << j.dump(2) << "\n";
}

}  // namespace

std::optional<Dataset> load_config_bundle(const ExperimentConfig& config) {
  if (config.bundle_path.empty()) return std::nullopt;
  Dataset d = load_bundle(config.bundle_path);
  if (config.row_normalize_features) row_normalize(d.features);
  return d;
}

Dataset resolve_trial_dataset(const ExperimentConfig& config, const Dataset* bundle,
                              std::uint64_t seed) {
  const Rng root(seed);
  Dataset d;
  if (config.sbm) {
    Rng sbm_rng = root.substream(kSbmStream);
    d = generate_sbm(*config.sbm, sbm_rng);
  } else {
    d = *bundle;
  }
  if (config.per_class > 0) {
    Rng split_rng = root.substream(kSplitStream);
    d = make_label_rate_split(d, config.per_class, split_rng);
  }
  if (config.q_noise >= 0.0) {
    Rng noise_rng = root.substream(kNoiseStream);
    d = inject_noisy_edges(d, config.q_noise, noise_rng);
  }
  return d;
}

ExperimentResult run_experiment(const ExperimentConfig& config,
                                const fs::path& out_dir, int jobs) {
  config.validate();
  fs::create_directories(out_dir);

  const std::optional<Dataset> bundle = load_config_bundle(config);
  const Dataset* bundle_ptr = bundle ? &*bundle : nullptr;

  ExperimentResult result;
  result.config = config;
  result.trials.resize(config.trials);

  std::atomic<int> next{0};
  std::mutex error_mutex;
  std::exception_ptr first_error;

  const auto worker = [&]() {
    for (;;) {
      const int t = next.fetch_add(1);
      if (t >= config.trials) return;
      try {
        const std::uint64_t seed = trial_seed(config.master_seed, t);
        const Dataset d = resolve_trial_dataset(config, bundle_ptr, seed);
        TrialResult trial = run_trial(config, d, seed);
        write_trial_csv(out_dir / trial_file_name(t), trial);
        result.trials[t] = std::move(trial);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
        return;
      }
    }
  };

  const int workers = std::max(1, std::min(jobs, config.trials));
  if (workers == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (int i = 0; i < workers; ++i) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  if (first_error) std::rethrow_exception(first_error);

  summarize(result);
  write_summary(result, out_dir / "summary.json");
  return result;
}

namespace {

struct GridPoint {
  std::optional<int> k;
  std::optional<double> alpha;
  std::optional<double> p_drop;
  std::optional<int> per_class;
  std::optional<double> q;
};

std::vector<GridPoint> expand_grid(const SweepSpec& sweep) {
  std::vector<GridPoint> points{GridPoint{}};
  const auto expand = [&points](const auto& values, auto assign) {
    if (values.empty()) return;
    std::vector<GridPoint> next;
    next.reserve(points.size() * values.size());
    for (const auto& p : points)
      for (const auto& v : values) {
        GridPoint q = p;
        assign(q, v);
        next.push_back(q);
      }
    points = std::move(next);
  };
  expand(sweep.k, [](GridPoint& p, int v) { p.k = v; });
  expand(sweep.alpha, [](GridPoint& p, double v) { p.alpha = v; });
  expand(sweep.p_drop, [](GridPoint& p, double v) { p.p_drop = v; });
  expand(sweep.per_class, [](GridPoint& p, int v) { p.per_class = v; });
  expand(sweep.q, [](GridPoint& p, double v) { p.q = v; });
  return points;
}

}  // namespace

SweepResult run_sweep(const ExperimentConfig& config, const fs::path& out_dir,
                      int jobs) {
  if (config.sweep.empty())
    throw ConfigError("sweep requested but the config has no sweep axes");
  fs::create_directories(out_dir);

  SweepResult result;
  result.base_config = config;

  const std::vector<GridPoint> points = expand_grid(config.sweep);
  for (std::size_t i = 0; i < points.size(); ++i) {
    const GridPoint& p = points[i];
    ExperimentConfig point_config = config;
    point_config.sweep = {};
    if (p.k) point_config.k = *p.k;
    if (p.alpha) point_config.alpha = *p.alpha;
    if (p.p_drop) point_config.p_drop = *p.p_drop;
    if (p.per_class) point_config.per_class = *p.per_class;
    if (p.q) point_config.q_noise = *p.q;

    char name[32];
    std::snprintf(name, sizeof(name), "point_%03zu", i);
    const ExperimentResult point_result =
        run_experiment(point_config, out_dir / name, jobs);

    SweepRow row;
    row.k = point_config.k;
    row.alpha = point_config.alpha;
    row.p_drop = point_config.p_drop;
    row.per_class = point_config.per_class;
    row.q = point_config.q_noise;
    row.mean_accuracy = point_result.mean_accuracy;
    row.std_accuracy = point_result.std_accuracy;
    result.rows.push_back(row);
  }

  std::ofstream out(out_dir / "sweep_summary.csv", std::ios::binary);
  if (!out) throw std::runtime_error("cannot write sweep_summary.csv");
  out << "k,alpha,p_drop,per_class,q,mean_test_accuracy,std_test_accuracy\n";
  for (const auto& r : result.rows) {
    out << r.k << ',' << format_metric(r.alpha) << ',' << format_metric(r.p_drop) << ','
        << r.per_class << ',' << format_metric(r.q) << ','
        << format_metric(r.mean_accuracy) << ',' << format_metric(r.std_accuracy) << '\n';
  }
  return result;
}

void emit_figure_data(const ExperimentResult& result, const std::string& figure,
                      const fs::path& csv_path) {
  if (result.trials.empty())
    throw std::invalid_argument("emit_figure_data: no trials in result");
  const std::size_t epochs = result.trials[0].epochs.size();
  const double inv_n = 1.0 / static_cast<double>(result.trials.size());

  std::ofstream out(csv_path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + csv_path.string());

  if (figure == "correctness") {
    out << "epoch,pseudo_label_correctness\n";
    for (std::size_t e = 0; e < epochs; ++e) {
      double mean = 0.0;
      for (const auto& t : result.trials) mean += t.epochs[e].pseudo_label_correctness;
      out << (e + 1) << ',' << format_metric(mean * inv_n) << '\n';
    }
  } else if (figure == "accuracy") {
    out << "epoch,individual_mean,individual_std,consensus_accuracy\n";
    for (std::size_t e = 0; e < epochs; ++e) {
      double mean = 0.0, std = 0.0, cons = 0.0;
      for (const auto& t : result.trials) {
        mean += t.epochs[e].individual_accuracy_mean;
        std += t.epochs[e].individual_accuracy_std;
        cons += t.epochs[e].test_accuracy;
      }
      out << (e + 1) << ',' << format_metric(mean * inv_n) << ','
          << format_metric(std * inv_n) << ',' << format_metric(cons * inv_n) << '\n';
    }
  } else if (figure == "threshold") {
    out << "epoch,theta\n";
    for (std::size_t e = 0; e < epochs; ++e) {
      double mean = 0.0;
      for (const auto& t : result.trials) mean += t.epochs[e].theta;
      out << (e + 1) << ',' << format_metric(mean * inv_n) << '\n';
    }
  } else {
    throw std::invalid_argument("emit_figure_data: unknown figure '" + figure + "'");
  }
}

void emit_sweep_figure(const SweepResult& result, const std::string& figure,
                       const fs::path& csv_path) {
  if (figure == "noise" && result.base_config.sweep.q.empty())
    throw std::invalid_argument("emit_sweep_figure: the sweep has no q axis");
  if (figure != "noise" && figure != "sensitivity")
    throw std::invalid_argument("emit_sweep_figure: unknown figure '" + figure + "'");

  std::ofstream out(csv_path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + csv_path.string());
  if (figure == "noise") {
    out << "q,mean_test_accuracy,std_test_accuracy\n";
    for (const auto& r : result.rows)
      out << format_metric(r.q) << ',' << format_metric(r.mean_accuracy) << ','
          << format_metric(r.std_accuracy) << '\n';
  } else {
    out << "k,alpha,p_drop,mean_test_accuracy,std_test_accuracy\n";
    for (const auto& r : result.rows)
      out << r.k << ',' << format_metric(r.alpha) << ',' << format_metric(r.p_drop) << ','
          << format_metric(r.mean_accuracy) << ',' << format_metric(r.std_accuracy) << '\n';
  }
}

}  // namespace a3gcn
