#include "a3gcn/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <unordered_set>

#include <json.hpp>

namespace a3gcn {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string read_text_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw MissingFileError("missing file: " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

json read_json_file(const fs::path& path) {
  const std::string text = read_text_file(path);
  json j = json::parse(text, nullptr, false);
  if (j.is_discarded()) throw FormatError("malformed JSON: " + path.string());
  return j;
}

double parse_real(std::string_view token, const fs::path& path) {
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
  if (ec != std::errc() || ptr != token.data() + token.size())
    throw FormatError("bad number '" + std::string(token) + "' in " + path.string());
  return value;
}

long parse_int(std::string_view token, const fs::path& path) {
  long value = 0;
  auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
  if (ec != std::errc() || ptr != token.data() + token.size())
    throw FormatError("bad integer '" + std::string(token) + "' in " + path.string());
  return value;
}

std::string format_real(double v) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  (void)ec;
  return std::string(buf, ptr);
}

// Splits text into non-empty lines; tolerates a trailing newline.
std::vector<std::string_view> split_lines(const std::string& text) {
  std::vector<std::string_view> lines;
  std::size_t start = 0;
  while (start < text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string::npos) end = text.size();
    std::size_t len = end - start;
    if (len > 0 && text[start + len - 1] == '\r') --len;
    if (len > 0) lines.emplace_back(text.data() + start, len);
    start = end + 1;
  }
  return lines;
}

std::vector<int> mask_from_json(const json& j, const char* key, int num_nodes,
                                const fs::path& path) {
  if (!j.contains(key)) throw FormatError(std::string("splits.json missing key '") + key + "'");
  std::vector<int> ids;
  for (const auto& v : j.at(key)) {
    const int id = v.get<int>();
    if (id < 0 || id >= num_nodes)
      throw DimensionMismatchError("split id " + std::to_string(id) +
                                   " out of range in " + path.string());
    ids.push_back(id);
  }
  std::sort(ids.begin(), ids.end());
  return ids;
}

// Fisher-Yates prefix: uniform sample of `count` items without replacement.
std::vector<int> sample_without_replacement(std::vector<int> pool, std::size_t count,
                                            Rng& rng) {
  for (std::size_t i = 0; i < count; ++i) {
    const std::size_t j = i + rng.next_below(pool.size() - i);
    std::swap(pool[i], pool[j]);
  }
  pool.resize(count);
  std::sort(pool.begin(), pool.end());
  return pool;
}

}  // namespace

void Dataset::validate() const {
  if (features.rows() != num_nodes)
    throw DimensionMismatchError("feature row count != num_nodes");
  if (static_cast<int>(labels.size()) != num_nodes)
    throw DimensionMismatchError("label count != num_nodes");
  if (!features.all_finite()) throw FormatError("non-finite feature value");
  for (int y : labels)
    if (y < 0 || y >= num_classes)
      throw LabelRangeError("label out of range [0, " + std::to_string(num_classes) + ")");

  std::vector<int> seen(num_nodes, 0);
  for (const auto* mask : {&train_mask, &val_mask, &test_mask}) {
    for (int u : *mask) {
      if (u < 0 || u >= num_nodes)
        throw DimensionMismatchError("mask id out of range");
      if (seen[u]++) throw FormatError("train/val/test masks overlap at node " + std::to_string(u));
    }
  }
  std::vector<int> in_train(num_classes, 0);
  for (int u : train_mask) in_train[labels[u]] = 1;
  for (int c = 0; c < num_classes; ++c)
    if (!in_train[c])
      throw FormatError("class " + std::to_string(c) + " missing from training mask");
}

Dataset load_bundle(const fs::path& dir) {
  const json meta = read_json_file(dir / "meta.json");
  Dataset d;
  try {
    d.num_nodes = meta.at("num_nodes").get<int>();
    d.num_classes = meta.at("num_classes").get<int>();
  } catch (const json::exception& e) {
    throw FormatError("meta.json: " + std::string(e.what()));
  }
  const int feature_dim = meta.value("feature_dim", -1);
  if (d.num_nodes <= 0 || d.num_classes <= 0 || feature_dim <= 0)
    throw FormatError("meta.json: non-positive shape field");

  {
    const fs::path path = dir / "edges.csv";
    const std::string text = read_text_file(path);
    for (std::string_view line : split_lines(text)) {
      const std::size_t comma = line.find(',');
      if (comma == std::string_view::npos)
        throw FormatError("edges.csv: expected 'u,v' in " + path.string());
      const int u = static_cast<int>(parse_int(line.substr(0, comma), path));
      const int v = static_cast<int>(parse_int(line.substr(comma + 1), path));
      if (u < 0 || v < 0 || u >= d.num_nodes || v >= d.num_nodes)
        throw DimensionMismatchError("edges.csv: node id out of range");
      if (u >= v) throw FormatError("edges.csv: edges must satisfy u < v");
      d.edges.edges.emplace_back(u, v);
    }
  }

  {
    const fs::path path = dir / "features.csv";
    const std::string text = read_text_file(path);
    const auto lines = split_lines(text);
    if (static_cast<int>(lines.size()) != d.num_nodes)
      throw DimensionMismatchError("features.csv has " + std::to_string(lines.size()) +
                                   " rows, expected " + std::to_string(d.num_nodes));
    d.features = DenseMatrix(d.num_nodes, feature_dim);
    for (int i = 0; i < d.num_nodes; ++i) {
      std::string_view line = lines[i];
      int j = 0;
      std::size_t start = 0;
      while (start <= line.size()) {
        std::size_t comma = line.find(',', start);
        if (comma == std::string_view::npos) comma = line.size();
        if (j >= feature_dim)
          throw DimensionMismatchError("features.csv row " + std::to_string(i) +
                                       " has more than " + std::to_string(feature_dim) +
                                       " columns");
        d.features(i, j++) = parse_real(line.substr(start, comma - start), path);
        start = comma + 1;
      }
      if (j != feature_dim)
        throw DimensionMismatchError("features.csv row " + std::to_string(i) + " has " +
                                     std::to_string(j) + " columns, expected " +
                                     std::to_string(feature_dim));
    }
  }

  {
    const fs::path path = dir / "labels.csv";
    const std::string text = read_text_file(path);
    const auto lines = split_lines(text);
    if (static_cast<int>(lines.size()) != d.num_nodes)
      throw DimensionMismatchError("labels.csv has " + std::to_string(lines.size()) +
                                   " rows, expected " + std::to_string(d.num_nodes));
    d.labels.reserve(d.num_nodes);
    for (const auto& line : lines) {
      const long y = parse_int(line, path);
      if (y < 0 || y >= d.num_classes)
        throw LabelRangeError("labels.csv: label " + std::to_string(y) +
                              " out of range [0, " + std::to_string(d.num_classes) + ")");
      d.labels.push_back(static_cast<int>(y));
    }
  }

  {
    const fs::path path = dir / "splits.json";
    const json splits = read_json_file(path);
    d.train_mask = mask_from_json(splits, "train", d.num_nodes, path);
    d.val_mask = mask_from_json(splits, "val", d.num_nodes, path);
    d.test_mask = mask_from_json(splits, "test", d.num_nodes, path);
  }

  d.validate();
  return d;
}

void write_bundle(const Dataset& d, const fs::path& dir) {
  fs::create_directories(dir);

  {
    json meta;
    meta["num_nodes"] = d.num_nodes;
    meta["num_classes"] = d.num_classes;
    meta["feature_dim"] = d.feature_dim();
    std::ofstream out(dir / "meta.json", std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + (dir / "meta.json").string());
    out << meta.dump(2) << "\n";
  }
  {
    std::ofstream out(dir / "edges.csv", std::ios::binary);
    for (const auto& [u, v] : d.edges.edges) out << u << ',' << v << '\n';
  }
  {
    std::ofstream out(dir / "features.csv", std::ios::binary);
    for (int i = 0; i < d.num_nodes; ++i) {
      for (int j = 0; j < d.feature_dim(); ++j) {
        if (j) out << ',';
        out << format_real(d.features(i, j));
      }
      out << '\n';
    }
  }
  {
    std::ofstream out(dir / "labels.csv", std::ios::binary);
    for (int y : d.labels) out << y << '\n';
  }
  {
    json splits;
    splits["train"] = d.train_mask;
    splits["val"] = d.val_mask;
    splits["test"] = d.test_mask;
    std::ofstream out(dir / "splits.json", std::ios::binary);
    out << splits.dump(2) << "\n";
  }
}

Dataset generate_sbm(const SbmParams& params, Rng& rng) {
  if (params.num_nodes <= 0 || params.num_classes <= 0)
    throw std::invalid_argument("generate_sbm: non-positive shape");
  if (params.p_intra < 0.0 || params.p_intra > 1.0 || params.p_inter < 0.0 ||
      params.p_inter > 1.0)
    throw std::invalid_argument("generate_sbm: probabilities must be in [0, 1]");
  if (params.feature_dim < params.num_classes)
    throw std::invalid_argument("generate_sbm: feature_dim must be >= num_classes");

  Dataset d;
  d.num_nodes = params.num_nodes;
  d.num_classes = params.num_classes;
  d.labels.resize(params.num_nodes);
  for (int i = 0; i < params.num_nodes; ++i) d.labels[i] = i % params.num_classes;

  Rng edge_rng = rng.substream(0);
  for (int u = 0; u < params.num_nodes; ++u) {
    for (int v = u + 1; v < params.num_nodes; ++v) {
      const double p = d.labels[u] == d.labels[v] ? params.p_intra : params.p_inter;
      if (edge_rng.next_uniform() < p) d.edges.edges.emplace_back(u, v);
    }
  }

  Rng feat_rng = rng.substream(1);
  d.features = DenseMatrix(params.num_nodes, params.feature_dim);
  for (int i = 0; i < params.num_nodes; ++i) {
    for (int j = 0; j < params.feature_dim; ++j) {
      const double centroid = j == d.labels[i] ? 1.0 : 0.0;
      d.features(i, j) = centroid + params.feature_noise * feat_rng.next_normal();
    }
  }

  Rng split_rng = rng.substream(2);
  constexpr int kLabeledPerClass = 20;
  std::vector<int> rest;
  for (int c = 0; c < params.num_classes; ++c) {
    std::vector<int> members;
    for (int i = c; i < params.num_nodes; i += params.num_classes) members.push_back(i);
    if (static_cast<int>(members.size()) < kLabeledPerClass)
      throw std::invalid_argument("generate_sbm: class smaller than 20 nodes");
    std::vector<int> chosen = sample_without_replacement(members, kLabeledPerClass, split_rng);
    d.train_mask.insert(d.train_mask.end(), chosen.begin(), chosen.end());
    std::vector<int> out;
    std::set_difference(members.begin(), members.end(), chosen.begin(), chosen.end(),
                        std::back_inserter(out));
    rest.insert(rest.end(), out.begin(), out.end());
  }
  std::sort(d.train_mask.begin(), d.train_mask.end());
  std::sort(rest.begin(), rest.end());
  const std::size_t val_size =
      std::min<std::size_t>(500, rest.size() / 2);
  d.val_mask = sample_without_replacement(rest, val_size, split_rng);
  std::vector<int> test;
  std::set_difference(rest.begin(), rest.end(), d.val_mask.begin(), d.val_mask.end(),
                      std::back_inserter(test));
  d.test_mask = std::move(test);

  d.validate();
  return d;
}

Dataset make_label_rate_split(const Dataset& d, int per_class, Rng& rng) {
  if (per_class < 1)
    throw std::invalid_argument("make_label_rate_split: per_class must be >= 1");

  Dataset out = d;
  out.train_mask.clear();
  for (int c = 0; c < d.num_classes; ++c) {
    std::vector<int> members;
    for (int i = 0; i < d.num_nodes; ++i)
      if (d.labels[i] == c) members.push_back(i);
    if (static_cast<int>(members.size()) < per_class)
      throw std::invalid_argument("make_label_rate_split: class " + std::to_string(c) +
                                  " has fewer than " + std::to_string(per_class) + " nodes");
    std::vector<int> chosen = sample_without_replacement(members, per_class, rng);
    out.train_mask.insert(out.train_mask.end(), chosen.begin(), chosen.end());
  }
  std::sort(out.train_mask.begin(), out.train_mask.end());

  out.val_mask.clear();
  std::set_difference(d.val_mask.begin(), d.val_mask.end(), out.train_mask.begin(),
                      out.train_mask.end(), std::back_inserter(out.val_mask));

  std::vector<int> taken = out.train_mask;
  taken.insert(taken.end(), out.val_mask.begin(), out.val_mask.end());
  std::sort(taken.begin(), taken.end());
  out.test_mask.clear();
  for (int i = 0; i < d.num_nodes; ++i)
    if (!std::binary_search(taken.begin(), taken.end(), i)) out.test_mask.push_back(i);

  out.validate();
  return out;
}

Dataset inject_noisy_edges(const Dataset& d, double q, Rng& rng) {
  if (q < 0.0) throw std::invalid_argument("inject_noisy_edges: q must be >= 0");

  Dataset out = d;
  out.edges.edges.clear();
  for (const auto& e : d.edges.edges)
    if (d.labels[e.first] == d.labels[e.second]) out.edges.edges.push_back(e);
  const std::size_t clean_count = out.edges.edges.size();
  const std::size_t target = static_cast<std::size_t>(q * static_cast<double>(clean_count));

  std::vector<std::size_t> class_sizes(d.num_classes, 0);
  for (int y : d.labels) ++class_sizes[y];
  std::size_t cross_pairs = 0;
  for (int a = 0; a < d.num_classes; ++a)
    for (int b = a + 1; b < d.num_classes; ++b) cross_pairs += class_sizes[a] * class_sizes[b];
  if (target > cross_pairs)
    throw std::invalid_argument("inject_noisy_edges: q exhausts distinct inter-class pairs");

  std::unordered_set<std::uint64_t> seen;
  seen.reserve(target * 2);
  std::size_t added = 0;
  while (added < target) {
    const int u = static_cast<int>(rng.next_below(d.num_nodes));
    const int v = static_cast<int>(rng.next_below(d.num_nodes));
    if (u == v || d.labels[u] == d.labels[v]) continue;
    const int a = std::min(u, v), b = std::max(u, v);
    const std::uint64_t key = static_cast<std::uint64_t>(a) * d.num_nodes + b;
    if (!seen.insert(key).second) continue;
    out.edges.edges.emplace_back(a, b);
    ++added;
  }
  std::sort(out.edges.edges.begin(), out.edges.edges.end());
  return out;
}

void export_embeddings(const DenseMatrix& embeddings, const std::vector<int>& labels,
                       const EmbeddingFlags& flags, const fs::path& path) {
  const int n = embeddings.rows();
  if (static_cast<int>(labels.size()) != n ||
      static_cast<int>(flags.high_confidence.size()) != n ||
      static_cast<int>(flags.agreed.size()) != n)
    throw std::invalid_argument("export_embeddings: length mismatch");

  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("export_embeddings: cannot write " + path.string());
  out << "node";
  for (int j = 0; j < embeddings.cols(); ++j) out << ",e" << j;
  out << ",label,high_confidence,agreed\n";
  for (int i = 0; i < n; ++i) {
    out << i;
    for (int j = 0; j < embeddings.cols(); ++j) out << ',' << format_real(embeddings(i, j));
    out << ',' << labels[i] << ',' << int(flags.high_confidence[i]) << ','
        << int(flags.agreed[i]) << '\n';
  }
}

}  // namespace a3gcn
