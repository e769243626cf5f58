#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include "a3gcn/dense_matrix.hpp"
#include "a3gcn/graph.hpp"
#include "a3gcn/rng.hpp"

namespace a3gcn {

/// A node-classification problem instance: undirected graph, node features,
/// ground-truth labels, and disjoint train/val/test masks.
struct Dataset {
  int num_nodes = 0;
  int num_classes = 0;
  EdgeList edges;
  DenseMatrix features;       // num_nodes x feature_dim
  std::vector<int> labels;    // length num_nodes, values in [0, num_classes)
  std::vector<int> train_mask;
  std::vector<int> val_mask;
  std::vector<int> test_mask;

  int feature_dim() const { return features.cols(); }

  /// Checks the structural invariants (disjoint masks, label ranges, every
  /// class present in the training mask, finite features). Throws on
  /// violation.
  void validate() const;
};

struct LoadError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct MissingFileError : LoadError {
  using LoadError::LoadError;
};
struct DimensionMismatchError : LoadError {
  using LoadError::LoadError;
};
struct LabelRangeError : LoadError {
  using LoadError::LoadError;
};
struct FormatError : LoadError {
  using LoadError::LoadError;
};

/// Reads a bundle directory: meta.json, edges.csv, features.csv, labels.csv,
/// splits.json. Validates shapes against the metadata and the dataset
/// invariants.
Dataset load_bundle(const std::filesystem::path& dir);

/// Writes a dataset as a bundle. Reals are printed with full round-trip
/// precision so load_bundle(write_bundle(d)) == d exactly.
void write_bundle(const Dataset& d, const std::filesystem::path& dir);

struct SbmParams {
  int num_nodes = 400;
  int num_classes = 4;
  double p_intra = 0.05;
  double p_inter = 0.005;
  int feature_dim = 4;
  double feature_noise = 1.0;
};

/// Planted-partition graph with class-centroid features. Node i belongs to
/// class i % C; each within-class pair gets an edge with probability p_intra
/// and each cross-class pair with p_inter. Feature row = one-hot centroid of
/// the class plus N(0, feature_noise^2) noise. Split: 20 labeled nodes per
/// class, up to 500 validation nodes (at most half of the remainder so the
/// test set is never empty), rest test.
Dataset generate_sbm(const SbmParams& params, Rng& rng);

/// Replaces the training mask with exactly per_class random nodes per class.
/// Validation keeps the previous split minus any newly drawn training nodes;
/// everything else is test.
Dataset make_label_rate_split(const Dataset& d, int per_class, Rng& rng);

/// Removes every edge whose endpoints have different labels, then adds
/// floor(q * |E_clean|) distinct new cross-class edges sampled uniformly,
/// where E_clean is the surviving intra-class edge set.
Dataset inject_noisy_edges(const Dataset& d, double q, Rng& rng);

struct EmbeddingFlags {
  std::vector<std::uint8_t> high_confidence;  // node is high-confidence in >= 1 model
  std::vector<std::uint8_t> agreed;           // node is in the consensus set
};

/// Writes one CSV row per node: id, embedding vector, label, flags.
void export_embeddings(const DenseMatrix& embeddings, const std::vector<int>& labels,
                       const EmbeddingFlags& flags, const std::filesystem::path& path);

}  // namespace a3gcn
