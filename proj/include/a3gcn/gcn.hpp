#pragma once

#include <cstdint>
#include <vector>

#include "a3gcn/dense_matrix.hpp"
#include "a3gcn/graph.hpp"
#include "a3gcn/nn.hpp"
#include "a3gcn/rng.hpp"

namespace a3gcn {

/// Read-only CSR view over the nonzero entries of a feature matrix. Citation
/// features are sparse bag-of-words vectors, and the input-layer products
/// dominate training cost, so the model consumes features in this form.
struct SparseFeatures {
  int rows = 0;
  int cols = 0;
  std::vector<int> offsets;  // length rows + 1
  std::vector<int> index;    // feature ids, ascending within each row
  std::vector<double> values;

  static SparseFeatures from_dense(const DenseMatrix& x);
  DenseMatrix to_dense() const;

  /// result = features * w  (rows x cols(w)).
  DenseMatrix multiply(const DenseMatrix& w) const;

  /// result += transpose(features) * g, accumulated into a cols x cols(g)
  /// matrix.
  DenseMatrix transpose_multiply(const DenseMatrix& g) const;
};

struct GcnConfig {
  int in_dim = 0;
  int hidden_dim = 16;
  int num_classes = 0;
  double dropout = 0.5;
  bool input_dropout = true;
  double lr = 0.01;
  double weight_decay = 5e-4;  // applied to the first layer only
};

/// Intermediates of one forward pass, kept for the exact backward pass.
struct ForwardCache {
  SparseFeatures x_in;    // post input-dropout features (values pre-scaled)
  DenseMatrix z1;         // A^ * x_in * W1
  DenseMatrix h1;         // relu(z1)
  DenseMatrix h1_drop;    // hidden dropout applied to h1
  DenseMatrix h1_mask;    // 0/1 keep mask for the hidden dropout
  double hidden_scale = 1.0;  // 1/(1-p) when the hidden dropout was active
  DenseMatrix ah1;        // A^ * h1_drop
  DenseMatrix z2;         // ah1 * W2
  DenseMatrix probs;      // softmax(z2)
};

struct Prediction {
  std::vector<int> labels;        // argmax per row, ties to the lowest class
  std::vector<double> confidence; // max softmax probability per row
  DenseMatrix probs;
};

/// Two-layer graph convolutional classifier with a manual backward pass and
/// per-parameter Adam state. Training dropout masks are a pure function of
/// (model seed, step count), which keeps gradient checks and re-runs exact.
class GcnModel {
 public:
  GcnModel(const GcnConfig& config, Rng rng);

  ForwardCache forward(const SparseGraph& g, const SparseFeatures& x, bool training) const;

  /// Gradients of the masked cross-entropy loss w.r.t. both weight matrices.
  /// grad_logits must come from masked_cross_entropy on cache.probs.
  std::pair<DenseMatrix, DenseMatrix> backward(const SparseGraph& g,
                                               const ForwardCache& cache,
                                               const DenseMatrix& grad_logits) const;

  /// One forward/backward/Adam cycle on the masked nodes; returns the
  /// pre-step loss. An empty mask is a no-op returning 0.
  double train_step(const SparseGraph& g, const SparseFeatures& x,
                    const std::vector<int>& labels, const std::vector<int>& mask);

  Prediction predict(const SparseGraph& g, const SparseFeatures& x) const;

  /// Eval-mode hidden activations h1 (rows x hidden_dim).
  DenseMatrix hidden_embeddings(const SparseGraph& g, const SparseFeatures& x) const;

  const GcnConfig& config() const { return config_; }
  DenseMatrix& w1() { return w1_; }
  DenseMatrix& w2() { return w2_; }
  const DenseMatrix& w1() const { return w1_; }
  const DenseMatrix& w2() const { return w2_; }
  long step_count() const { return step_count_; }

 private:
  GcnConfig config_;
  DenseMatrix w1_, w2_;
  AdamState adam1_, adam2_;
  Rng rng_;
  long step_count_ = 0;
};

}  // namespace a3gcn
