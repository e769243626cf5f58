#include "a3gcn/gcn.hpp"

#include <cmath>
#include <stdexcept>

namespace a3gcn {

SparseFeatures SparseFeatures::from_dense(const DenseMatrix& x) {
  SparseFeatures f;
  f.rows = x.rows();
  f.cols = x.cols();
  f.offsets.assign(f.rows + 1, 0);
  for (int i = 0; i < x.rows(); ++i) {
    const double* row = x.row(i);
    for (int j = 0; j < x.cols(); ++j) {
      if (row[j] != 0.0) {
        f.index.push_back(j);
        f.values.push_back(row[j]);
      }
    }
    f.offsets[i + 1] = static_cast<int>(f.index.size());
  }
  return f;
}

DenseMatrix SparseFeatures::to_dense() const {
  DenseMatrix x(rows, cols, 0.0);
  for (int i = 0; i < rows; ++i)
    for (int k = offsets[i]; k < offsets[i + 1]; ++k) x(i, index[k]) = values[k];
  return x;
}

DenseMatrix SparseFeatures::multiply(const DenseMatrix& w) const {
  if (w.rows() != cols)
    throw std::invalid_argument("SparseFeatures::multiply: shape mismatch");
  DenseMatrix out(rows, w.cols(), 0.0);
  for (int i = 0; i < rows; ++i) {
    double* orow = out.row(i);
    for (int k = offsets[i]; k < offsets[i + 1]; ++k) {
      const double v = values[k];
      if (v == 0.0) continue;
      const double* wrow = w.row(index[k]);
      for (int c = 0; c < w.cols(); ++c) orow[c] += v * wrow[c];
    }
  }
  return out;
}

DenseMatrix SparseFeatures::transpose_multiply(const DenseMatrix& g) const {
  if (g.rows() != rows)
    throw std::invalid_argument("SparseFeatures::transpose_multiply: shape mismatch");
  DenseMatrix out(cols, g.cols(), 0.0);
  for (int i = 0; i < rows; ++i) {
    const double* grow = g.row(i);
    for (int k = offsets[i]; k < offsets[i + 1]; ++k) {
      const double v = values[k];
      if (v == 0.0) continue;
      double* orow = out.row(index[k]);
      for (int c = 0; c < g.cols(); ++c) orow[c] += v * grow[c];
    }
  }
  return out;
}

namespace {

// Substream purposes within one model's stream.
constexpr std::uint64_t kStreamW1 = 0;
constexpr std::uint64_t kStreamW2 = 1;
constexpr std::uint64_t kStreamDropout = 2;

// Layer ids within one step's dropout stream.
constexpr std::uint64_t kInputLayer = 0;
constexpr std::uint64_t kHiddenLayer = 1;

}  // namespace

GcnModel::GcnModel(const GcnConfig& config, Rng rng) : config_(config), rng_(rng) {
  if (config.in_dim <= 0 || config.hidden_dim <= 0 || config.num_classes <= 0)
    throw std::invalid_argument("GcnModel: dimensions must be positive");
  if (config.dropout < 0.0 || config.dropout >= 1.0)
    throw std::invalid_argument("GcnModel: dropout must be in [0, 1)");
  Rng r1 = rng_.substream(kStreamW1);
  Rng r2 = rng_.substream(kStreamW2);
  w1_ = glorot_init(config.in_dim, config.hidden_dim, r1);
  w2_ = glorot_init(config.hidden_dim, config.num_classes, r2);
  adam1_ = AdamState::for_param(config.in_dim, config.hidden_dim, config.lr, config.weight_decay);
  adam2_ = AdamState::for_param(config.hidden_dim, config.num_classes, config.lr, 0.0);
}

ForwardCache GcnModel::forward(const SparseGraph& g, const SparseFeatures& x,
                               bool training) const {
  if (x.rows != g.num_nodes)
    throw std::invalid_argument("GcnModel::forward: feature rows != num_nodes");
  if (x.cols != config_.in_dim)
    throw std::invalid_argument("GcnModel::forward: feature dim != in_dim");

  const double p = config_.dropout;
  const Rng step_rng = rng_.substream(kStreamDropout).substream(static_cast<std::uint64_t>(step_count_));

  ForwardCache cache;

  // Input dropout stays on the sparse nonzeros; draws are indexed by the
  // entry's dense position, so this matches the dense dropout op draw for
  // draw on any shared substream.
  cache.x_in = x;
  if (training && config_.input_dropout && p > 0.0) {
    const Rng in_rng = step_rng.substream(kInputLayer);
    const double scale = 1.0 / (1.0 - p);
    for (int i = 0; i < x.rows; ++i) {
      for (int k = x.offsets[i]; k < x.offsets[i + 1]; ++k) {
        const std::uint64_t entry =
            static_cast<std::uint64_t>(i) * x.cols + x.index[k];
        const bool keep = in_rng.uniform_at(entry) >= p;
        cache.x_in.values[k] = keep ? x.values[k] * scale : 0.0;
      }
    }
  }

  cache.z1 = spmm(g, cache.x_in.multiply(w1_));
  cache.h1 = relu(cache.z1);

  if (training && p > 0.0) {
    Rng hid_rng = step_rng.substream(kHiddenLayer);
    DropoutResult d = dropout(cache.h1, p, hid_rng, true);
    cache.h1_drop = std::move(d.out);
    cache.h1_mask = std::move(d.mask);
    cache.hidden_scale = 1.0 / (1.0 - p);
  } else {
    cache.h1_drop = cache.h1;
    cache.h1_mask = DenseMatrix(cache.h1.rows(), cache.h1.cols(), 1.0);
    cache.hidden_scale = 1.0;
  }

  cache.ah1 = spmm(g, cache.h1_drop);
  cache.z2 = matmul(cache.ah1, w2_);
  cache.probs = softmax_rows(cache.z2);
  return cache;
}

std::pair<DenseMatrix, DenseMatrix> GcnModel::backward(
    const SparseGraph& g, const ForwardCache& cache,
    const DenseMatrix& grad_logits) const {
  if (!grad_logits.same_shape(cache.probs))
    throw std::invalid_argument("GcnModel::backward: grad_logits shape mismatch");

  DenseMatrix grad_w2 = matmul_tn(cache.ah1, grad_logits);

  DenseMatrix grad_h1d = spmm(g, matmul_nt(grad_logits, w2_));
  // Back through the hidden dropout: survivors carried a 1/(1-p) scale.
  DenseMatrix grad_h1(grad_h1d.rows(), grad_h1d.cols());
  for (std::size_t i = 0; i < grad_h1d.size(); ++i)
    grad_h1.data()[i] =
        grad_h1d.data()[i] * cache.h1_mask.data()[i] * cache.hidden_scale;

  DenseMatrix grad_z1 = relu_backward(cache.z1, grad_h1);
  DenseMatrix grad_w1 = cache.x_in.transpose_multiply(spmm(g, grad_z1));
  return {std::move(grad_w1), std::move(grad_w2)};
}

double GcnModel::train_step(const SparseGraph& g, const SparseFeatures& x,
                            const std::vector<int>& labels,
                            const std::vector<int>& mask) {
  if (mask.empty()) return 0.0;
  ForwardCache cache = forward(g, x, true);
  CrossEntropyResult ce = masked_cross_entropy(cache.probs, labels, mask);
  auto [grad_w1, grad_w2] = backward(g, cache, ce.grad_logits);
  adam_step(w1_, grad_w1, adam1_);
  adam_step(w2_, grad_w2, adam2_);
  ++step_count_;
  if (!w1_.all_finite() || !w2_.all_finite())
    throw std::runtime_error("GcnModel::train_step: non-finite parameters");
  return ce.loss;
}

Prediction GcnModel::predict(const SparseGraph& g, const SparseFeatures& x) const {
  ForwardCache cache = forward(g, x, false);
  Prediction pred;
  pred.labels.resize(cache.probs.rows());
  pred.confidence.resize(cache.probs.rows());
  for (int i = 0; i < cache.probs.rows(); ++i) {
    const double* row = cache.probs.row(i);
    int best = 0;
    for (int c = 1; c < cache.probs.cols(); ++c)
      if (row[c] > row[best]) best = c;
    pred.labels[i] = best;
    pred.confidence[i] = row[best];
  }
  pred.probs = std::move(cache.probs);
  return pred;
}

DenseMatrix GcnModel::hidden_embeddings(const SparseGraph& g,
                                        const SparseFeatures& x) const {
  return relu(spmm(g, x.multiply(w1_)));
}

}  // namespace a3gcn
