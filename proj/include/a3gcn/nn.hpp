#pragma once

#include <vector>

#include "a3gcn/dense_matrix.hpp"
#include "a3gcn/rng.hpp"

namespace a3gcn {

DenseMatrix relu(const DenseMatrix& x);

/// Gradient through relu: grad * 1[x > 0].
DenseMatrix relu_backward(const DenseMatrix& x, const DenseMatrix& grad);

/// Row-wise softmax, max-shifted for stability. Every output row sums to 1
/// within 1e-9 and all entries lie in (0, 1).
DenseMatrix softmax_rows(const DenseMatrix& x);

struct CrossEntropyResult {
  double loss = 0.0;
  DenseMatrix grad_logits;  // gradient w.r.t. pre-softmax logits
};

/// Mean negative log-likelihood over the masked rows. The gradient is taken
/// with respect to the logits that produced `probs` (softmax folded in):
/// (probs_u - onehot_u) / |mask| on masked rows, zero elsewhere.
/// An empty mask yields loss 0 and a zero gradient.
CrossEntropyResult masked_cross_entropy(const DenseMatrix& probs,
                                        const std::vector<int>& labels,
                                        const std::vector<int>& mask);

struct DropoutResult {
  DenseMatrix out;
  DenseMatrix mask;  // 0/1 keep mask
};

/// Inverted dropout: in training mode each entry is zeroed independently with
/// probability p and survivors are scaled by 1/(1-p); in eval mode the input
/// passes through and the mask is all ones. Draws one uniform per entry in
/// row-major order. Requires 0 <= p < 1.
DropoutResult dropout(const DenseMatrix& x, double p, Rng& rng, bool training);

struct AdamState {
  DenseMatrix first_moment;
  DenseMatrix second_moment;
  long step_count = 0;
  double lr = 0.01;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double weight_decay = 0.0;

  static AdamState for_param(int rows, int cols, double lr, double weight_decay);
};

/// One Adam update with bias correction. Weight decay is decoupled:
/// param <- param * (1 - lr * weight_decay) before the moment update.
void adam_step(DenseMatrix& param, const DenseMatrix& grad, AdamState& state);

/// Uniform init in [-a, a], a = sqrt(6 / (rows + cols)).
DenseMatrix glorot_init(int rows, int cols, Rng& rng);

}  // namespace a3gcn
