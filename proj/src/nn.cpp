#include "a3gcn/nn.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace a3gcn {

DenseMatrix relu(const DenseMatrix& x) {
  DenseMatrix out(x.rows(), x.cols());
  for (std::size_t i = 0; i < x.size(); ++i) out.data()[i] = std::max(0.0, x.data()[i]);
  return out;
}

DenseMatrix relu_backward(const DenseMatrix& x, const DenseMatrix& grad) {
  if (!x.same_shape(grad))
    throw std::invalid_argument("relu_backward: shape mismatch");
  DenseMatrix out(x.rows(), x.cols());
  for (std::size_t i = 0; i < x.size(); ++i)
    out.data()[i] = x.data()[i] > 0.0 ? grad.data()[i] : 0.0;
  return out;
}

DenseMatrix softmax_rows(const DenseMatrix& x) {
  DenseMatrix out(x.rows(), x.cols());
  for (int i = 0; i < x.rows(); ++i) {
    const double* in = x.row(i);
    double* o = out.row(i);
    double mx = in[0];
    for (int j = 1; j < x.cols(); ++j) mx = std::max(mx, in[j]);
    double sum = 0.0;
    for (int j = 0; j < x.cols(); ++j) {
      o[j] = std::exp(in[j] - mx);
      sum += o[j];
    }
    for (int j = 0; j < x.cols(); ++j) o[j] /= sum;
  }
  return out;
}

CrossEntropyResult masked_cross_entropy(const DenseMatrix& probs,
                                        const std::vector<int>& labels,
                                        const std::vector<int>& mask) {
  CrossEntropyResult res;
  res.grad_logits = DenseMatrix(probs.rows(), probs.cols(), 0.0);
  if (mask.empty()) return res;

  const double inv_m = 1.0 / static_cast<double>(mask.size());
  double loss = 0.0;
  for (int u : mask) {
    if (u < 0 || u >= probs.rows())
      throw std::invalid_argument("masked_cross_entropy: node id out of range");
    const int y = labels[u];
    if (y < 0 || y >= probs.cols())
      throw std::invalid_argument("masked_cross_entropy: label out of range");
    loss -= std::log(std::max(probs(u, y), 1e-300));
    const double* p = probs.row(u);
    double* grow = res.grad_logits.row(u);
    for (int c = 0; c < probs.cols(); ++c) grow[c] = p[c] * inv_m;
    grow[y] -= inv_m;
  }
  res.loss = loss * inv_m;
  return res;
}

DropoutResult dropout(const DenseMatrix& x, double p, Rng& rng, bool training) {
  if (p < 0.0 || p >= 1.0)
    throw std::invalid_argument("dropout: p must be in [0, 1)");
  DropoutResult res;
  if (!training || p == 0.0) {
    res.out = x;
    res.mask = DenseMatrix(x.rows(), x.cols(), 1.0);
    return res;
  }
  res.out = DenseMatrix(x.rows(), x.cols());
  res.mask = DenseMatrix(x.rows(), x.cols());
  const double scale = 1.0 / (1.0 - p);
  for (std::size_t i = 0; i < x.size(); ++i) {
    const bool keep = rng.next_uniform() >= p;
    res.mask.data()[i] = keep ? 1.0 : 0.0;
    res.out.data()[i] = keep ? x.data()[i] * scale : 0.0;
  }
  return res;
}

AdamState AdamState::for_param(int rows, int cols, double lr, double weight_decay) {
  AdamState st;
  st.first_moment = DenseMatrix(rows, cols, 0.0);
  st.second_moment = DenseMatrix(rows, cols, 0.0);
  st.lr = lr;
  st.weight_decay = weight_decay;
  return st;
}

void adam_step(DenseMatrix& param, const DenseMatrix& grad, AdamState& state) {
  if (!param.same_shape(grad) || !param.same_shape(state.first_moment))
    throw std::invalid_argument("adam_step: shape mismatch");

  ++state.step_count;
  if (state.weight_decay != 0.0) {
    const double shrink = 1.0 - state.lr * state.weight_decay;
    for (std::size_t i = 0; i < param.size(); ++i) param.data()[i] *= shrink;
  }
  const double bc1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.step_count));
  const double bc2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.step_count));
  for (std::size_t i = 0; i < param.size(); ++i) {
    const double g = grad.data()[i];
    double& m = state.first_moment.data()[i];
    double& v = state.second_moment.data()[i];
    m = state.beta1 * m + (1.0 - state.beta1) * g;
    v = state.beta2 * v + (1.0 - state.beta2) * g * g;
    const double m_hat = m / bc1;
    const double v_hat = v / bc2;
    param.data()[i] -= state.lr * m_hat / (std::sqrt(v_hat) + state.eps);
  }
}

DenseMatrix glorot_init(int rows, int cols, Rng& rng) {
  if (rows <= 0 || cols <= 0)
    throw std::invalid_argument("glorot_init: dimensions must be positive");
  const double a = std::sqrt(6.0 / static_cast<double>(rows + cols));
  DenseMatrix m(rows, cols);
  for (std::size_t i = 0; i < m.size(); ++i)
    m.data()[i] = (2.0 * rng.next_uniform() - 1.0) * a;
  return m;
}

}  // namespace a3gcn
