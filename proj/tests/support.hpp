#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <unistd.h>
#include <utility>
#include <vector>

#include "a3gcn/dense_matrix.hpp"
#include "a3gcn/gcn.hpp"
#include "a3gcn/graph.hpp"
#include "a3gcn/nn.hpp"
#include "a3gcn/rng.hpp"

// Brute-force reference implementations. Everything here recomputes results
// from first principles with plain loops so the library code under test never
// feeds its own answers back into the expected values.
namespace oracle {

inline a3gcn::DenseMatrix naive_matmul(const a3gcn::DenseMatrix& a,
                                       const a3gcn::DenseMatrix& b) {
  a3gcn::DenseMatrix out(a.rows(), b.cols(), 0.0);
  for (int i = 0; i < a.rows(); ++i)
    for (int j = 0; j < b.cols(); ++j) {
      double acc = 0.0;
      for (int k = 0; k < a.cols(); ++k) acc += a(i, k) * b(k, j);
      out(i, j) = acc;
    }
  return out;
}

/// Dense symmetrized 0/1 adjacency from a raw edge list.
inline a3gcn::DenseMatrix dense_adjacency(int n, const a3gcn::EdgeList& edges) {
  a3gcn::DenseMatrix a(n, n, 0.0);
  for (const auto& [u, v] : edges.edges) {
    a(u, v) = 1.0;
    a(v, u) = 1.0;
  }
  return a;
}

/// Dense D~^{-1/2} (A + I) D~^{-1/2} computed straight from the definition.
inline a3gcn::DenseMatrix dense_normalized_adjacency(int n, const a3gcn::EdgeList& edges) {
  a3gcn::DenseMatrix a = dense_adjacency(n, edges);
  for (int i = 0; i < n; ++i) a(i, i) += 1.0;
  std::vector<double> dinv(n);
  for (int i = 0; i < n; ++i) {
    double deg = 0.0;
    for (int j = 0; j < n; ++j) deg += a(i, j);
    dinv[i] = 1.0 / std::sqrt(deg);
  }
  a3gcn::DenseMatrix out(n, n, 0.0);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) out(i, j) = dinv[i] * a(i, j) * dinv[j];
  return out;
}

/// CSR expanded to dense for elementwise comparison.
inline a3gcn::DenseMatrix csr_to_dense(const a3gcn::SparseGraph& g) {
  a3gcn::DenseMatrix out(g.num_nodes, g.num_nodes, 0.0);
  for (int u = 0; u < g.num_nodes; ++u)
    for (int k = g.row_offsets[u]; k < g.row_offsets[u + 1]; ++k)
      out(u, g.col_indices[k]) = g.edge_values[k];
  return out;
}

/// Row softmax in extended precision.
inline a3gcn::DenseMatrix softmax_rows_ld(const a3gcn::DenseMatrix& x) {
  a3gcn::DenseMatrix out(x.rows(), x.cols());
  for (int i = 0; i < x.rows(); ++i) {
    long double mx = x(i, 0);
    for (int j = 1; j < x.cols(); ++j) mx = std::max<long double>(mx, x(i, j));
    long double sum = 0.0L;
    std::vector<long double> e(x.cols());
    for (int j = 0; j < x.cols(); ++j) {
      e[j] = expl(static_cast<long double>(x(i, j)) - mx);
      sum += e[j];
    }
    for (int j = 0; j < x.cols(); ++j) out(i, j) = static_cast<double>(e[j] / sum);
  }
  return out;
}

}  // namespace oracle

namespace testutil {

inline a3gcn::DenseMatrix random_matrix(int rows, int cols, a3gcn::Rng& rng,
                                        double scale = 1.0) {
  a3gcn::DenseMatrix m(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) m(i, j) = (2.0 * rng.next_uniform() - 1.0) * scale;
  return m;
}

/// count distinct canonical random edges on n nodes (count must be feasible).
inline a3gcn::EdgeList random_edges(int n, int count, a3gcn::Rng& rng) {
  std::set<std::pair<int, int>> picked;
  while (static_cast<int>(picked.size()) < count) {
    int u = static_cast<int>(rng.next_below(n));
    int v = static_cast<int>(rng.next_below(n));
    if (u == v) continue;
    picked.insert({std::min(u, v), std::max(u, v)});
  }
  a3gcn::EdgeList e;
  e.edges.assign(picked.begin(), picked.end());
  return e;
}

inline double rel_err(double analytic, double numeric) {
  const double denom = std::max(std::abs(analytic), std::abs(numeric));
  if (denom < 1e-10) return 0.0;
  return std::abs(analytic - numeric) / denom;
}

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

/// Unique scratch directory, removed on scope exit.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    static std::atomic<unsigned> counter{0};
    path_ = std::filesystem::temp_directory_path() /
            ("a3gcn_" + tag + "_" + std::to_string(::getpid()) + "_" +
             std::to_string(counter.fetch_add(1)));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

}  // namespace testutil
