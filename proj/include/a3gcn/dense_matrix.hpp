#pragma once

#include <cstddef>
#include <vector>

namespace a3gcn {

/// Row-major dense matrix of doubles. Value type: copy is deep, moves are
/// cheap. All shape mismatches throw std::invalid_argument.
class DenseMatrix {
 public:
  DenseMatrix() : rows_(0), cols_(0) {}
  DenseMatrix(int rows, int cols, double fill = 0.0);

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  std::size_t size() const { return data_.size(); }

  double& operator()(int r, int c) { return data_[static_cast<std::size_t>(r) * cols_ + c]; }
  double operator()(int r, int c) const { return data_[static_cast<std::size_t>(r) * cols_ + c]; }

  double* row(int r) { return data_.data() + static_cast<std::size_t>(r) * cols_; }
  const double* row(int r) const { return data_.data() + static_cast<std::size_t>(r) * cols_; }

  double* data() { return data_.data(); }
  const double* data() const { return data_.data(); }

  bool same_shape(const DenseMatrix& other) const {
    return rows_ == other.rows_ && cols_ == other.cols_;
  }
  bool operator==(const DenseMatrix& other) const {
    return rows_ == other.rows_ && cols_ == other.cols_ && data_ == other.data_;
  }

  void fill(double value);
  bool all_finite() const;

  static DenseMatrix identity(int n);

 private:
  int rows_, cols_;
  std::vector<double> data_;
};

/// a * b (inner dimensions must agree).
DenseMatrix matmul(const DenseMatrix& a, const DenseMatrix& b);

/// transpose(a) * b.
DenseMatrix matmul_tn(const DenseMatrix& a, const DenseMatrix& b);

/// a * transpose(b).
DenseMatrix matmul_nt(const DenseMatrix& a, const DenseMatrix& b);

DenseMatrix hadamard(const DenseMatrix& a, const DenseMatrix& b);

}  // namespace a3gcn
