#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace mclt {

/// Row-major dense matrix of doubles.
class DenseMatrix {
 public:
  DenseMatrix() = default;
  DenseMatrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  static DenseMatrix identity(std::size_t n);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }

  double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

  std::span<double> row(std::size_t i) { return {data_.data() + i * cols_, cols_}; }
  std::span<const double> row(std::size_t i) const { return {data_.data() + i * cols_, cols_}; }

  std::span<const double> data() const noexcept { return data_; }

  DenseMatrix transposed() const;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

DenseMatrix operator*(const DenseMatrix& a, const DenseMatrix& b);

/// A x
std::vector<double> multiply(const DenseMatrix& a, std::span<const double> x);
/// x^T A
std::vector<double> left_multiply(std::span<const double> x, const DenseMatrix& a);

double max_abs(std::span<const double> v);

/// LU factorization with partial pivoting. Throws Errc::SingularSystem when a
/// pivot falls below `1e-13` times the largest entry of the input.
class LuFactorization {
 public:
  explicit LuFactorization(DenseMatrix a);

  std::size_t size() const noexcept { return lu_.rows(); }
  std::vector<double> solve(std::span<const double> b) const;

 private:
  DenseMatrix lu_;
  std::vector<std::size_t> perm_;
};

struct SymmetricEigen {
  std::vector<double> values;  // ascending
  DenseMatrix vectors;         // column k is the unit eigenvector of values[k]
};

/// Cyclic Jacobi rotations. The input must be symmetric.
SymmetricEigen symmetric_eigen(const DenseMatrix& a, double tol = 1e-15, int max_sweeps = 100);

}  // namespace mclt
