#include "mclt/dense.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "mclt/error.hpp"

namespace mclt {

DenseMatrix DenseMatrix::identity(std::size_t n) {
  DenseMatrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

DenseMatrix DenseMatrix::transposed() const {
  DenseMatrix t(cols_, rows_);
  for (std::size_t i = 0; i < rows_; ++i)
    for (std::size_t j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
  return t;
}

DenseMatrix operator*(const DenseMatrix& a, const DenseMatrix& b) {
  if (a.cols() != b.rows()) throw Error(Errc::LengthMismatch, "matrix product shape mismatch");
  DenseMatrix c(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    auto out = c.row(i);
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const double aik = a(i, k);
      if (aik == 0.0) continue;
      auto brow = b.row(k);
      for (std::size_t j = 0; j < b.cols(); ++j) out[j] += aik * brow[j];
    }
  }
  return c;
}

std::vector<double> multiply(const DenseMatrix& a, std::span<const double> x) {
  if (a.cols() != x.size()) throw Error(Errc::LengthMismatch, "matrix-vector shape mismatch");
  std::vector<double> y(a.rows(), 0.0);
  for (std::size_t i = 0; i < a.rows(); ++i) {
    auto r = a.row(i);
    y[i] = std::inner_product(r.begin(), r.end(), x.begin(), 0.0);
  }
  return y;
}

std::vector<double> left_multiply(std::span<const double> x, const DenseMatrix& a) {
  if (a.rows() != x.size()) throw Error(Errc::LengthMismatch, "vector-matrix shape mismatch");
  std::vector<double> y(a.cols(), 0.0);
  for (std::size_t i = 0; i < a.rows(); ++i) {
    const double xi = x[i];
    if (xi == 0.0) continue;
    auto r = a.row(i);
    for (std::size_t j = 0; j < a.cols(); ++j) y[j] += xi * r[j];
  }
  return y;
}

double max_abs(std::span<const double> v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

LuFactorization::LuFactorization(DenseMatrix a) : lu_(std::move(a)), perm_(lu_.rows()) {
  const std::size_t n = lu_.rows();
  if (lu_.cols() != n) throw Error(Errc::NotSquare, "LU requires a square matrix");
  std::iota(perm_.begin(), perm_.end(), std::size_t{0});
  const double scale = max_abs(lu_.data());
  const double tiny = 1e-13 * (scale > 0.0 ? scale : 1.0);

  for (std::size_t k = 0; k < n; ++k) {
    std::size_t piv = k;
    double best = std::abs(lu_(k, k));
    for (std::size_t i = k + 1; i < n; ++i) {
      const double v = std::abs(lu_(i, k));
      if (v > best) {
        best = v;
        piv = i;
      }
    }
    if (!(best > tiny)) throw Error(Errc::SingularSystem, "pivot below threshold at column " + std::to_string(k));
    if (piv != k) {
      std::swap_ranges(lu_.row(k).begin(), lu_.row(k).end(), lu_.row(piv).begin());
      std::swap(perm_[k], perm_[piv]);
    }
    const double inv = 1.0 / lu_(k, k);
    auto pivot_row = lu_.row(k);
    for (std::size_t i = k + 1; i < n; ++i) {
      auto r = lu_.row(i);
      const double m = r[k] * inv;
      r[k] = m;
      if (m == 0.0) continue;
      for (std::size_t j = k + 1; j < n; ++j) r[j] -= m * pivot_row[j];
    }
  }
}

std::vector<double> LuFactorization::solve(std::span<const double> b) const {
  const std::size_t n = lu_.rows();
  if (b.size() != n) throw Error(Errc::LengthMismatch, "right-hand side length mismatch");
  std::vector<double> x(n);
  for (std::size_t i = 0; i < n; ++i) x[i] = b[perm_[i]];
  for (std::size_t i = 0; i < n; ++i) {
    auto r = lu_.row(i);
    double s = x[i];
    for (std::size_t j = 0; j < i; ++j) s -= r[j] * x[j];
    x[i] = s;
  }
  for (std::size_t i = n; i-- > 0;) {
    auto r = lu_.row(i);
    double s = x[i];
    for (std::size_t j = i + 1; j < n; ++j) s -= r[j] * x[j];
    x[i] = s / r[i];
  }
  return x;
}

SymmetricEigen symmetric_eigen(const DenseMatrix& input, double tol, int max_sweeps) {
  const std::size_t n = input.rows();
  if (input.cols() != n) throw Error(Errc::NotSquare, "eigen-solver requires a square matrix");
  DenseMatrix a = input;
  DenseMatrix v = DenseMatrix::identity(n);

  auto off_norm = [&] {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j) s += a(i, j) * a(i, j);
    return std::sqrt(s);
  };
  const double scale = std::max(max_abs(a.data()), 1e-300);

  int sweep = 0;
  for (; sweep < max_sweeps && off_norm() > tol * scale; ++sweep) {
    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const double apq = a(p, q);
        if (apq == 0.0) continue;
        const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
        const double t = std::copysign(1.0, theta) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (std::size_t k = 0; k < n; ++k) {
          const double akp = a(k, p);
          const double akq = a(k, q);
          a(k, p) = c * akp - s * akq;
          a(k, q) = s * akp + c * akq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double apk = a(p, k);
          const double aqk = a(q, k);
          a(p, k) = c * apk - s * aqk;
          a(q, k) = s * apk + c * aqk;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double vkp = v(k, p);
          const double vkq = v(k, q);
          v(k, p) = c * vkp - s * vkq;
          v(k, q) = s * vkp + c * vkq;
        }
      }
    }
  }
  if (off_norm() > 1e-12 * scale) throw Error(Errc::EigenFailure, "Jacobi iteration did not converge");

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) { return a(x, x) < a(y, y); });

  SymmetricEigen out{std::vector<double>(n), DenseMatrix(n, n)};
  for (std::size_t k = 0; k < n; ++k) {
    out.values[k] = a(order[k], order[k]);
    for (std::size_t i = 0; i < n; ++i) out.vectors(i, k) = v(i, order[k]);
  }
  return out;
}

}  // namespace mclt
