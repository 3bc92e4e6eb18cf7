#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mclt/dense.hpp"

namespace mclt {

using StateIndex = std::size_t;

inline constexpr double kRowSumTolerance = 1e-9;
inline constexpr double kPositiveEntryThreshold = 1e-15;
inline constexpr double kCenteringTolerance = 1e-9;

/// Real-valued function on the state space, stored as a length-N vector.
class Observable {
 public:
  Observable() = default;
  explicit Observable(std::vector<double> values);

  static Observable constant(std::size_t n, double c);
  static Observable zeros(std::size_t n) { return constant(n, 0.0); }
  static Observable indicator(std::size_t n, StateIndex i);

  std::size_t size() const noexcept { return values_.size(); }
  double operator[](std::size_t i) const { return values_[i]; }
  std::span<const double> values() const noexcept { return values_; }

  Observable operator+(const Observable& o) const;
  Observable operator-(const Observable& o) const;
  Observable operator*(double c) const;
  Observable shifted(double c) const;
  /// Entrywise product.
  Observable hadamard(const Observable& o) const;

 private:
  std::vector<double> values_;
};

/// Nonnegative weights summing to one.
class ProbabilityVector {
 public:
  /// Validates entries (finite, >= 0) and that the sum is within 1e-9 of one,
  /// then renormalizes.
  explicit ProbabilityVector(std::vector<double> weights);

  /// Rescales positive weights of arbitrary total mass.
  static ProbabilityVector normalized(std::vector<double> weights);
  static ProbabilityVector uniform(std::size_t n);
  static ProbabilityVector point_mass(std::size_t n, StateIndex i);

  std::size_t size() const noexcept { return weights_.size(); }
  double operator[](std::size_t i) const { return weights_[i]; }
  std::span<const double> weights() const noexcept { return weights_; }

  /// pi(f) = sum_i pi(i) f(i)
  double expect(const Observable& f) const;
  double expect(std::span<const double> f) const;

 private:
  struct Trusted {};
  ProbabilityVector(Trusted, std::vector<double> w) : weights_(std::move(w)) {}
  std::vector<double> weights_;
};

/// Validated row-stochastic kernel with state labels.
class TransitionMatrix {
 public:
  std::size_t size() const noexcept { return labels_.size(); }
  double operator()(StateIndex i, StateIndex j) const { return rows_(i, j); }
  std::span<const double> row(StateIndex i) const { return rows_.row(i); }
  const DenseMatrix& dense() const noexcept { return rows_; }

  const std::vector<std::string>& labels() const noexcept { return labels_; }
  const std::string& label(StateIndex i) const { return labels_.at(i); }
  std::optional<StateIndex> index_of(const std::string& label) const;

  /// (P u)(i) = sum_j P(i,j) u(j)
  Observable apply(const Observable& u) const;
  /// (mu P)(j)
  std::vector<double> left_apply(std::span<const double> mu) const;

 private:
  friend TransitionMatrix build_transition(DenseMatrix rows, std::vector<std::string> labels);
  TransitionMatrix(DenseMatrix rows, std::vector<std::string> labels)
      : rows_(std::move(rows)), labels_(std::move(labels)) {}

  DenseMatrix rows_;
  std::vector<std::string> labels_;
};

struct PoissonSolution {
  Observable u;
  double residual = 0.0;  // max |(I-P)u - g|
  double pi_u = 0.0;
};

TransitionMatrix build_transition(DenseMatrix rows, std::vector<std::string> labels);
TransitionMatrix build_transition(const std::vector<std::vector<double>>& rows, std::vector<std::string> labels);

/// Labels "0", "1", ..., "N-1".
std::vector<std::string> index_labels(std::size_t n);

/// Strong connectivity of the digraph {i -> j : P(i,j) > 1e-15}.
bool is_irreducible(const TransitionMatrix& p);

ProbabilityVector stationary(const TransitionMatrix& p);

Observable center(const Observable& f, const ProbabilityVector& pi);

PoissonSolution solve_poisson(const TransitionMatrix& p, const ProbabilityVector& pi, const Observable& g);

/// Factorization of (I - P) + P diag(delta_{i0}) shared by the potential
/// solvers for a fixed reference state.
class PotentialSolver {
 public:
  PotentialSolver(const TransitionMatrix& p, StateIndex i0);

  StateIndex reference_state() const noexcept { return i0_; }

  /// U_f(., i0): expected sum of f over [0, T_{i0}).
  Observable potential(const Observable& f) const;
  /// E_.[(sum of f over [0, T_{i0}))^2]
  Observable second_moment(const Observable& f) const;

 private:
  StateIndex i0_;
  LuFactorization lu_;
};

Observable potential(const TransitionMatrix& p, const Observable& f, StateIndex i0);
Observable potential_second_moment(const TransitionMatrix& p, const Observable& f, StateIndex i0);
Observable expected_hitting_times(const TransitionMatrix& p, StateIndex i0);

}  // namespace mclt
