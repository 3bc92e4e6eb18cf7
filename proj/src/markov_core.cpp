#include "mclt/markov_core.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <unordered_set>

#include "mclt/error.hpp"

namespace mclt {

namespace {

void require_same_size(std::size_t a, std::size_t b, const char* what) {
  if (a != b)
    throw Error(Errc::LengthMismatch,
                std::string(what) + ": expected length " + std::to_string(a) + ", got " + std::to_string(b));
}

void require_state(const TransitionMatrix& p, StateIndex i) {
  if (i >= p.size()) throw Error(Errc::InvalidState, "state index " + std::to_string(i) + " out of range");
}

void require_irreducible(const TransitionMatrix& p) {
  if (!is_irreducible(p)) throw Error(Errc::NotIrreducible, "transition matrix is not irreducible");
}

// Every state reachable from 0 along edges (forward) or against them (backward).
bool all_reached(const TransitionMatrix& p, bool forward) {
  const std::size_t n = p.size();
  std::vector<char> seen(n, 0);
  std::vector<StateIndex> stack{0};
  seen[0] = 1;
  std::size_t count = 1;
  while (!stack.empty()) {
    const StateIndex i = stack.back();
    stack.pop_back();
    for (StateIndex j = 0; j < n; ++j) {
      const double w = forward ? p(i, j) : p(j, i);
      if (w > kPositiveEntryThreshold && !seen[j]) {
        seen[j] = 1;
        ++count;
        stack.push_back(j);
      }
    }
  }
  return count == n;
}

}  // namespace

// ---------------------------------------------------------------------------
// Observable

Observable::Observable(std::vector<double> values) : values_(std::move(values)) {
  for (double v : values_)
    if (!std::isfinite(v)) throw Error(Errc::NonFiniteValue, "observable entries must be finite");
}

Observable Observable::constant(std::size_t n, double c) { return Observable(std::vector<double>(n, c)); }

Observable Observable::indicator(std::size_t n, StateIndex i) {
  if (i >= n) throw Error(Errc::InvalidState, "indicator index out of range");
  std::vector<double> v(n, 0.0);
  v[i] = 1.0;
  return Observable(std::move(v));
}

Observable Observable::operator+(const Observable& o) const {
  require_same_size(size(), o.size(), "observable sum");
  std::vector<double> v(size());
  for (std::size_t i = 0; i < size(); ++i) v[i] = values_[i] + o.values_[i];
  return Observable(std::move(v));
}

Observable Observable::operator-(const Observable& o) const {
  require_same_size(size(), o.size(), "observable difference");
  std::vector<double> v(size());
  for (std::size_t i = 0; i < size(); ++i) v[i] = values_[i] - o.values_[i];
  return Observable(std::move(v));
}

Observable Observable::operator*(double c) const {
  std::vector<double> v(values_);
  for (double& x : v) x *= c;
  return Observable(std::move(v));
}

Observable Observable::shifted(double c) const {
  std::vector<double> v(values_);
  for (double& x : v) x += c;
  return Observable(std::move(v));
}

Observable Observable::hadamard(const Observable& o) const {
  require_same_size(size(), o.size(), "entrywise product");
  std::vector<double> v(size());
  for (std::size_t i = 0; i < size(); ++i) v[i] = values_[i] * o.values_[i];
  return Observable(std::move(v));
}

// ---------------------------------------------------------------------------
// ProbabilityVector

ProbabilityVector::ProbabilityVector(std::vector<double> weights) : weights_(std::move(weights)) {
  if (weights_.empty()) throw Error(Errc::LengthMismatch, "probability vector must be nonempty");
  double sum = 0.0;
  for (double w : weights_) {
    if (!std::isfinite(w)) throw Error(Errc::NonFiniteValue, "probability weights must be finite");
    if (w < 0.0) throw Error(Errc::NegativeEntry, "probability weights must be nonnegative");
    sum += w;
  }
  if (std::abs(sum - 1.0) > kRowSumTolerance)
    throw Error(Errc::RowSumOutOfTolerance, "probability weights sum to " + std::to_string(sum));
  for (double& w : weights_) w /= sum;
}

ProbabilityVector ProbabilityVector::normalized(std::vector<double> weights) {
  double sum = 0.0;
  for (double w : weights) {
    if (!std::isfinite(w)) throw Error(Errc::NonFiniteValue, "probability weights must be finite");
    if (w < 0.0) throw Error(Errc::NegativeEntry, "probability weights must be nonnegative");
    sum += w;
  }
  if (!(sum > 0.0)) throw Error(Errc::RowSumOutOfTolerance, "weights have zero total mass");
  for (double& w : weights) w /= sum;
  return ProbabilityVector(Trusted{}, std::move(weights));
}

ProbabilityVector ProbabilityVector::uniform(std::size_t n) {
  if (n == 0) throw Error(Errc::LengthMismatch, "probability vector must be nonempty");
  return ProbabilityVector(Trusted{}, std::vector<double>(n, 1.0 / static_cast<double>(n)));
}

ProbabilityVector ProbabilityVector::point_mass(std::size_t n, StateIndex i) {
  if (i >= n) throw Error(Errc::InvalidState, "point mass index out of range");
  std::vector<double> w(n, 0.0);
  w[i] = 1.0;
  return ProbabilityVector(Trusted{}, std::move(w));
}

double ProbabilityVector::expect(std::span<const double> f) const {
  require_same_size(size(), f.size(), "expectation");
  // Summing deviations from the minimum makes pi(c * 1) == c exactly.
  const double base = *std::min_element(f.begin(), f.end());
  double s = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) s += weights_[i] * (f[i] - base);
  return base + s;
}

double ProbabilityVector::expect(const Observable& f) const { return expect(f.values()); }

// ---------------------------------------------------------------------------
// TransitionMatrix

std::optional<StateIndex> TransitionMatrix::index_of(const std::string& label) const {
  auto it = std::find(labels_.begin(), labels_.end(), label);
  if (it == labels_.end()) return std::nullopt;
  return static_cast<StateIndex>(it - labels_.begin());
}

Observable TransitionMatrix::apply(const Observable& u) const {
  return Observable(multiply(rows_, u.values()));
}

std::vector<double> TransitionMatrix::left_apply(std::span<const double> mu) const {
  return left_multiply(mu, rows_);
}

TransitionMatrix build_transition(DenseMatrix rows, std::vector<std::string> labels) {
  const std::size_t n = rows.rows();
  if (n == 0 || rows.cols() != n || labels.size() != n)
    throw Error(Errc::NotSquare, "expected an N x N matrix with N labels (got " + std::to_string(rows.rows()) + "x" +
                                     std::to_string(rows.cols()) + ", " + std::to_string(labels.size()) + " labels)");
  std::unordered_set<std::string> seen;
  for (const auto& l : labels)
    if (!seen.insert(l).second) throw Error(Errc::DuplicateLabel, "duplicate state label '" + l + "'");

  for (std::size_t i = 0; i < n; ++i) {
    auto r = rows.row(i);
    double sum = 0.0;
    for (double v : r) {
      if (!std::isfinite(v)) throw Error(Errc::NonFiniteValue, "row " + std::to_string(i) + " has a non-finite entry");
      if (v < 0.0) throw Error(Errc::NegativeEntry, "row " + std::to_string(i) + " has a negative entry");
    }
    for (double v : r) {
      if (v > 1.0 + kRowSumTolerance)
        throw Error(Errc::RowSumOutOfTolerance, "row " + std::to_string(i) + " has an entry above 1");
      sum += v;
    }
    if (std::abs(sum - 1.0) > kRowSumTolerance)
      throw Error(Errc::RowSumOutOfTolerance, "row " + std::to_string(i) + " sums to " + std::to_string(sum));
    for (double& v : r) v /= sum;
  }
  return TransitionMatrix(std::move(rows), std::move(labels));
}

TransitionMatrix build_transition(const std::vector<std::vector<double>>& rows, std::vector<std::string> labels) {
  const std::size_t n = rows.size();
  for (const auto& r : rows)
    if (r.size() != n) throw Error(Errc::NotSquare, "matrix rows must all have length " + std::to_string(n));
  DenseMatrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) std::copy(rows[i].begin(), rows[i].end(), m.row(i).begin());
  return build_transition(std::move(m), std::move(labels));
}

std::vector<std::string> index_labels(std::size_t n) {
  std::vector<std::string> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = std::to_string(i);
  return out;
}

// ---------------------------------------------------------------------------
// Analysis

bool is_irreducible(const TransitionMatrix& p) { return all_reached(p, true) && all_reached(p, false); }

ProbabilityVector stationary(const TransitionMatrix& p) {
  require_irreducible(p);
  const std::size_t n = p.size();
  // (I - P^T) x = 0 with the last equation replaced by sum(x) = 1.
  DenseMatrix a(n, n);
  for (std::size_t i = 0; i + 1 < n; ++i)
    for (std::size_t j = 0; j < n; ++j) a(i, j) = (i == j ? 1.0 : 0.0) - p(j, i);
  for (std::size_t j = 0; j < n; ++j) a(n - 1, j) = 1.0;
  std::vector<double> rhs(n, 0.0);
  rhs[n - 1] = 1.0;

  std::vector<double> x = LuFactorization(std::move(a)).solve(rhs);
  for (double v : x)
    if (!(v > 0.0)) throw Error(Errc::SingularSystem, "stationary solve produced a nonpositive weight");
  auto pi = ProbabilityVector::normalized(std::move(x));

  std::vector<double> r = p.left_apply(pi.weights());
  for (std::size_t i = 0; i < n; ++i) r[i] -= pi[i];
  if (max_abs(r) > 1e-10) throw Error(Errc::SingularSystem, "stationary residual " + std::to_string(max_abs(r)));
  return pi;
}

Observable center(const Observable& f, const ProbabilityVector& pi) {
  require_same_size(pi.size(), f.size(), "center");
  return f.shifted(-pi.expect(f));
}

PoissonSolution solve_poisson(const TransitionMatrix& p, const ProbabilityVector& pi, const Observable& g) {
  const std::size_t n = p.size();
  require_same_size(n, pi.size(), "solve_poisson (pi)");
  require_same_size(n, g.size(), "solve_poisson (g)");
  const double pig = pi.expect(g);
  if (std::abs(pig) > kCenteringTolerance)
    throw Error(Errc::NotCentered, "pi(g) = " + std::to_string(pig) + " exceeds centering tolerance");
  require_irreducible(p);

  // ((I - P) + 1 pi) u = g
  DenseMatrix a(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) a(i, j) = (i == j ? 1.0 : 0.0) - p(i, j) + pi[j];
  Observable u(LuFactorization(std::move(a)).solve(g.values()));

  PoissonSolution sol{u, 0.0, 0.0};
  const Observable pu = p.apply(u);
  for (std::size_t i = 0; i < n; ++i) sol.residual = std::max(sol.residual, std::abs(u[i] - pu[i] - g[i]));
  double piu = 0.0;
  for (std::size_t i = 0; i < n; ++i) piu += pi[i] * u[i];
  sol.pi_u = piu;
  if (sol.residual > 1e-9 || std::abs(sol.pi_u) > 1e-9)
    throw Error(Errc::SingularSystem, "Poisson solution failed its residual check (residual " +
                                          std::to_string(sol.residual) + ", pi(u) " + std::to_string(sol.pi_u) + ")");
  return sol;
}

namespace {

DenseMatrix potential_system(const TransitionMatrix& p, StateIndex i0) {
  require_state(p, i0);
  require_irreducible(p);
  const std::size_t n = p.size();
  // (I - P) + P diag(delta_{i0}): column i0 of P is cancelled.
  DenseMatrix a(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) a(i, j) = (i == j ? 1.0 : 0.0) - (j == i0 ? 0.0 : p(i, j));
  return a;
}

}  // namespace

PotentialSolver::PotentialSolver(const TransitionMatrix& p, StateIndex i0)
    : i0_(i0), lu_(potential_system(p, i0)) {}

Observable PotentialSolver::potential(const Observable& f) const {
  require_same_size(lu_.size(), f.size(), "potential");
  return Observable(lu_.solve(f.values()));
}

Observable PotentialSolver::second_moment(const Observable& f) const {
  const Observable u = potential(f);
  return potential(f.hadamard(u) * 2.0 - f.hadamard(f));
}

Observable potential(const TransitionMatrix& p, const Observable& f, StateIndex i0) {
  return PotentialSolver(p, i0).potential(f);
}

Observable potential_second_moment(const TransitionMatrix& p, const Observable& f, StateIndex i0) {
  return PotentialSolver(p, i0).second_moment(f);
}

Observable expected_hitting_times(const TransitionMatrix& p, StateIndex i0) {
  return potential(p, Observable::constant(p.size(), 1.0), i0);
}

}  // namespace mclt
