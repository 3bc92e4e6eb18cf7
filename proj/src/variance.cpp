#include "mclt/variance.hpp"

#include <algorithm>
#include <cmath>

#include "mclt/error.hpp"

namespace mclt {

std::string_view to_string(VarianceRoute route) noexcept {
  switch (route) {
    case VarianceRoute::poisson: return "poisson";
    case VarianceRoute::cycle: return "cycle";
    case VarianceRoute::spectral: return "spectral";
    case VarianceRoute::closed_form: return "closed_form";
  }
  return "unknown";
}

double clamp_variance(double sigma2) {
  if (sigma2 >= 0.0) return sigma2;
  if (sigma2 >= -1e-10) return 0.0;
  throw Error(Errc::NegativeVariance, "variance evaluated to " + std::to_string(sigma2));
}

VarianceReport asymptotic_variance(const TransitionMatrix& p, const Observable& f) {
  const ProbabilityVector pi = stationary(p);
  const Observable fbar = center(f, pi);
  const PoissonSolution sol = solve_poisson(p, pi, fbar);
  const Observable pu = p.apply(sol.u);

  VarianceReport rep;
  rep.route = VarianceRoute::poisson;
  rep.sigma2 = clamp_variance(pi.expect(sol.u.hadamard(sol.u) - pu.hadamard(pu)));
  rep.poisson_residual = sol.residual;
  return rep;
}

VarianceReport cycle_variance(const TransitionMatrix& p, const Observable& f, StateIndex i0) {
  if (i0 >= p.size()) throw Error(Errc::InvalidState, "reference state out of range");
  const ProbabilityVector pi = stationary(p);
  const Observable fbar = center(f, pi);
  const PotentialSolver solver(p, i0);
  const double mean = solver.potential(fbar)[i0];
  const double second = solver.second_moment(fbar)[i0];

  VarianceReport rep;
  rep.route = VarianceRoute::cycle;
  rep.sigma2 = clamp_variance(pi[i0] * (second - mean * mean));
  rep.reference_state = i0;
  rep.block_mean = mean;
  rep.block_second_moment = second;
  return rep;
}

bool is_reversible(const TransitionMatrix& p, const ProbabilityVector& pi) {
  const std::size_t n = p.size();
  if (pi.size() != n) throw Error(Errc::LengthMismatch, "is_reversible: pi length mismatch");
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      if (std::abs(pi[i] * p(i, j) - pi[j] * p(j, i)) > 1e-10) return false;
  return true;
}

SpectralData spectral_data(const TransitionMatrix& p, const Observable& f) {
  const std::size_t n = p.size();
  if (f.size() != n) throw Error(Errc::LengthMismatch, "spectral_data: observable length mismatch");
  const ProbabilityVector pi = stationary(p);
  if (!is_reversible(p, pi)) throw Error(Errc::NotReversible, "detailed balance fails");

  // S(i,j) = sqrt(pi(i)/pi(j)) P(i,j), symmetrized against round-off.
  std::vector<double> root(n);
  for (std::size_t i = 0; i < n; ++i) root[i] = std::sqrt(pi[i]);
  DenseMatrix s(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i; j < n; ++j) {
      const double a = root[i] / root[j] * p(i, j);
      const double b = root[j] / root[i] * p(j, i);
      s(i, j) = s(j, i) = 0.5 * (a + b);
    }
  const SymmetricEigen eig = symmetric_eigen(s);

  std::size_t top = 0;
  for (std::size_t k = 1; k < n; ++k)
    if (std::abs(eig.values[k] - 1.0) < std::abs(eig.values[top] - 1.0)) top = k;
  if (std::abs(eig.values[top] - 1.0) > 1e-9)
    throw Error(Errc::EigenFailure, "no eigenvalue within 1e-9 of 1");
  for (std::size_t k = 0; k < n; ++k)
    if (k != top && std::abs(eig.values[k] - 1.0) <= 1e-9)
      throw Error(Errc::EigenFailure, "eigenvalue 1 is not simple");

  // phi_s = psi_s / sqrt(pi) is pi-orthonormal; <f, phi_s>_pi = sum sqrt(pi) f psi_s.
  SpectralData out{{}, {}, pi};
  auto push = [&](std::size_t k) {
    double c = 0.0;
    for (std::size_t i = 0; i < n; ++i) c += root[i] * f[i] * eig.vectors(i, k);
    out.eigenvalues.push_back(eig.values[k]);
    out.coefficients.push_back(c);
  };
  push(top);
  for (std::size_t k = 0; k < n; ++k)
    if (k != top) push(k);
  for (double lambda : out.eigenvalues)
    if (std::abs(lambda) > 1.0 + 1e-9) throw Error(Errc::EigenFailure, "eigenvalue outside [-1, 1]");
  return out;
}

VarianceReport reversible_variance(const TransitionMatrix& p, const Observable& f) {
  const SpectralData sd = spectral_data(p, f);
  double sigma2 = 0.0;
  for (std::size_t s = 1; s < sd.eigenvalues.size(); ++s) {
    const double lambda = sd.eigenvalues[s];
    const double c = sd.coefficients[s];
    sigma2 += (1.0 + lambda) / (1.0 - lambda) * c * c;
  }
  VarianceReport rep;
  rep.route = VarianceRoute::spectral;
  rep.sigma2 = clamp_variance(sigma2);
  rep.eigenvalues = sd.eigenvalues;
  rep.coefficients = sd.coefficients;
  return rep;
}

VarianceReport two_state_variance(const TransitionMatrix& p, const Observable& f) {
  if (p.size() != 2 || f.size() != 2) throw Error(Errc::WrongDimension, "closed form needs a 2-state chain");
  const double a = p(0, 1);
  const double b = p(1, 0);
  if (!(a * b > 0.0)) throw Error(Errc::NotIrreducible, "P(1,2) P(2,1) must be positive");
  const double d = f[0] - f[1];
  const double denom = (a + b) * (a + b) * (a + b);

  VarianceReport rep;
  rep.route = VarianceRoute::closed_form;
  rep.sigma2 = clamp_variance(d * d * a * b * (p(0, 0) + p(1, 1)) / denom);
  return rep;
}

}  // namespace mclt
