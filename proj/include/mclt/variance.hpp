#pragma once

#include <optional>
#include <string_view>
#include <vector>

#include "mclt/markov_core.hpp"

namespace mclt {

enum class VarianceRoute { poisson, cycle, spectral, closed_form };

std::string_view to_string(VarianceRoute route) noexcept;

/// Asymptotic variance together with the diagnostics of the route that
/// produced it. Only the fields relevant to `route` are populated.
struct VarianceReport {
  double sigma2 = 0.0;
  VarianceRoute route = VarianceRoute::poisson;

  std::optional<double> poisson_residual;   // poisson
  std::optional<StateIndex> reference_state;  // cycle
  std::optional<double> block_mean;         // cycle: U_fbar(i0, i0)
  std::optional<double> block_second_moment;  // cycle: U^2_fbar(i0, i0)
  std::vector<double> eigenvalues;          // spectral
  std::vector<double> coefficients;         // spectral
};

/// Eigen-data of a reversible kernel in the pi-weighted inner product.
/// `eigenvalues[0]` is the Perron eigenvalue (= 1); the rest follow in
/// ascending order.
struct SpectralData {
  std::vector<double> eigenvalues;
  std::vector<double> coefficients;  // <f, phi_s>_pi
  ProbabilityVector pi;
};

/// Values in [-1e-10, 0) are clamped to 0; anything lower is an error.
double clamp_variance(double sigma2);

VarianceReport asymptotic_variance(const TransitionMatrix& p, const Observable& f);
VarianceReport cycle_variance(const TransitionMatrix& p, const Observable& f, StateIndex i0);

bool is_reversible(const TransitionMatrix& p, const ProbabilityVector& pi);

SpectralData spectral_data(const TransitionMatrix& p, const Observable& f);
VarianceReport reversible_variance(const TransitionMatrix& p, const Observable& f);

VarianceReport two_state_variance(const TransitionMatrix& p, const Observable& f);

}  // namespace mclt
