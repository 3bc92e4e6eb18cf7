#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mclt/markov_core.hpp"

namespace mclt::erw {

/// Largest memory length for which the ordered chain is built as a dense matrix.
inline constexpr int kOrderedMaxMatrixL = 14;

/// Memory length L >= 1 and acceptance probability 0 <= p < 1.
struct ErwParams {
  int L = 1;
  double p = 0.5;

  static ErwParams make(int L, double p);
  void validate() const;
};

/// Augmented state of the disordered-memory walk: the last step and the number
/// of +1's in the jar.
struct DisorderedState {
  int sign = 1;    // +1 or -1
  int pluses = 1;  // j

  friend bool operator==(const DisorderedState&, const DisorderedState&) = default;
};

/// Ordered memory as an L-bit word, bit k = eta(k) (1 = +1 step). Bit 0 is the
/// oldest entry.
struct OrderedState {
  std::uint64_t bits = 0;

  int popcount() const noexcept;
  int bit(int k) const noexcept { return static_cast<int>((bits >> k) & 1u); }

  friend bool operator==(const OrderedState&, const OrderedState&) = default;
};

/// Matrix encoding of an ERW variant with its step observable.
struct ErwChain {
  TransitionMatrix P;
  Observable step;
};

// Disordered memory. States (-1, j), j = 0..L-1 occupy indices 0..L-1 and
// (+1, j), j = 1..L occupy indices L..2L-1.
std::size_t disordered_index(const ErwParams& params, const DisorderedState& s);
DisorderedState disordered_state(const ErwParams& params, std::size_t index);
std::string disordered_label(const DisorderedState& s);

ErwChain build_disordered(const ErwParams& params);
ProbabilityVector disordered_stationary(const ErwParams& params);
double disordered_variance(const ErwParams& params);
Observable disordered_potential(const ErwParams& params);

// Ordered memory. State index = the bit word.
std::string ordered_label(const ErwParams& params, OrderedState s);

ErwChain build_ordered(const ErwParams& params);
/// omega -> omega(0), the oldest entry of the memory.
Observable ordered_front_observable(const ErwParams& params);
ProbabilityVector ordered_stationary(const ErwParams& params);
/// Stationary law of |omega|: weight of all words with k ones, k = 0..L.
/// Evaluated in log space, so any L is accepted.
std::vector<double> ordered_popcount_law(const ErwParams& params);
/// c_j = (1-p)(1-j/L) + (j/L) p
double append_weight(const ErwParams& params, int j);
double ordered_variance(const ErwParams& params);

/// Centered lag correlations of the oldest memory entry under pi.
struct CorrelationSeries {
  std::vector<double> rho_bar;
};

double rho_bar_one(const ErwParams& params);
CorrelationSeries rho_bar_sequence(const ErwParams& params, std::size_t n_max);
/// sum_{n >= 1} rho_bar_n, truncated once L consecutive terms fall below 1e-14
/// in magnitude. A series still alive after 1e5 terms is summed in the Cesaro
/// sense.
double rho_bar_tail_sum(const ErwParams& params);
/// Spectral radius of the L x L companion matrix of the rho_bar recursion.
double recursion_spectral_check(const ErwParams& params);

}  // namespace mclt::erw
