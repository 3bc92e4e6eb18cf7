#pragma once

#include <cstdint>
#include <optional>
#include <variant>
#include <vector>

#include "mclt/erw_models.hpp"
#include "mclt/markov_core.hpp"
#include "mclt/rng.hpp"

namespace mclt {

/// X_0..X_n of one sampled path.
struct Trajectory {
  std::vector<StateIndex> states;
  std::size_t n_states = 0;
  std::uint64_t seed = 0;

  std::size_t steps() const noexcept { return states.empty() ? 0 : states.size() - 1; }
};

/// Initial law: a fixed state or a distribution.
using Start = std::variant<StateIndex, ProbabilityVector>;

/// Inverse-CDF tables over the positive entries of each row of P.
class PathSampler {
 public:
  explicit PathSampler(const TransitionMatrix& p);

  std::size_t size() const noexcept { return offsets_.size() - 1; }
  StateIndex step(StateIndex from, Rng& rng) const;
  StateIndex draw(const Start& start, Rng& rng) const;

 private:
  std::vector<std::size_t> offsets_;
  std::vector<StateIndex> targets_;
  std::vector<double> cumulative_;
};

Trajectory sample_path(const TransitionMatrix& p, const Start& start, std::size_t n, std::uint64_t seed);

/// I_n(f) = f(X_0) + ... + f(X_{n-1}); X_n is excluded.
double additive_functional(const Trajectory& traj, const Observable& f);

/// Decomposition of a path at its visits to i0 after time 0 (times T^1 < T^2 < ...).
struct RegenerationBlocks {
  double z0 = 0.0;                  // sum over [0, T^1)
  std::size_t first_passage = 0;    // T^1
  std::vector<double> block_sums;   // Z_m, sum over [T^m, T^{m+1})
  std::vector<std::size_t> block_lengths;
  double tail_sum = 0.0;            // sum over [T^M, n), M = last visit
  std::size_t tail_length = 0;
};

RegenerationBlocks regeneration_blocks(const Trajectory& traj, StateIndex i0, const Observable& f);

ProbabilityVector empirical_stationary(const Trajectory& traj);

struct NormalityDiagnostics {
  double skewness = 0.0;
  double excess_kurtosis = 0.0;
  double ks_statistic = 0.0;  // sup-distance to the standard normal CDF
};

struct SimulationReport {
  std::optional<ProbabilityVector> empirical_pi;
  double sigma2_reference = 0.0;        // analytic value used to standardize
  double var_estimate = 0.0;            // mean of I_n(fbar)^2 / n
  std::optional<double> var_stderr;     // present when reps >= 2
  double mean_estimate = 0.0;           // mean of I_n(fbar) / n
  std::optional<NormalityDiagnostics> diagnostics;  // absent when degenerate
  bool degenerate = false;
  std::size_t n = 0;
  std::size_t reps = 0;
  std::uint64_t seed = 0;
};

struct SimulationOptions {
  std::size_t n = 10000;
  std::size_t reps = 1000;
  Start start = StateIndex{0};
  std::uint64_t seed = 0;
  unsigned threads = 1;
};

/// Replica r runs on Rng::for_replica(seed, r); results are identical for any
/// thread count.
SimulationReport empirical_variance(const TransitionMatrix& p, const Observable& f, const SimulationOptions& options);

/// Standard normal CDF.
double normal_cdf(double x);

/// Summary of replica sums `sums[r] = I_n(fbar)` against reference sigma2.
SimulationReport summarize_replicas(std::span<const double> sums, std::size_t n, double sigma2);

// ---------------------------------------------------------------------------
// ERW step simulators, written from the jar/list procedures rather than the
// matrix encodings.

namespace erw {

/// Draw from the jar, keep with probability p or flip, put the new sign back.
DisorderedState step_disordered(const ErwParams& params, DisorderedState state, Rng& rng);

/// Draw a uniform entry of the list, keep with probability p or flip, append
/// the new sign at position L-1 and drop position 0. Requires L <= 64.
OrderedState step_ordered(const ErwParams& params, OrderedState state, Rng& rng);

/// Exact stationary draw: i.i.d. fair jar signs, last step = sign of a uniform
/// jar entry.
DisorderedState sample_disordered_stationary(const ErwParams& params, Rng& rng);

/// Ordered memory of arbitrary length held in a ring buffer.
class OrderedMemory {
 public:
  /// Stationary draw: |omega| from the product-form law, positions uniform.
  static OrderedMemory sample_stationary(const ErwParams& params, std::span<const double> popcount_cdf, Rng& rng);

  int ones() const noexcept { return ones_; }
  /// Advances one step and returns the new sign (+1 or -1).
  int step(double p, Rng& rng);

 private:
  std::vector<std::uint8_t> ring_;
  std::size_t head_ = 0;  // position of the oldest entry
  int ones_ = 0;
};

enum class Model { disordered, ordered };

/// Monte Carlo estimate of Var(X_n)/n for the walk started from stationarity,
/// standardized against the closed-form variance.
SimulationReport walk_empirical_variance(Model model, const ErwParams& params, std::size_t n, std::size_t reps,
                                         std::uint64_t seed, unsigned threads = 1);

}  // namespace erw

}  // namespace mclt
