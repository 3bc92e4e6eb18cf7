#include "mclt/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <thread>

#include "mclt/error.hpp"
#include "mclt/variance.hpp"

namespace mclt {

namespace {

// Replica r goes to worker r % threads; each worker calls fn(r, worker).
template <class Fn>
void for_each_replica(std::size_t reps, unsigned threads, Fn&& fn) {
  const unsigned workers = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(std::max<std::size_t>(reps, 1))));
  if (workers == 1) {
    for (std::size_t r = 0; r < reps; ++r) fn(r, 0u);
    return;
  }
  std::vector<std::jthread> pool;
  pool.reserve(workers);
  for (unsigned w = 0; w < workers; ++w)
    pool.emplace_back([&, w] {
      for (std::size_t r = w; r < reps; r += workers) fn(r, w);
    });
}

}  // namespace

// ---------------------------------------------------------------------------
// Path sampling

PathSampler::PathSampler(const TransitionMatrix& p) {
  const std::size_t n = p.size();
  offsets_.reserve(n + 1);
  offsets_.push_back(0);
  for (StateIndex i = 0; i < n; ++i) {
    double acc = 0.0;
    const std::size_t begin = targets_.size();
    for (StateIndex j = 0; j < n; ++j) {
      if (p(i, j) > 0.0) {
        acc += p(i, j);
        targets_.push_back(j);
        cumulative_.push_back(acc);
      }
    }
    // Rows are stochastic; pin the last bound so u < 1 always lands in the row.
    if (targets_.size() > begin) cumulative_.back() = 1.0;
    offsets_.push_back(targets_.size());
  }
}

StateIndex PathSampler::step(StateIndex from, Rng& rng) const {
  const double u = rng.uniform();
  const auto first = cumulative_.begin() + static_cast<std::ptrdiff_t>(offsets_[from]);
  const auto last = cumulative_.begin() + static_cast<std::ptrdiff_t>(offsets_[from + 1]);
  const auto it = std::upper_bound(first, last, u);
  return targets_[static_cast<std::size_t>(it - cumulative_.begin())];
}

StateIndex PathSampler::draw(const Start& start, Rng& rng) const {
  const std::size_t n = size();
  if (const auto* idx = std::get_if<StateIndex>(&start)) {
    if (*idx >= n) throw Error(Errc::InvalidStart, "start state " + std::to_string(*idx) + " out of range");
    return *idx;
  }
  const auto& mu = std::get<ProbabilityVector>(start);
  if (mu.size() != n) throw Error(Errc::InvalidStart, "start distribution has the wrong length");
  const double u = rng.uniform();
  double acc = 0.0;
  StateIndex last_positive = 0;
  for (StateIndex i = 0; i < n; ++i) {
    if (mu[i] <= 0.0) continue;
    acc += mu[i];
    last_positive = i;
    if (u < acc) return i;
  }
  return last_positive;
}

Trajectory sample_path(const TransitionMatrix& p, const Start& start, std::size_t n, std::uint64_t seed) {
  const PathSampler sampler(p);
  Rng rng(seed);
  Trajectory traj{{}, p.size(), seed};
  traj.states.reserve(n + 1);
  StateIndex x = sampler.draw(start, rng);
  traj.states.push_back(x);
  for (std::size_t k = 0; k < n; ++k) {
    x = sampler.step(x, rng);
    traj.states.push_back(x);
  }
  return traj;
}

double additive_functional(const Trajectory& traj, const Observable& f) {
  if (f.size() != traj.n_states) throw Error(Errc::LengthMismatch, "observable does not match trajectory state space");
  double s = 0.0;
  for (std::size_t k = 0; k < traj.steps(); ++k) s += f[traj.states[k]];
  return s;
}

RegenerationBlocks regeneration_blocks(const Trajectory& traj, StateIndex i0, const Observable& f) {
  if (f.size() != traj.n_states) throw Error(Errc::LengthMismatch, "observable does not match trajectory state space");
  if (i0 >= traj.n_states) throw Error(Errc::InvalidState, "reference state out of range");
  const std::size_t n = traj.steps();

  std::vector<std::size_t> visits;
  for (std::size_t k = 1; k <= n; ++k)
    if (traj.states[k] == i0) visits.push_back(k);
  if (visits.size() < 2)
    throw Error(Errc::InsufficientVisits, "trajectory visits the reference state fewer than twice after time 0");

  auto sum_over = [&](std::size_t from, std::size_t to) {
    double s = 0.0;
    for (std::size_t k = from; k < to; ++k) s += f[traj.states[k]];
    return s;
  };

  RegenerationBlocks out;
  out.first_passage = visits.front();
  out.z0 = sum_over(0, visits.front());
  out.block_sums.reserve(visits.size() - 1);
  out.block_lengths.reserve(visits.size() - 1);
  for (std::size_t m = 0; m + 1 < visits.size(); ++m) {
    out.block_sums.push_back(sum_over(visits[m], visits[m + 1]));
    out.block_lengths.push_back(visits[m + 1] - visits[m]);
  }
  out.tail_sum = sum_over(visits.back(), n);
  out.tail_length = n - visits.back();
  return out;
}

ProbabilityVector empirical_stationary(const Trajectory& traj) {
  const std::size_t n = traj.steps();
  if (n == 0) throw Error(Errc::InsufficientVisits, "empirical stationary law needs at least one step");
  std::vector<double> counts(traj.n_states, 0.0);
  for (std::size_t k = 0; k < n; ++k) counts[traj.states[k]] += 1.0;
  return ProbabilityVector::normalized(std::move(counts));
}

// ---------------------------------------------------------------------------
// Replica statistics

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

SimulationReport summarize_replicas(std::span<const double> sums, std::size_t n, double sigma2) {
  const std::size_t reps = sums.size();
  const double dn = static_cast<double>(n);
  SimulationReport rep;
  rep.n = n;
  rep.reps = reps;
  rep.sigma2_reference = sigma2;

  double mean_sq = 0.0;
  double mean = 0.0;
  for (double y : sums) {
    mean_sq += y * y / dn;
    mean += y / dn;
  }
  mean_sq /= static_cast<double>(reps);
  mean /= static_cast<double>(reps);
  rep.var_estimate = mean_sq;
  rep.mean_estimate = mean;

  if (reps >= 2) {
    double ss = 0.0;
    for (double y : sums) {
      const double d = y * y / dn - mean_sq;
      ss += d * d;
    }
    rep.var_stderr = std::sqrt(ss / static_cast<double>(reps - 1)) / std::sqrt(static_cast<double>(reps));
  }

  rep.degenerate = !(sigma2 > 1e-12);
  if (rep.degenerate || reps < 2) return rep;

  const double scale = std::sqrt(dn * sigma2);
  std::vector<double> z(sums.begin(), sums.end());
  for (double& v : z) v /= scale;

  double zbar = std::accumulate(z.begin(), z.end(), 0.0) / static_cast<double>(reps);
  double m2 = 0.0, m3 = 0.0, m4 = 0.0;
  for (double v : z) {
    const double d = v - zbar;
    const double d2 = d * d;
    m2 += d2;
    m3 += d2 * d;
    m4 += d2 * d2;
  }
  m2 /= static_cast<double>(reps);
  m3 /= static_cast<double>(reps);
  m4 /= static_cast<double>(reps);

  NormalityDiagnostics diag;
  if (m2 > 0.0) {
    diag.skewness = m3 / std::pow(m2, 1.5);
    diag.excess_kurtosis = m4 / (m2 * m2) - 3.0;
  }
  std::sort(z.begin(), z.end());
  const double m = static_cast<double>(reps);
  double d = 0.0;
  for (std::size_t i = 0; i < reps; ++i) {
    const double cdf = normal_cdf(z[i]);
    d = std::max({d, static_cast<double>(i + 1) / m - cdf, cdf - static_cast<double>(i) / m});
  }
  diag.ks_statistic = d;
  rep.diagnostics = diag;
  return rep;
}

SimulationReport empirical_variance(const TransitionMatrix& p, const Observable& f, const SimulationOptions& options) {
  if (options.n < 1) throw Error(Errc::InvalidParams, "simulation needs n >= 1");
  if (options.reps < 1) throw Error(Errc::InvalidParams, "simulation needs reps >= 1");
  if (f.size() != p.size()) throw Error(Errc::LengthMismatch, "observable does not match the chain");

  const ProbabilityVector pi = stationary(p);
  const Observable fbar = center(f, pi);
  const double sigma2 = asymptotic_variance(p, f).sigma2;
  const PathSampler sampler(p);
  {
    Rng probe(0);
    sampler.draw(options.start, probe);  // validates the start before spawning work
  }

  const unsigned workers = std::max(1u, options.threads);
  std::vector<double> sums(options.reps);
  std::vector<std::vector<std::uint64_t>> visits(workers, std::vector<std::uint64_t>(p.size(), 0));

  for_each_replica(options.reps, workers, [&](std::size_t r, unsigned w) {
    Rng rng = Rng::for_replica(options.seed, r);
    auto& counts = visits[w];
    StateIndex x = sampler.draw(options.start, rng);
    double s = 0.0;
    for (std::size_t k = 0; k < options.n; ++k) {
      s += fbar[x];
      ++counts[x];
      x = sampler.step(x, rng);
    }
    sums[r] = s;
  });

  SimulationReport rep = summarize_replicas(sums, options.n, sigma2);
  std::vector<double> total(p.size(), 0.0);
  for (const auto& counts : visits)
    for (std::size_t i = 0; i < counts.size(); ++i) total[i] += static_cast<double>(counts[i]);
  rep.empirical_pi = ProbabilityVector::normalized(std::move(total));
  rep.seed = options.seed;
  return rep;
}

// ---------------------------------------------------------------------------
// ERW step simulators

namespace erw {

DisorderedState step_disordered(const ErwParams& params, DisorderedState state, Rng& rng) {
  const int L = params.L;
  // Draw one sign from the jar (without replacement).
  const int drawn = rng.uniform() * L < state.pluses ? 1 : -1;
  const int fresh = rng.bernoulli(params.p) ? drawn : -drawn;
  // The drawn sign leaves the jar and the new sign goes in.
  state.pluses += (fresh > 0 ? 1 : 0) - (drawn > 0 ? 1 : 0);
  state.sign = fresh;
  return state;
}

OrderedState step_ordered(const ErwParams& params, OrderedState state, Rng& rng) {
  const int L = params.L;
  if (L > 64) throw Error(Errc::StateSpaceTooLarge, "word-encoded ordered state supports L <= 64");
  // Pick a uniform list position; the sign there is the sampled one.
  const auto pos = static_cast<int>(rng.uniform() * L);
  const int drawn = state.bit(pos);
  const int fresh = rng.bernoulli(params.p) ? drawn : 1 - drawn;
  state.bits = (state.bits >> 1) | (static_cast<std::uint64_t>(fresh) << (L - 1));
  return state;
}

DisorderedState sample_disordered_stationary(const ErwParams& params, Rng& rng) {
  int pluses = 0;
  for (int k = 0; k < params.L; ++k) pluses += rng.bernoulli(0.5) ? 1 : 0;
  const int sign = rng.uniform() * params.L < pluses ? 1 : -1;
  return {sign, pluses};
}

OrderedMemory OrderedMemory::sample_stationary(const ErwParams& params, std::span<const double> popcount_cdf,
                                               Rng& rng) {
  const int L = params.L;
  const double u = rng.uniform();
  auto it = std::upper_bound(popcount_cdf.begin(), popcount_cdf.end(), u);
  int k = static_cast<int>(std::min<std::ptrdiff_t>(it - popcount_cdf.begin(), L));

  OrderedMemory mem;
  mem.ring_.resize(static_cast<std::size_t>(L));
  mem.ones_ = k;
  // Selection sampling: each arrangement of k ones is equally likely.
  int remaining = L;
  for (auto& slot : mem.ring_) {
    const bool one = rng.uniform() * remaining < k;
    slot = one ? 1 : 0;
    k -= one ? 1 : 0;
    --remaining;
  }
  return mem;
}

int OrderedMemory::step(double p, Rng& rng) {
  const std::size_t L = ring_.size();
  auto pos = static_cast<std::size_t>(rng.uniform() * static_cast<double>(L));
  if (pos >= L) pos = L - 1;
  const int drawn = ring_[(head_ + pos) % L];
  const int fresh = rng.bernoulli(p) ? drawn : 1 - drawn;
  // Overwrite the oldest entry, which becomes the newest.
  ones_ += fresh - ring_[head_];
  ring_[head_] = static_cast<std::uint8_t>(fresh);
  head_ = (head_ + 1) % L;
  return 2 * fresh - 1;
}

SimulationReport walk_empirical_variance(Model model, const ErwParams& params, std::size_t n, std::size_t reps,
                                         std::uint64_t seed, unsigned threads) {
  params.validate();
  if (n < 1 || reps < 1) throw Error(Errc::InvalidParams, "walk simulation needs n >= 1 and reps >= 1");

  std::vector<double> cdf;
  if (model == Model::ordered) {
    cdf = ordered_popcount_law(params);
    std::partial_sum(cdf.begin(), cdf.end(), cdf.begin());
  }
  const double sigma2 = model == Model::ordered ? ordered_variance(params) : disordered_variance(params);

  std::vector<double> sums(reps);
  for_each_replica(reps, threads, [&](std::size_t r, unsigned) {
    Rng rng = Rng::for_replica(seed, r);
    long long x = 0;
    if (model == Model::disordered) {
      DisorderedState s = sample_disordered_stationary(params, rng);
      for (std::size_t k = 0; k < n; ++k) {
        s = step_disordered(params, s, rng);
        x += s.sign;
      }
    } else {
      OrderedMemory mem = OrderedMemory::sample_stationary(params, cdf, rng);
      for (std::size_t k = 0; k < n; ++k) x += mem.step(params.p, rng);
    }
    sums[r] = static_cast<double>(x);
  });

  SimulationReport rep = summarize_replicas(sums, n, sigma2);
  rep.seed = seed;
  return rep;
}

}  // namespace erw

}  // namespace mclt
