#include "mclt/erw_models.hpp"

#include <bit>
#include <cmath>

#include "mclt/error.hpp"

namespace mclt::erw {

namespace {

double binomial(int n, int k) {
  double c = 1.0;
  for (int i = 1; i <= k; ++i) c = c * static_cast<double>(n - k + i) / static_cast<double>(i);
  return c;
}

void require_matrix_size(const ErwParams& params) {
  if (params.L > kOrderedMaxMatrixL)
    throw Error(Errc::StateSpaceTooLarge, "ordered memory matrix form supports L <= " +
                                              std::to_string(kOrderedMaxMatrixL) + " (got " +
                                              std::to_string(params.L) + ")");
}

}  // namespace

ErwParams ErwParams::make(int L, double p) {
  ErwParams params{L, p};
  params.validate();
  return params;
}

void ErwParams::validate() const {
  if (L < 1) throw Error(Errc::InvalidParams, "memory length L must be >= 1");
  if (!(p >= 0.0 && p < 1.0)) throw Error(Errc::InvalidParams, "acceptance probability must satisfy 0 <= p < 1");
}

int OrderedState::popcount() const noexcept { return std::popcount(bits); }

// ---------------------------------------------------------------------------
// Disordered memory

std::size_t disordered_index(const ErwParams& params, const DisorderedState& s) {
  const int L = params.L;
  if (s.sign == -1 && s.pluses >= 0 && s.pluses <= L - 1) return static_cast<std::size_t>(s.pluses);
  if (s.sign == 1 && s.pluses >= 1 && s.pluses <= L) return static_cast<std::size_t>(L - 1 + s.pluses);
  throw Error(Errc::InvalidState, "not a disordered-memory state: " + disordered_label(s));
}

DisorderedState disordered_state(const ErwParams& params, std::size_t index) {
  const auto L = static_cast<std::size_t>(params.L);
  if (index < L) return {-1, static_cast<int>(index)};
  if (index < 2 * L) return {1, static_cast<int>(index - L + 1)};
  throw Error(Errc::InvalidState, "disordered state index out of range");
}

std::string disordered_label(const DisorderedState& s) {
  return (s.sign > 0 ? "+1," : "-1,") + std::to_string(s.pluses);
}

ErwChain build_disordered(const ErwParams& params) {
  params.validate();
  const int L = params.L;
  const double p = params.p;
  const std::size_t n = 2 * static_cast<std::size_t>(L);

  DenseMatrix m(n, n);
  std::vector<std::string> labels(n);
  std::vector<double> step(n);
  for (std::size_t idx = 0; idx < n; ++idx) {
    const DisorderedState s = disordered_state(params, idx);
    const int j = s.pluses;
    const double plus_frac = static_cast<double>(j) / L;
    const double minus_frac = static_cast<double>(L - j) / L;
    labels[idx] = disordered_label(s);
    step[idx] = s.sign;
    // Drew +1 and kept it / drew -1 and kept it.
    if (j >= 1) m(idx, disordered_index(params, {1, j})) += plus_frac * p;
    if (j <= L - 1) m(idx, disordered_index(params, {-1, j})) += minus_frac * p;
    // Drew -1 and flipped it / drew +1 and flipped it.
    if (j <= L - 1) m(idx, disordered_index(params, {1, j + 1})) += minus_frac * (1.0 - p);
    if (j >= 1) m(idx, disordered_index(params, {-1, j - 1})) += plus_frac * (1.0 - p);
  }
  return {build_transition(std::move(m), std::move(labels)), Observable(std::move(step))};
}

ProbabilityVector disordered_stationary(const ErwParams& params) {
  params.validate();
  const int L = params.L;
  const double scale = static_cast<double>(L) * std::ldexp(1.0, L);
  std::vector<double> w(2 * static_cast<std::size_t>(L));
  for (std::size_t idx = 0; idx < w.size(); ++idx) {
    const DisorderedState s = disordered_state(params, idx);
    const int mult = s.sign > 0 ? s.pluses : L - s.pluses;
    w[idx] = binomial(L, s.pluses) * mult / scale;
  }
  return ProbabilityVector(std::move(w));
}

double disordered_variance(const ErwParams& params) {
  params.validate();
  return params.p / (1.0 - params.p);
}

Observable disordered_potential(const ErwParams& params) {
  params.validate();
  const double slope = (1.0 - 2.0 * params.p) / (1.0 - params.p);
  std::vector<double> u(2 * static_cast<std::size_t>(params.L));
  for (std::size_t idx = 0; idx < u.size(); ++idx) {
    const DisorderedState s = disordered_state(params, idx);
    u[idx] = slope * (0.5 * params.L - s.pluses) + s.sign;
  }
  return Observable(std::move(u));
}

// ---------------------------------------------------------------------------
// Ordered memory

std::string ordered_label(const ErwParams& params, OrderedState s) {
  std::string out(static_cast<std::size_t>(params.L), '0');
  for (int k = 0; k < params.L; ++k) out[static_cast<std::size_t>(k)] = s.bit(k) ? '1' : '0';
  return out;
}

ErwChain build_ordered(const ErwParams& params) {
  params.validate();
  require_matrix_size(params);
  const int L = params.L;
  const double p = params.p;
  const std::size_t n = std::size_t{1} << L;
  const std::uint64_t top = std::uint64_t{1} << (L - 1);

  DenseMatrix m(n, n);
  std::vector<std::string> labels(n);
  std::vector<double> step(n);
  for (std::uint64_t w = 0; w < n; ++w) {
    const OrderedState s{w};
    const int k = s.popcount();
    const double append_one = (k * p + (L - k) * (1.0 - p)) / L;
    m(w, (w >> 1) | top) = append_one;
    m(w, w >> 1) = 1.0 - append_one;
    labels[w] = ordered_label(params, s);
    step[w] = 2.0 * s.bit(L - 1) - 1.0;
  }
  return {build_transition(std::move(m), std::move(labels)), Observable(std::move(step))};
}

Observable ordered_front_observable(const ErwParams& params) {
  params.validate();
  require_matrix_size(params);
  const std::size_t n = std::size_t{1} << params.L;
  std::vector<double> v(n);
  for (std::uint64_t w = 0; w < n; ++w) v[w] = static_cast<double>(w & 1u);
  return Observable(std::move(v));
}

double append_weight(const ErwParams& params, int j) {
  const double frac = static_cast<double>(j) / params.L;
  return (1.0 - params.p) * (1.0 - frac) + frac * params.p;
}

std::vector<double> ordered_popcount_law(const ErwParams& params) {
  params.validate();
  const int L = params.L;
  // log of C(L,k) * prod_{j<k} c_j / c_{L-j-1}
  std::vector<double> logw(static_cast<std::size_t>(L) + 1);
  double log_ratio = 0.0;
  for (int k = 0; k <= L; ++k) {
    if (k > 0) log_ratio += std::log(append_weight(params, k - 1)) - std::log(append_weight(params, L - k));
    logw[static_cast<std::size_t>(k)] = std::lgamma(L + 1.0) - std::lgamma(k + 1.0) - std::lgamma(L - k + 1.0) + log_ratio;
  }
  double peak = logw[0];
  for (double v : logw) peak = std::max(peak, v);
  double z = 0.0;
  for (double& v : logw) z += (v = std::exp(v - peak));
  for (double& v : logw) v /= z;
  return logw;
}

ProbabilityVector ordered_stationary(const ErwParams& params) {
  params.validate();
  require_matrix_size(params);
  const int L = params.L;
  const std::vector<double> law = ordered_popcount_law(params);
  const std::size_t n = std::size_t{1} << L;
  std::vector<double> w(n);
  for (std::uint64_t word = 0; word < n; ++word) {
    const int k = std::popcount(word);
    w[word] = law[static_cast<std::size_t>(k)] / binomial(L, k);
  }
  return ProbabilityVector(std::move(w));
}

double ordered_variance(const ErwParams& params) {
  params.validate();
  const double L = params.L;
  const double p = params.p;
  return (L - 1.0 + 2.0 * p) / (2.0 * (1.0 - p) * (2.0 * (1.0 - p) * L + 2.0 * p - 1.0));
}

double rho_bar_one(const ErwParams& params) {
  params.validate();
  const double L = params.L;
  const double p = params.p;
  return (2.0 * p - 1.0) / (4.0 * (2.0 * L * (1.0 - p) + 2.0 * p - 1.0));
}

namespace {

// Drives the length-L recursion, handing each term rho_bar_n (n >= 1) to `visit`
// until it returns false.
template <class Visit>
void run_recursion(const ErwParams& params, Visit&& visit) {
  const auto L = static_cast<std::size_t>(params.L);
  const double coef = (2.0 * params.p - 1.0) / params.L;
  const double first = rho_bar_one(params);
  std::vector<double> window(L);  // ring of the last L terms
  double window_sum = 0.25;
  window[0] = 0.25;
  for (std::size_t n = 1; n < L; ++n) {
    window[n] = first;
    window_sum += first;
    if (!visit(n, first)) return;
  }
  for (std::size_t n = L;; ++n) {
    const double next = coef * window_sum;
    const std::size_t slot = n % L;
    window_sum += next - window[slot];
    window[slot] = next;
    if (!visit(n, next)) return;
  }
}

}  // namespace

CorrelationSeries rho_bar_sequence(const ErwParams& params, std::size_t n_max) {
  params.validate();
  CorrelationSeries out;
  out.rho_bar.reserve(n_max + 1);
  out.rho_bar.push_back(0.25);
  if (n_max == 0) return out;
  run_recursion(params, [&](std::size_t n, double v) {
    out.rho_bar.push_back(v);
    return n < n_max;
  });
  return out;
}

double rho_bar_tail_sum(const ErwParams& params) {
  params.validate();
  constexpr std::size_t kMaxTerms = 100000;
  constexpr double kNegligible = 1e-14;
  const auto L = static_cast<std::size_t>(params.L);
  double sum = 0.0;
  double partial_sum_total = 0.0;
  std::size_t terms = 0;
  std::size_t small_run = 0;
  run_recursion(params, [&](std::size_t n, double v) {
    sum += v;
    partial_sum_total += sum;
    terms = n;
    small_run = std::abs(v) < kNegligible ? small_run + 1 : 0;
    return small_run < L && n < kMaxTerms;
  });
  if (small_run >= L) return sum;
  // No decay (L = 1, p = 0 alternates): Cesaro mean of the partial sums.
  return partial_sum_total / static_cast<double>(terms);
}

double recursion_spectral_check(const ErwParams& params) {
  params.validate();
  const auto L = static_cast<std::size_t>(params.L);
  const double coef = (2.0 * params.p - 1.0) / params.L;
  DenseMatrix a(L, L);
  for (std::size_t j = 0; j < L; ++j) a(0, j) = coef;
  for (std::size_t i = 1; i < L; ++i) a(i, i - 1) = 1.0;

  auto inf_norm = [](const DenseMatrix& m) {
    double best = 0.0;
    for (std::size_t i = 0; i < m.rows(); ++i) {
      double s = 0.0;
      for (double v : m.row(i)) s += std::abs(v);
      best = std::max(best, s);
    }
    return best;
  };
  auto normalize = [&](DenseMatrix& m) {
    const double norm = inf_norm(m);
    if (norm > 0.0)
      for (std::size_t i = 0; i < m.rows(); ++i)
        for (double& v : m.row(i)) v /= norm;
    return norm;
  };

  // Gelfand: rho(A) = lim ||A^k||^(1/k), evaluated along k = 2^s by repeated
  // squaring of A^2 with the scale carried in log form.
  constexpr int kSquarings = 48;
  DenseMatrix m = a * a;
  double norm = normalize(m);
  if (norm == 0.0) return 0.0;
  double log_norm = std::log(norm);  // log ||A^(2^(s+1))||
  double power = 2.0;
  for (int s = 0; s < kSquarings; ++s) {
    m = m * m;
    norm = normalize(m);
    if (norm == 0.0) return 0.0;
    log_norm = 2.0 * log_norm + std::log(norm);
    power *= 2.0;
  }
  return std::exp(log_norm / power);
}

}  // namespace mclt::erw
