#include <algorithm>
#include <cmath>
#include <functional>
#include <sstream>

#include "mclt/cli.hpp"
#include "mclt/erw_models.hpp"
#include "mclt/rng.hpp"
#include "mclt/simulate.hpp"
#include "mclt/variance.hpp"
#include "report.hpp"

namespace mclt::cli {

using report::json;

namespace {

struct Check {
  std::string name;
  bool passed = true;
  std::string detail;
};

/// Records the worst deviation seen and the first failing case.
class Tracker {
 public:
  Tracker(std::string name, double tol) : name_(std::move(name)), tol_(tol) {}

  void observe(double deviation, const std::string& where) {
    ++cases_;
    if (!(deviation <= worst_)) worst_ = deviation;
    if (!(deviation <= tol_) && first_failure_.empty()) first_failure_ = where;
  }
  void fail(const std::string& where) {
    ++cases_;
    if (first_failure_.empty()) first_failure_ = where;
  }

  Check finish() const {
    std::ostringstream out;
    out << cases_ << " cases, worst deviation " << format_sig12(worst_) << ", tolerance " << format_sig12(tol_);
    if (!first_failure_.empty()) out << ", first failure: " << first_failure_;
    return {name_, first_failure_.empty(), out.str()};
  }

 private:
  std::string name_;
  double tol_;
  double worst_ = 0.0;
  std::size_t cases_ = 0;
  std::string first_failure_;
};

double max_diff(std::span<const double> a, std::span<const double> b) {
  double worst = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) worst = std::max(worst, std::abs(a[i] - b[i]));
  return worst;
}

double max_diff(const Observable& a, const Observable& b) { return max_diff(a.values(), b.values()); }

std::vector<double> p_grid() {
  std::vector<double> ps;
  for (int k = 0; k <= 9; ++k) ps.push_back(k / 10.0);
  return ps;
}

std::string case_name(int L, double p) { return "L=" + std::to_string(L) + " p=" + format_sig12(p); }

/// Random chain with a Hamiltonian cycle so it is always irreducible.
TransitionMatrix random_chain(Rng& rng, std::size_t n, bool reversible) {
  std::vector<std::vector<double>> w(n, std::vector<double>(n, 0.0));
  if (reversible) {
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i; j < n; ++j)
        if (j == i + 1 || rng.bernoulli(0.5)) w[i][j] = w[j][i] = 0.05 + rng.uniform();
  } else {
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j)
        if (rng.bernoulli(0.4)) w[i][j] = rng.uniform();
      w[i][(i + 1) % n] += 0.05 + rng.uniform();
    }
  }
  for (auto& row : w) {
    double s = 0.0;
    for (double x : row) s += x;
    if (s == 0.0) row[0] = s = 1.0;
    for (double& x : row) x /= s;
  }
  return build_transition(w, index_labels(n));
}

Observable random_observable(Rng& rng, std::size_t n) {
  std::vector<double> v(n);
  for (double& x : v) x = 4.0 * rng.uniform() - 2.0;
  return Observable(std::move(v));
}

/// Moves 1e-3 of mass between two entries of row 0, keeping P stochastic.
TransitionMatrix perturb(const TransitionMatrix& p) {
  if (p.size() < 2) return p;
  DenseMatrix m = p.dense();
  const auto row = p.row(0);
  const std::size_t from = static_cast<std::size_t>(std::max_element(row.begin(), row.end()) - row.begin());
  const std::size_t to = from == 0 ? 1 : 0;
  m(0, from) -= 1e-3;
  m(0, to) += 1e-3;
  return build_transition(std::move(m), p.labels());
}

struct Scale {
  int disordered_L, ordered_L, rho_L;
  std::size_t fuzz_chains, step_trials, mc_n, mc_reps;
};

Check two_state_routes(bool inject) {
  Tracker t("two_state_routes", 1e-10);
  const auto p = build_transition({{0.5, 0.5}, {0.5, 0.5}}, {"1", "2"});
  const auto q = inject ? perturb(p) : p;
  const Observable f({-1.0, 1.0});
  t.observe(std::abs(asymptotic_variance(p, f).sigma2 - 1.0), "poisson");
  for (StateIndex i0 : {0u, 1u}) t.observe(std::abs(cycle_variance(q, f, i0).sigma2 - 1.0), "cycle i0=" + p.label(i0));
  t.observe(std::abs(reversible_variance(p, f).sigma2 - 1.0), "spectral");
  t.observe(std::abs(two_state_variance(p, f).sigma2 - 1.0), "closed_form");
  return t.finish();
}

Check route_agreement(const Scale& s, bool inject) {
  Tracker t("route_agreement", 1e-8);
  Rng rng(0x5eed);
  for (std::size_t k = 0; k < s.fuzz_chains; ++k) {
    const std::size_t n = 2 + k % 7;
    const bool reversible = k % 2 == 1;
    const auto p = random_chain(rng, n, reversible);
    const auto f = random_observable(rng, n);
    const auto q = inject ? perturb(p) : p;
    const double ref = asymptotic_variance(p, f).sigma2;
    const std::string where = "chain " + std::to_string(k);
    for (StateIndex i0 = 0; i0 < n; ++i0) t.observe(std::abs(cycle_variance(q, f, i0).sigma2 - ref), where + " cycle");
    if (reversible) t.observe(std::abs(reversible_variance(p, f).sigma2 - ref), where + " spectral");
    if (n == 2) t.observe(std::abs(two_state_variance(p, f).sigma2 - ref), where + " closed_form");
  }
  return t.finish();
}

Check potential_identities(const Scale& s) {
  Tracker t("potential_identities", 1e-8);
  Rng rng(0xb0a7);
  for (std::size_t k = 0; k < s.fuzz_chains; ++k) {
    const std::size_t n = 1 + k % 8;
    const auto p = random_chain(rng, n, k % 2 == 1);
    const auto pi = stationary(p);
    const auto h = random_observable(rng, n);
    const auto g = center(random_observable(rng, n), pi);
    const std::string where = "chain " + std::to_string(k);
    for (StateIndex i0 = 0; i0 < n; ++i0) {
      const PotentialSolver solver(p, i0);
      const auto inverted = solver.potential(h - p.apply(h));
      t.observe(max_diff(inverted, h.shifted(-h[i0])), where + " (I-P)h");
      t.observe(max_diff(solver.potential(Observable::indicator(n, i0)), Observable::indicator(n, i0)), where + " delta");
      t.observe(std::abs(pi[i0] * solver.potential(Observable::constant(n, 1.0))[i0] - 1.0), where + " return time");
      const auto u = solver.potential(g);
      const auto pu = p.apply(u);
      t.observe(max_diff(solver.second_moment(g), solver.potential(u.hadamard(u) - pu.hadamard(pu))), where + " second moment");
    }
  }
  return t.finish();
}

Check disordered_grid(const Scale& s) {
  Tracker t("disordered_grid", 1e-9);
  for (int L = 1; L <= s.disordered_L; ++L)
    for (double pr : p_grid()) {
      const auto params = erw::ErwParams::make(L, pr);
      const auto chain = erw::build_disordered(params);
      t.observe(std::abs(asymptotic_variance(chain.P, chain.step).sigma2 - erw::disordered_variance(params)),
                case_name(L, pr) + " variance");
      t.observe(max_diff(stationary(chain.P).weights(), erw::disordered_stationary(params).weights()),
                case_name(L, pr) + " stationary");
    }
  return t.finish();
}

Check ordered_grid(const Scale& s) {
  Tracker t("ordered_grid", 1e-9);
  for (int L = 1; L <= s.ordered_L; ++L)
    for (double pr : p_grid()) {
      const auto params = erw::ErwParams::make(L, pr);
      const auto chain = erw::build_ordered(params);
      const double closed = erw::ordered_variance(params);
      t.observe(std::abs(asymptotic_variance(chain.P, chain.step).sigma2 - closed), case_name(L, pr) + " step");
      const double front = asymptotic_variance(chain.P, erw::ordered_front_observable(params)).sigma2;
      t.observe(std::abs(4.0 * front - closed), case_name(L, pr) + " front");
      t.observe(max_diff(stationary(chain.P).weights(), erw::ordered_stationary(params).weights()),
                case_name(L, pr) + " stationary");
    }
  return t.finish();
}

Check correlations(const Scale& s) {
  Tracker t("correlations", 1e-8);
  for (int L = 1; L <= s.rho_L; ++L)
    for (double pr : p_grid()) {
      const auto params = erw::ErwParams::make(L, pr);
      const std::string where = case_name(L, pr);
      if (L <= 8) {
        // One-step correlation of the front bit straight from pi and Q.
        const auto chain = erw::build_ordered(params);
        const auto pi = erw::ordered_stationary(params);
        const auto front = erw::ordered_front_observable(params);
        const auto next = chain.P.apply(front);
        t.observe(std::abs(pi.expect(front.hadamard(next)) - 0.25 - erw::rho_bar_one(params)), where + " rho_1");
      }
      t.observe(std::abs(0.25 + 2.0 * erw::rho_bar_tail_sum(params) - erw::ordered_variance(params) / 4.0),
                where + " series");
      if (L >= 2 && !(erw::recursion_spectral_check(params) < 1.0)) t.fail(where + " spectral radius");
    }
  return t.finish();
}

Check step_simulators(const Scale& s) {
  const std::size_t trials = s.step_trials;
  Tracker t("step_simulators", 3.0);  // deviations measured in binomial standard deviations
  auto compare = [&](const TransitionMatrix& p, std::size_t from, const std::vector<std::size_t>& counts,
                     const std::string& where) {
    for (std::size_t to = 0; to < counts.size(); ++to) {
      const double q = p(from, to);
      const double freq = static_cast<double>(counts[to]) / static_cast<double>(trials);
      const double sd = std::sqrt(q * (1.0 - q) / static_cast<double>(trials));
      if (sd == 0.0) {
        if (freq != q) t.fail(where + " impossible transition");
        else t.observe(0.0, where);
      } else {
        t.observe(std::abs(freq - q) / sd, where);
      }
    }
  };
  for (int L = 1; L <= 4; ++L)
    for (double pr : {0.0, 0.3, 0.75}) {
      const auto params = erw::ErwParams::make(L, pr);
      const auto dis = erw::build_disordered(params);
      for (std::size_t from = 0; from < dis.P.size(); ++from) {
        Rng rng = Rng::for_replica(1000 + 10 * L + static_cast<std::uint64_t>(pr * 100), from);
        std::vector<std::size_t> counts(dis.P.size(), 0);
        const auto start = erw::disordered_state(params, from);
        for (std::size_t k = 0; k < trials; ++k)
          ++counts[erw::disordered_index(params, erw::step_disordered(params, start, rng))];
        compare(dis.P, from, counts, "disordered " + case_name(L, pr));
      }
      const auto ord = erw::build_ordered(params);
      for (std::size_t from = 0; from < ord.P.size(); ++from) {
        Rng rng = Rng::for_replica(2000 + 10 * L + static_cast<std::uint64_t>(pr * 100), from);
        std::vector<std::size_t> counts(ord.P.size(), 0);
        for (std::size_t k = 0; k < trials; ++k) ++counts[erw::step_ordered(params, {from}, rng).bits];
        compare(ord.P, from, counts, "ordered " + case_name(L, pr));
      }
    }
  return t.finish();
}

Check monte_carlo(const Scale& s, std::uint64_t seed, unsigned threads) {
  Tracker t("monte_carlo", 1.0);  // deviation over allowed slack
  auto observe = [&](const SimulationReport& rep, const std::string& where) {
    if (!rep.var_stderr) return t.fail(where + " no stderr");
    const double slack = 3.0 * *rep.var_stderr + 5.0 * rep.sigma2_reference / std::sqrt(static_cast<double>(rep.n));
    t.observe(std::abs(rep.var_estimate - rep.sigma2_reference) / slack, where);
  };
  const auto sym = build_transition({{0.5, 0.5}, {0.5, 0.5}}, {"1", "2"});
  observe(empirical_variance(sym, Observable({-1.0, 1.0}), {s.mc_n, s.mc_reps, stationary(sym), seed, threads}),
          "symmetric two-state");
  observe(erw::walk_empirical_variance(erw::Model::disordered, erw::ErwParams::make(3, 0.75), s.mc_n, s.mc_reps, seed,
                                       threads),
          "disordered L=3 p=0.75");
  observe(erw::walk_empirical_variance(erw::Model::ordered, erw::ErwParams::make(4, 0.3), s.mc_n, s.mc_reps, seed,
                                       threads),
          "ordered L=4 p=0.3");
  return t.finish();
}

}  // namespace

CommandResult cmd_verify(const RunConfig& config) {
  const Scale scale = config.quick ? Scale{4, 6, 6, 40, 20000, 2000, 1000} : Scale{8, 10, 10, 200, 1000000, 10000, 10000};
  const std::vector<std::pair<std::string, std::function<Check()>>> plan{
      {"two_state_routes", [&] { return two_state_routes(config.inject_perturbation); }},
      {"route_agreement", [&] { return route_agreement(scale, config.inject_perturbation); }},
      {"potential_identities", [&] { return potential_identities(scale); }},
      {"disordered_grid", [&] { return disordered_grid(scale); }},
      {"ordered_grid", [&] { return ordered_grid(scale); }},
      {"correlations", [&] { return correlations(scale); }},
      {"step_simulators", [&] { return step_simulators(scale); }},
      {"monte_carlo", [&] { return monte_carlo(scale, config.seed, config.threads); }},
  };

  json checks = json::array();
  std::vector<std::vector<std::string>> rows;
  std::size_t passed = 0, failed = 0;
  for (const auto& [name, run_check] : plan) {
    Check c;
    try {
      c = run_check();
    } catch (const Error& e) {
      c = {name, false, std::string("error: ") + e.what()};
    }
    (c.passed ? passed : failed) += 1;
    checks.push_back({{"name", c.name}, {"passed", c.passed}, {"detail", c.detail}});
    rows.push_back({c.name, c.passed ? "pass" : "fail", "\"" + c.detail + "\""});
  }

  CommandResult result;
  result.exit_code = failed == 0 ? kExitOk : kExitVerifyFailed;
  if (config.format == OutputFormat::csv) {
    result.output = report::csv({"check", "status", "detail"}, rows);
  } else {
    result.output = json{{"command", "verify"},
                         {"quick", config.quick},
                         {"checks", checks},
                         {"passed", passed},
                         {"failed", failed}}
                        .dump(2) +
                    "\n";
  }
  return result;
}

}  // namespace mclt::cli
