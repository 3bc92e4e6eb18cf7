#include <cmath>
#include <fstream>
#include <ostream>

#include "mclt/cli.hpp"
#include "mclt/erw_models.hpp"
#include "mclt/simulate.hpp"
#include "mclt/variance.hpp"
#include "report.hpp"

namespace mclt::cli {

using report::json;
using report::num;
using report::nums;

namespace {

StateIndex resolve_label(const TransitionMatrix& p, const std::string& label) {
  if (auto idx = p.index_of(label)) return *idx;
  throw Error(Errc::InvalidState, "no state labelled '" + label + "'");
}

erw::Model parse_model(const std::string& name) {
  if (name == "disordered") return erw::Model::disordered;
  if (name == "ordered") return erw::Model::ordered;
  throw Error(Errc::InvalidParams, "model must be 'disordered' or 'ordered' (got '" + name + "')");
}

std::string render(const json& doc) { return doc.dump(2) + "\n"; }

/// |estimate - sigma2| <= 3 stderr + 5 sigma2 / sqrt(n)
bool mc_within_tolerance(const SimulationReport& rep) {
  if (!rep.var_stderr) return false;
  const double slack = 3.0 * *rep.var_stderr + 5.0 * rep.sigma2_reference / std::sqrt(static_cast<double>(rep.n));
  return std::abs(rep.var_estimate - rep.sigma2_reference) <= slack;
}

json diagnostics_json(const SimulationReport& rep) {
  if (!rep.diagnostics) return nullptr;
  return {{"skewness", num(rep.diagnostics->skewness)},
          {"excess_kurtosis", num(rep.diagnostics->excess_kurtosis)},
          {"ks_statistic", num(rep.diagnostics->ks_statistic)}};
}

}  // namespace

int exit_code_for(Errc code) noexcept { return 10 + static_cast<int>(code); }

// ---------------------------------------------------------------------------
// analyze

CommandResult cmd_analyze(const RunConfig& config) {
  if (!config.input) throw Error(Errc::FileNotFound, "analyze needs --input <chain.json>");
  const ChainFile chain = load_chain(*config.input);
  if (!chain.f) throw Error(Errc::ParseError, "analyze needs an observable \"f\" in the chain file");
  const TransitionMatrix& p = chain.P;
  const Observable& f = *chain.f;

  if (!is_irreducible(p)) throw Error(Errc::NotIrreducible, "the chain in '" + *config.input + "' is not irreducible");
  const ProbabilityVector pi = stationary(p);
  const bool reversible = is_reversible(p, pi);
  const StateIndex i0 = config.i0 ? resolve_label(p, *config.i0) : 0;

  const VarianceReport poisson = asymptotic_variance(p, f);
  std::vector<std::pair<VarianceReport, json>> routes;
  routes.emplace_back(poisson, json{{"residual", num(*poisson.poisson_residual)}});
  const VarianceReport cycle = cycle_variance(p, f, i0);
  routes.emplace_back(cycle, json{{"i0", p.label(i0)},
                                  {"block_mean", num(*cycle.block_mean)},
                                  {"block_second_moment", num(*cycle.block_second_moment)}});
  if (reversible) {
    const VarianceReport spectral = reversible_variance(p, f);
    routes.emplace_back(spectral, json{{"eigenvalues", nums(spectral.eigenvalues)}});
  }
  if (p.size() == 2) routes.emplace_back(two_state_variance(p, f), json::object());

  json route_docs = json::array();
  double max_delta = 0.0;
  std::vector<std::vector<std::string>> rows;
  for (const auto& [rep, details] : routes) {
    const double delta = std::abs(rep.sigma2 - poisson.sigma2);
    max_delta = std::max(max_delta, delta);
    route_docs.push_back({{"route", std::string(to_string(rep.route))},
                          {"sigma2", num(rep.sigma2)},
                          {"delta_vs_poisson", num(delta)},
                          {"details", details}});
    rows.push_back({std::string(to_string(rep.route)), rep.route == VarianceRoute::cycle ? p.label(i0) : "n/a",
                    report::field(rep.sigma2), report::field(delta)});
  }

  CommandResult result;
  if (config.format == OutputFormat::csv) {
    result.output = report::csv({"route", "i0", "sigma2", "delta_vs_poisson"}, rows);
    return result;
  }
  json doc{{"command", "analyze"},
           {"n_states", p.size()},
           {"labels", p.labels()},
           {"irreducible", true},
           {"reversible", reversible},
           {"stationary", nums(pi.weights())},
           {"observable_mean", num(pi.expect(f))},
           {"routes", route_docs},
           {"max_route_delta", num(max_delta)}};
  result.output = render(doc);
  return result;
}

// ---------------------------------------------------------------------------
// erw

CommandResult cmd_erw(const RunConfig& config) {
  const erw::Model model = parse_model(config.model);
  CommandResult result;
  json rows = json::array();
  std::vector<std::vector<std::string>> csv_rows;

  for (int L : config.L) {
    for (double pr : config.p) {
      const erw::ErwParams params = erw::ErwParams::make(L, pr);
      const double closed = model == erw::Model::ordered ? erw::ordered_variance(params) : erw::disordered_variance(params);

      json matrix = nullptr;
      std::string matrix_status = "ok";
      const bool too_large = model == erw::Model::ordered ? L > erw::kOrderedMaxMatrixL : false;
      const bool beyond_budget = model == erw::Model::ordered ? L > config.matrix_max_L
                                                              : 2.0 * L > std::ldexp(1.0, config.matrix_max_L);
      if (too_large) {
        matrix_status = "state_space_too_large";
      } else if (beyond_budget) {
        matrix_status = "skipped";
      } else {
        const erw::ErwChain chain = model == erw::Model::ordered ? erw::build_ordered(params) : erw::build_disordered(params);
        matrix = num(asymptotic_variance(chain.P, chain.step).sigma2);
      }
      json matrix_agrees = nullptr;
      if (!matrix.is_null()) matrix_agrees = std::abs(matrix.get<double>() - closed) <= 1e-9 * std::max(1.0, closed);

      json mc = nullptr, mc_stderr = nullptr, mc_agrees = nullptr;
      if (config.reps > 0) {
        const SimulationReport rep = erw::walk_empirical_variance(model, params, config.n, config.reps, config.seed, config.threads);
        mc = num(rep.var_estimate);
        if (rep.var_stderr) {
          mc_stderr = num(*rep.var_stderr);
          mc_agrees = mc_within_tolerance(rep);
        }
      }

      rows.push_back({{"model", config.model},
                      {"L", L},
                      {"p", num(pr)},
                      {"closed_form", num(closed)},
                      {"matrix", matrix},
                      {"matrix_status", matrix_status},
                      {"mc_estimate", mc},
                      {"mc_stderr", mc_stderr},
                      {"matrix_agrees", matrix_agrees},
                      {"mc_agrees", mc_agrees}});
      csv_rows.push_back({config.model, std::to_string(L), report::field(pr), report::field(closed), report::field(matrix),
                          report::field(mc), report::field(mc_stderr), report::field(matrix_agrees),
                          report::field(mc_agrees)});
    }
  }
  if (config.reps == 1) result.warnings.push_back("reps = 1: Monte Carlo standard error omitted");

  if (config.format == OutputFormat::csv) {
    result.output = report::csv(
        {"model", "L", "p", "closed_form", "matrix", "mc_estimate", "mc_stderr", "matrix_agrees", "mc_agrees"}, csv_rows);
  } else {
    result.output = render(json{{"command", "erw"}, {"n", config.n}, {"reps", config.reps}, {"seed", config.seed}, {"rows", rows}});
  }
  return result;
}

// ---------------------------------------------------------------------------
// simulate

CommandResult cmd_simulate(const RunConfig& config) {
  std::optional<TransitionMatrix> p;
  std::optional<Observable> f;
  std::string source;
  if (config.input) {
    ChainFile chain = load_chain(*config.input);
    if (!chain.f) throw Error(Errc::ParseError, "simulate needs an observable \"f\" in the chain file");
    p = std::move(chain.P);
    f = std::move(chain.f);
    source = *config.input;
  } else {
    const erw::Model model = parse_model(config.model);
    if (config.L.size() != 1 || config.p.size() != 1)
      throw Error(Errc::InvalidParams, "simulate takes a single --L and --p");
    const erw::ErwParams params = erw::ErwParams::make(config.L.front(), config.p.front());
    erw::ErwChain chain = model == erw::Model::ordered ? erw::build_ordered(params) : erw::build_disordered(params);
    p = std::move(chain.P);
    f = std::move(chain.step);
    source = config.model + " L=" + std::to_string(params.L) + " p=" + format_sig12(params.p);
  }

  Start start = config.start ? Start{resolve_label(*p, *config.start)} : Start{stationary(*p)};
  SimulationOptions options{config.n, config.reps, start, config.seed, config.threads};
  const SimulationReport rep = empirical_variance(*p, *f, options);

  CommandResult result;
  if (config.reps < 2) result.warnings.push_back("reps < 2: standard error and diagnostics omitted");

  json regeneration = nullptr;
  if (config.i0 || config.trajectory) {
    const Trajectory traj = sample_path(*p, start, config.n, config.seed);
    if (config.i0) {
      const StateIndex i0 = resolve_label(*p, *config.i0);
      const RegenerationBlocks blocks = regeneration_blocks(traj, i0, *f);
      const std::size_t m = blocks.block_sums.size();
      double mean_len = 0.0, mean_sum = 0.0, mean_sq = 0.0;
      for (std::size_t k = 0; k < m; ++k) {
        mean_len += static_cast<double>(blocks.block_lengths[k]) / m;
        mean_sum += blocks.block_sums[k] / m;
        mean_sq += blocks.block_sums[k] * blocks.block_sums[k] / m;
      }
      const PotentialSolver solver(*p, i0);
      regeneration = {{"i0", p->label(i0)},
                      {"blocks", m},
                      {"first_passage", blocks.first_passage},
                      {"mean_block_length", num(mean_len)},
                      {"expected_block_length", num(1.0 / stationary(*p)[i0])},
                      {"mean_block_sum", num(mean_sum)},
                      {"expected_block_sum", num(solver.potential(*f)[i0])},
                      {"mean_block_sum_squared", num(mean_sq)},
                      {"expected_block_sum_squared", num(solver.second_moment(*f)[i0])}};
    }
    if (config.trajectory) {
      std::vector<std::vector<std::string>> rows;
      rows.reserve(traj.states.size());
      for (std::size_t k = 0; k < traj.states.size(); ++k)
        rows.push_back({std::to_string(k), std::to_string(traj.states[k]), p->label(traj.states[k])});
      result.trajectory_csv = report::csv({"step", "state_index", "state_label"}, rows);
    }
  }

  const json stderr_json = rep.var_stderr ? num(*rep.var_stderr) : json(nullptr);
  const json within = rep.var_stderr ? json(mc_within_tolerance(rep)) : json(nullptr);
  if (config.format == OutputFormat::csv) {
    std::vector<std::vector<std::string>> rows{
        {"n", std::to_string(rep.n)},
        {"reps", std::to_string(rep.reps)},
        {"seed", std::to_string(rep.seed)},
        {"sigma2_analytic", report::field(rep.sigma2_reference)},
        {"var_estimate", report::field(rep.var_estimate)},
        {"var_stderr", report::field(stderr_json)},
        {"mean_estimate", report::field(rep.mean_estimate)},
        {"degenerate", report::field(rep.degenerate)},
        {"skewness", rep.diagnostics ? report::field(rep.diagnostics->skewness) : "n/a"},
        {"excess_kurtosis", rep.diagnostics ? report::field(rep.diagnostics->excess_kurtosis) : "n/a"},
        {"ks_statistic", rep.diagnostics ? report::field(rep.diagnostics->ks_statistic) : "n/a"},
        {"within_tolerance", report::field(within)},
    };
    for (std::size_t i = 0; i < p->size(); ++i)
      rows.push_back({"empirical_pi[" + p->label(i) + "]", report::field((*rep.empirical_pi)[i])});
    result.output = report::csv({"field", "value"}, rows);
    return result;
  }

  json doc{{"command", "simulate"},
           {"source", source},
           {"labels", p->labels()},
           {"n", rep.n},
           {"reps", rep.reps},
           {"seed", rep.seed},
           {"start", config.start ? *config.start : "stationary"},
           {"sigma2_analytic", num(rep.sigma2_reference)},
           {"var_estimate", num(rep.var_estimate)},
           {"var_stderr", stderr_json},
           {"mean_estimate", num(rep.mean_estimate)},
           {"empirical_pi", nums(rep.empirical_pi->weights())},
           {"degenerate", rep.degenerate},
           {"diagnostics", diagnostics_json(rep)},
           {"within_tolerance", within},
           {"regeneration", regeneration}};
  result.output = render(doc);
  return result;
}

// ---------------------------------------------------------------------------
// dispatch

int run(const RunConfig& config, std::ostream& out, std::ostream& err) {
  CommandResult result;
  try {
    if (config.subcommand == "analyze") {
      result = cmd_analyze(config);
    } else if (config.subcommand == "erw") {
      result = cmd_erw(config);
    } else if (config.subcommand == "simulate") {
      result = cmd_simulate(config);
    } else if (config.subcommand == "verify") {
      result = cmd_verify(config);
    } else {
      err << "error: unknown subcommand '" << config.subcommand << "'\n";
      return kExitUsage;
    }
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return exit_code_for(e.code());
  }

  for (const auto& w : result.warnings) err << "warning: " << w << '\n';
  if (config.out) {
    std::ofstream file(*config.out, std::ios::binary);
    if (!file) {
      err << "error: cannot write '" << *config.out << "'\n";
      return exit_code_for(Errc::FileNotFound);
    }
    file << result.output;
  } else {
    out << result.output;
  }
  if (result.trajectory_csv && config.trajectory) {
    std::ofstream file(*config.trajectory, std::ios::binary);
    if (!file) {
      err << "error: cannot write '" << *config.trajectory << "'\n";
      return exit_code_for(Errc::FileNotFound);
    }
    file << *result.trajectory_csv;
  }
  return result.exit_code;
}

}  // namespace mclt::cli
