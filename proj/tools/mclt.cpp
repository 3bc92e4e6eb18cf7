#include <iostream>
#include <map>

#include <CLI11.hpp>

#include "mclt/cli.hpp"

int main(int argc, char** argv) {
  using mclt::cli::OutputFormat;
  mclt::cli::RunConfig config;
  std::vector<int> L_values;
  std::vector<double> p_values;

  CLI::App app{"Asymptotic variance of additive functionals of finite Markov chains"};
  app.require_subcommand(1);

  auto common = [&](CLI::App* sub) {
    sub->add_option("--format", config.format, "json or csv")
        ->transform(CLI::CheckedTransformer(std::map<std::string, OutputFormat>{{"json", OutputFormat::json},
                                                                               {"csv", OutputFormat::csv}}));
    sub->add_option("--out", config.out, "write the report here instead of stdout");
  };
  auto model_flags = [&](CLI::App* sub) {
    sub->add_option("--model", config.model, "disordered or ordered");
    sub->add_option("--L", L_values, "memory length(s), comma separated")->delimiter(',');
    sub->add_option("--p", p_values, "persistence probability(ies), comma separated")->delimiter(',');
  };
  auto mc_flags = [&](CLI::App* sub) {
    sub->add_option("--n", config.n, "steps per replica");
    sub->add_option("--reps", config.reps, "number of replicas");
    sub->add_option("--seed", config.seed, "random seed");
    sub->add_option("--threads", config.threads, "worker threads")->check(CLI::PositiveNumber);
  };

  auto* analyze = app.add_subcommand("analyze", "variance of f under a chain file by every applicable route");
  analyze->add_option("--input", config.input, "chain JSON file")->required();
  analyze->add_option("--i0", config.i0, "reference state label for the cycle route");
  common(analyze);

  auto* erw = app.add_subcommand("erw", "elephant random walk variance table");
  model_flags(erw);
  erw->get_option("--model")->required();
  mc_flags(erw);
  erw->add_option("--matrix-max-L", config.matrix_max_L, "largest L for the dense matrix route");
  common(erw);

  auto* simulate = app.add_subcommand("simulate", "Monte Carlo variance estimate");
  simulate->add_option("--input", config.input, "chain JSON file");
  model_flags(simulate);
  mc_flags(simulate);
  simulate->add_option("--i0", config.i0, "reference state label for regeneration statistics");
  simulate->add_option("--start", config.start, "start state label (default: stationary law)");
  simulate->add_option("--trajectory", config.trajectory, "write one sample path as CSV");
  common(simulate);

  auto* verify = app.add_subcommand("verify", "run the built-in property checks");
  verify->add_flag("--quick", config.quick, "reduced grid");
  verify->add_option("--seed", config.seed, "random seed for the Monte Carlo check");
  verify->add_option("--threads", config.threads, "worker threads")->check(CLI::PositiveNumber);
  verify->add_flag("--inject-perturbation", config.inject_perturbation, "corrupt one matrix entry (negative control)");
  common(verify);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : mclt::cli::kExitUsage;
  }

  config.subcommand = app.get_subcommands().front()->get_name();
  if (!L_values.empty()) config.L = L_values;
  if (!p_values.empty()) config.p = p_values;
  return mclt::cli::run(config, std::cout, std::cerr);
}
