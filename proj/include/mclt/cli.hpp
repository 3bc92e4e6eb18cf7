#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "mclt/error.hpp"
#include "mclt/markov_core.hpp"

namespace mclt::cli {

enum class OutputFormat { json, csv };

struct RunConfig {
  std::string subcommand;
  std::optional<std::string> input;  // chain JSON file
  std::string model;                 // "disordered" or "ordered"
  std::vector<int> L{1, 2, 3, 4, 5, 6, 7, 8};
  std::vector<double> p{0.5};
  std::size_t n = 10000;
  std::size_t reps = 1000;
  std::uint64_t seed = 0;
  std::optional<std::string> i0;     // state label
  std::optional<std::string> start;  // state label; stationary law when absent
  OutputFormat format = OutputFormat::json;
  std::optional<std::string> out;
  std::optional<std::string> trajectory;  // simulate: CSV dump path
  bool quick = false;
  unsigned threads = 1;
  int matrix_max_L = 10;              // erw: largest L for the dense matrix route
  bool inject_perturbation = false;   // verify: negative control
};

/// Parsed chain file: {"labels": [...], "P": [[...], ...], "f": [...]}.
struct ChainFile {
  TransitionMatrix P;
  std::optional<Observable> f;
};

ChainFile parse_chain(std::string_view json_text);
ChainFile load_chain(const std::string& path);
std::string chain_to_json(const TransitionMatrix& p, const std::optional<Observable>& f);

struct CommandResult {
  std::string output;                     // rendered report
  int exit_code = 0;
  std::vector<std::string> warnings;
  std::optional<std::string> trajectory_csv;
};

CommandResult cmd_analyze(const RunConfig& config);
CommandResult cmd_erw(const RunConfig& config);
CommandResult cmd_simulate(const RunConfig& config);
CommandResult cmd_verify(const RunConfig& config);

inline constexpr int kExitOk = 0;
inline constexpr int kExitVerifyFailed = 1;
inline constexpr int kExitUsage = 2;

/// 10 + the numeric value of the error kind.
int exit_code_for(Errc code) noexcept;

/// Dispatches `config.subcommand`, writes the report to `--out` or `out`,
/// warnings and errors to `err`. Returns the process exit code.
int run(const RunConfig& config, std::ostream& out, std::ostream& err);

/// Rounds to 12 significant digits for serialization.
double round_sig12(double x);
std::string format_sig12(double x);

}  // namespace mclt::cli
