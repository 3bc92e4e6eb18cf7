#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "mclt/cli.hpp"

using namespace mclt;
using namespace mclt::cli;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "mclt_cli_tests";
  fs::create_directories(dir);
  return dir / name;
}

std::string write_file(const std::string& name, const std::string& text) {
  const auto path = scratch(name);
  std::ofstream(path) << text;
  return path.string();
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

struct Outcome {
  int code;
  std::string out, err;
};

Outcome invoke(const RunConfig& config) {
  std::ostringstream out, err;
  const int code = run(config, out, err);
  return {code, out.str(), err.str()};
}

/// Runs the installed binary through the shell and returns its exit status.
int shell(const std::string& args, const std::string& stdout_file) {
  const std::string cmd = std::string(MCLT_BINARY) + " " + args + " > " + stdout_file + " 2> /dev/null";
  const int status = std::system(cmd.c_str());
  return WEXITSTATUS(status);
}

const char* kSymmetric = R"({"labels":["a","b"],"P":[[0.5,0.5],[0.5,0.5]],"f":[-1,1]})";

}  // namespace

// --- chain files -----------------------------------------------------------

TEST(ChainFile, ParsesLabelsAndObservable) {
  const auto chain = parse_chain(kSymmetric);
  EXPECT_EQ(chain.P.size(), 2u);
  EXPECT_EQ(chain.P.label(1), "b");
  ASSERT_TRUE(chain.f.has_value());
  EXPECT_EQ((*chain.f)[0], -1.0);
}

TEST(ChainFile, DefaultLabelsAndOptionalObservable) {
  const auto chain = parse_chain(R"({"P":[[0.2,0.8],[1,0]]})");
  EXPECT_EQ(chain.P.label(0), "0");
  EXPECT_FALSE(chain.f.has_value());
}

TEST(ChainFile, RoundTrip) {
  const auto chain = parse_chain(R"({"labels":["x","y","z"],"P":[[0.1,0.2,0.7],[0,0,1],[0.5,0.5,0]],"f":[1,2,3]})");
  const auto again = parse_chain(chain_to_json(chain.P, chain.f));
  for (std::size_t i = 0; i < 3; ++i) {
    EXPECT_EQ(again.P.label(i), chain.P.label(i));
    EXPECT_EQ((*again.f)[i], (*chain.f)[i]);
    for (std::size_t j = 0; j < 3; ++j) EXPECT_EQ(again.P(i, j), chain.P(i, j));
  }
}

TEST(ChainFile, Errors) {
  auto code_of = [](const std::string& text) {
    try {
      parse_chain(text);
    } catch (const Error& e) {
      return e.code();
    }
    return Errc{};
  };
  EXPECT_EQ(code_of("{not json"), Errc::ParseError);
  EXPECT_EQ(code_of(R"({"labels":["a"]})"), Errc::ParseError);
  EXPECT_EQ(code_of(R"({"P":[[0.5,0.6],[0.5,0.5]]})"), Errc::RowSumOutOfTolerance);
  EXPECT_EQ(code_of(R"({"P":[[1,0],[0,1]],"f":[1]})"), Errc::LengthMismatch);
  EXPECT_EQ(code_of(R"({"labels":["a","a"],"P":[[1,0],[0,1]]})"), Errc::DuplicateLabel);
  EXPECT_THROW(load_chain(scratch("missing.json").string()), Error);
}

TEST(Format, TwelveSignificantDigits) {
  EXPECT_EQ(format_sig12(1.0 / 3.0), "0.333333333333");
  EXPECT_EQ(format_sig12(1.0), "1");
  EXPECT_DOUBLE_EQ(round_sig12(2.0 / 3.0), 0.666666666667);
}

// --- analyze ---------------------------------------------------------------

TEST(Analyze, SymmetricChainAllRoutesGiveOne) {
  RunConfig config;
  config.subcommand = "analyze";
  config.input = write_file("sym.json", kSymmetric);
  config.i0 = "b";
  const auto r = invoke(config);
  ASSERT_EQ(r.code, 0) << r.err;
  const auto doc = json::parse(r.out);
  EXPECT_TRUE(doc["reversible"].get<bool>());
  ASSERT_EQ(doc["routes"].size(), 4u);
  for (const auto& route : doc["routes"]) EXPECT_EQ(route["sigma2"].get<double>(), 1.0) << route["route"];
  EXPECT_EQ(doc["routes"][1]["details"]["i0"], "b");
}

TEST(Analyze, ConstantObservableIsZero) {
  RunConfig config;
  config.subcommand = "analyze";
  config.input = write_file("const.json", R"({"P":[[0.1,0.9,0],[0,0.2,0.8],[0.7,0,0.3]],"f":[2,2,2]})");
  const auto doc = json::parse(invoke(config).out);
  EXPECT_FALSE(doc["reversible"].get<bool>());
  ASSERT_EQ(doc["routes"].size(), 2u);
  for (const auto& route : doc["routes"]) EXPECT_EQ(route["sigma2"].get<double>(), 0.0);
}

TEST(Analyze, CsvHasFixedColumns) {
  RunConfig config;
  config.subcommand = "analyze";
  config.input = write_file("sym.json", kSymmetric);
  config.format = OutputFormat::csv;
  const auto out = invoke(config).out;
  EXPECT_EQ(out.substr(0, out.find('\n')), "route,i0,sigma2,delta_vs_poisson");
  EXPECT_NE(out.find("closed_form,n/a,1,0"), std::string::npos);
}

TEST(Analyze, ErrorsMapToExitCodes) {
  RunConfig config;
  config.subcommand = "analyze";
  config.input = write_file("bad.json", R"({"P":[[0.5,0.6],[0.5,0.5]],"f":[1,2]})");
  auto r = invoke(config);
  EXPECT_EQ(r.code, exit_code_for(Errc::RowSumOutOfTolerance));
  EXPECT_NE(r.err.find("RowSumOutOfTolerance"), std::string::npos);

  config.input = write_file("reducible.json", R"({"P":[[1,0],[0,1]],"f":[1,2]})");
  EXPECT_EQ(invoke(config).code, exit_code_for(Errc::NotIrreducible));
  config.input = scratch("missing.json").string();
  EXPECT_EQ(invoke(config).code, exit_code_for(Errc::FileNotFound));
  config.input = write_file("nof.json", R"({"P":[[0.5,0.5],[0.5,0.5]]})");
  EXPECT_EQ(invoke(config).code, exit_code_for(Errc::ParseError));
}

TEST(Analyze, BinaryExitCodes) {
  const auto sink = scratch("stdout.txt").string();
  EXPECT_EQ(shell("analyze --input " + write_file("sym.json", kSymmetric), sink), 0);
  EXPECT_EQ(shell("analyze --input " + write_file("bad.json", R"({"P":[[0.5,0.6],[0.5,0.5]],"f":[1,2]})"), sink),
            exit_code_for(Errc::RowSumOutOfTolerance));
  EXPECT_EQ(shell("analyze", sink), kExitUsage);
  EXPECT_EQ(shell("frobnicate", sink), kExitUsage);
}

// --- erw -------------------------------------------------------------------

TEST(Erw, OrderedKnownValues) {
  RunConfig config;
  config.subcommand = "erw";
  config.model = "ordered";
  config.L = {3, 1000000};
  config.p = {0.0, 0.25};
  config.reps = 0;
  const auto r = invoke(config);
  ASSERT_EQ(r.code, 0) << r.err;
  const auto rows = json::parse(r.out)["rows"];
  ASSERT_EQ(rows.size(), 4u);
  EXPECT_NEAR(rows[0]["closed_form"].get<double>(), 0.2, 1e-12);
  EXPECT_NEAR(rows[0]["matrix"].get<double>(), 0.2, 1e-9);
  EXPECT_TRUE(rows[0]["matrix_agrees"].get<bool>());
  EXPECT_EQ(rows[3]["L"], 1000000);
  EXPECT_NEAR(rows[3]["closed_form"].get<double>(), 4.0 / 9.0, 1e-6);
  EXPECT_TRUE(rows[3]["matrix"].is_null());
  EXPECT_EQ(rows[3]["matrix_status"], "state_space_too_large");
  EXPECT_TRUE(rows[3]["mc_estimate"].is_null());
}

TEST(Erw, DisorderedHalfIsSimpleRandomWalk) {
  RunConfig config;
  config.subcommand = "erw";
  config.model = "disordered";
  config.L = {1, 4};
  config.p = {0.5};
  config.n = 2000;
  config.reps = 2000;
  const auto rows = json::parse(invoke(config).out)["rows"];
  for (const auto& row : rows) {
    EXPECT_EQ(row["closed_form"].get<double>(), 1.0);
    EXPECT_NEAR(row["matrix"].get<double>(), 1.0, 1e-9);
    EXPECT_TRUE(row["mc_agrees"].get<bool>()) << row.dump();
  }
}

TEST(Erw, MatrixBudgetSkipsLargeL) {
  RunConfig config;
  config.subcommand = "erw";
  config.model = "ordered";
  config.L = {5};
  config.p = {0.3};
  config.reps = 0;
  config.matrix_max_L = 4;
  const auto row = json::parse(invoke(config).out)["rows"][0];
  EXPECT_EQ(row["matrix_status"], "skipped");
  EXPECT_TRUE(row["matrix"].is_null());
}

TEST(Erw, InvalidParameters) {
  RunConfig config;
  config.subcommand = "erw";
  config.model = "ordered";
  config.p = {1.0};
  EXPECT_EQ(invoke(config).code, exit_code_for(Errc::InvalidParams));
  config.p = {0.5};
  config.model = "jar";
  EXPECT_EQ(invoke(config).code, exit_code_for(Errc::InvalidParams));
}

TEST(Erw, CsvSchema) {
  RunConfig config;
  config.subcommand = "erw";
  config.model = "disordered";
  config.L = {2};
  config.reps = 0;
  config.format = OutputFormat::csv;
  const auto out = invoke(config).out;
  EXPECT_EQ(out, "model,L,p,closed_form,matrix,mc_estimate,mc_stderr,matrix_agrees,mc_agrees\n"
                 "disordered,2,0.5,1,1,n/a,n/a,true,n/a\n");
}

// --- simulate --------------------------------------------------------------

TEST(Simulate, SameSeedIsByteIdentical) {
  RunConfig config;
  config.subcommand = "simulate";
  config.input = write_file("sym.json", kSymmetric);
  config.n = 500;
  config.reps = 300;
  config.seed = 42;
  config.i0 = "a";
  const auto first = invoke(config);
  ASSERT_EQ(first.code, 0) << first.err;
  EXPECT_EQ(invoke(config).out, first.out);
  config.threads = 3;
  EXPECT_EQ(invoke(config).out, first.out);
  config.seed = 43;
  EXPECT_NE(invoke(config).out, first.out);
}

TEST(Simulate, SingleReplicaWarns) {
  RunConfig config;
  config.subcommand = "simulate";
  config.model = "ordered";
  config.L = {3};
  config.p = {0.3};
  config.n = 100;
  config.reps = 1;
  const auto r = invoke(config);
  ASSERT_EQ(r.code, 0);
  EXPECT_NE(r.err.find("warning"), std::string::npos);
  const auto doc = json::parse(r.out);
  EXPECT_TRUE(doc["var_stderr"].is_null());
  EXPECT_TRUE(doc["diagnostics"].is_null());
}

TEST(Simulate, TrajectoryFile) {
  RunConfig config;
  config.subcommand = "simulate";
  config.input = write_file("sym.json", kSymmetric);
  config.n = 5;
  config.reps = 2;
  config.start = "b";
  config.trajectory = scratch("traj.csv").string();
  ASSERT_EQ(invoke(config).code, 0);
  const auto text = slurp(*config.trajectory);
  EXPECT_EQ(text.substr(0, text.find('\n')), "step,state_index,state_label");
  EXPECT_EQ(text.substr(text.find('\n') + 1, 6), "0,1,b\n");
  EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 7);
}

TEST(Simulate, OrderedErwWithinThreeStderr) {
  RunConfig config;
  config.subcommand = "simulate";
  config.model = "ordered";
  config.L = {4};
  config.p = {0.3};
  config.n = 10000;
  config.reps = 10000;
  const auto doc = json::parse(invoke(config).out);
  const double s2 = (4 - 1 + 0.6) / (2 * 0.7 * (2 * 0.7 * 4 + 0.6 - 1));
  EXPECT_NEAR(doc["sigma2_analytic"].get<double>(), s2, 1e-11);
  EXPECT_NEAR(doc["var_estimate"].get<double>(), s2, 3.0 * doc["var_stderr"].get<double>());
}

TEST(Simulate, UnknownStartLabel) {
  RunConfig config;
  config.subcommand = "simulate";
  config.input = write_file("sym.json", kSymmetric);
  config.start = "zz";
  EXPECT_EQ(invoke(config).code, exit_code_for(Errc::InvalidState));
}

TEST(Simulate, OutFileMatchesStdout) {
  RunConfig config;
  config.subcommand = "simulate";
  config.input = write_file("sym.json", kSymmetric);
  config.n = 200;
  config.reps = 50;
  const auto direct = invoke(config).out;
  config.out = scratch("report.json").string();
  EXPECT_TRUE(invoke(config).out.empty());
  EXPECT_EQ(slurp(*config.out), direct);
}

// --- verify ----------------------------------------------------------------

TEST(Verify, QuickPasses) {
  RunConfig config;
  config.subcommand = "verify";
  config.quick = true;
  const auto r = invoke(config);
  EXPECT_EQ(r.code, kExitOk) << r.out;
  EXPECT_EQ(json::parse(r.out)["failed"], 0);
}

TEST(Verify, PerturbationFailsRouteAgreement) {
  RunConfig config;
  config.subcommand = "verify";
  config.quick = true;
  config.inject_perturbation = true;
  const auto r = invoke(config);
  EXPECT_EQ(r.code, kExitVerifyFailed);
  for (const auto& check : json::parse(r.out)["checks"])
    if (check["name"] == "route_agreement") EXPECT_FALSE(check["passed"].get<bool>());
}
