#include <cstdlib>
#include <filesystem>
#include <sstream>

#include <doctest.h>

#include "commands.hpp"
#include "config.hpp"
#include "pckal/errors.hpp"
#include "pckal/ground_truth.hpp"
#include "pckal/records.hpp"

using namespace pckal;
using namespace pckal::cli;

namespace {

std::filesystem::path scratch(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / "pckal-unit" / name;
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

std::string validation_message(const std::string& text) {
  try {
    (void)parse_config(text);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::validation);
    return e.what();
  }
  FAIL("expected a validation error");
  return {};
}

const char* kTinyAnalytic = R"({
  "problem": {"kind": "two-lsf-analytic"},
  "strategies": ["single:1", "convergence"],
  "metrics": ["U-LOO"],
  "budget": 13, "n_init": 8, "pool_size": 1500, "replications": 2, "base_seed": 5,
  "output_dir": "study", "truth_file": "truth.json"
})";

}  // namespace

TEST_SUITE("cli") {
  TEST_CASE("analytic defaults follow the reference protocol") {
    const StudyConfig c = parse_config(R"({"problem": {"kind": "two-lsf-analytic"}})");
    CHECK(c.budget == 49);
    CHECK(c.n_init == 10);
    CHECK(c.pool_size == 100000);
    CHECK(c.replications == 15);
    CHECK(c.strategies.size() == 4);
    CHECK(c.metrics == std::vector<std::string>{"U", "U-LOO"});
    CHECK(c.degrees.max == 4);
    CHECK(problem_name(c) == "two-lsf-analytic");
  }

  TEST_CASE("threshold problems require budget and n_init") {
    const std::string msg = validation_message(
        R"({"problem": {"kind": "threshold", "adapter": {"kind": "mock"}}})");
    CHECK(msg.find("budget") != std::string::npos);
    CHECK(msg.find("n_init") != std::string::npos);
    const StudyConfig c = parse_config(
        R"({"problem": {"kind": "threshold", "adapter": {"kind": "mock"}}, "budget": 20, "n_init": 6})");
    CHECK(c.replications == 10);
    CHECK(c.problem.thresholds.size() == 2);
    CHECK(problem_name(c) == "collision-mock");
  }

  TEST_CASE("strict validation") {
    CHECK(validation_message(R"({"problem": {"kind": "two-lsf-analytic"}, "budjet": 3})")
              .find("budjet: unknown key") != std::string::npos);
    const std::string both =
        validation_message(R"({"problem": {"kind": "two-lsf-analytic"}, "budget": 10, "n_init": 10})");
    CHECK(both.find("n_init") != std::string::npos);
    CHECK(both.find("budget") != std::string::npos);
    const std::string many = validation_message(
        R"({"problem": {"kind": "two-lsf-analytic"}, "strategies": ["single:3", "zigzag"], "metrics": ["EFF"], "pool_size": 0})");
    CHECK(many.find("single:3") != std::string::npos);
    CHECK(many.find("zigzag") != std::string::npos);
    CHECK(many.find("EFF") != std::string::npos);
    CHECK(many.find("pool_size") != std::string::npos);
    CHECK(validation_message("{not json").find("JSON") != std::string::npos);
    CHECK(validation_message(R"({"problem": {"kind": "two-lsf-analytic"}, "theta": {"lo": 5, "hi": 1}})")
              .find("theta") != std::string::npos);
  }

  TEST_CASE("configs round trip") {
    for (const auto* file : {"configs/analytic_protocol.json", "configs/collision_mock.json"}) {
      const StudyConfig c = parse_config(read_file(std::filesystem::path(PCKAL_SOURCE_DIR) / file));
      CHECK(parse_config(emit_config(c)) == c);
      CHECK(emit_config(parse_config(emit_config(c))) == emit_config(c));
    }
    const StudyConfig cmd = parse_config(
        R"({"problem": {"kind": "threshold", "adapter": {"kind": "command", "command": ["sim", "--fast"], "timeout_ms": 1000}}, "budget": 20, "n_init": 6})");
    CHECK(parse_config(emit_config(cmd)) == cmd);
  }

  TEST_CASE("bundled analytic config reproduces the protocol") {
    const StudyConfig c = load_config(std::filesystem::path(PCKAL_SOURCE_DIR) / "configs/analytic_protocol.json");
    CHECK(c.budget == 49);
    CHECK(c.n_init == 10);
    CHECK(c.pool_size == 100000);
    CHECK(c.replications == 15);
    CHECK(c.strategies.size() * c.metrics.size() == 8);
    CHECK(truth_path(c) == std::filesystem::path(PCKAL_SOURCE_DIR) / "data/truth/two_lsf_analytic.json");
  }

  TEST_CASE("exit codes") {
    CHECK(exit_code_for(ErrorCode::validation) == kValidation);
    CHECK(exit_code_for(ErrorCode::undefined_reference) == kValidation);
    CHECK(exit_code_for(ErrorCode::external_evaluator) == kAdapter);
    CHECK(exit_code_for(ErrorCode::io) == kRuntime);
  }

  TEST_CASE("truth command guards and caching") {
    const auto dir = scratch("cli-truth");
    write_file_atomic(dir / "c.json", kTinyAnalytic);
    std::ostringstream out, err;
    CHECK(cmd_truth(dir / "c.json", 1000, 1, out, err) == kValidation);
    CHECK(err.str().find("1000000") != std::string::npos);
    CHECK_FALSE(std::filesystem::exists(dir / "truth.json"));

    CHECK(cmd_truth(dir / "c.json", 1'000'000, 1, out, err) == kOk);
    const auto written = std::filesystem::last_write_time(dir / "truth.json");
    const std::string first = read_file(dir / "truth.json");
    CHECK(TruthCache::load(dir / "truth.json").entries().size() == 2);
    std::ostringstream again;
    CHECK(cmd_truth(dir / "c.json", 1'000'000, 1, again, err) == kOk);
    CHECK(again.str().find("(cached)") != std::string::npos);
    CHECK(read_file(dir / "truth.json") == first);
    CHECK(std::filesystem::last_write_time(dir / "truth.json") == written);

    write_file_atomic(dir / "ext.json", R"({"problem": {"kind": "threshold", "adapter": {"kind": "command", "command": ["sim"]}}, "budget": 20, "n_init": 6})");
    CHECK(cmd_truth(dir / "ext.json", 1'000'000, 1, out, err) == kValidation);
    CHECK(err.str().find("external simulator") != std::string::npos);
  }

  TEST_CASE("report without truth points at the truth command") {
    const auto dir = scratch("cli-report");
    write_file_atomic(dir / "c.json", kTinyAnalytic);
    std::ostringstream out, err;
    REQUIRE(cmd_run(dir / "c.json", {}, out, err) == kOk);
    CHECK(err.str().find("pckal truth") != std::string::npos);
    std::ostringstream rep_out, rep_err;
    CHECK(cmd_report(dir / "study", "table", rep_out, rep_err) == kValidation);
    CHECK(rep_err.str().find("pckal truth") != std::string::npos);
  }

  TEST_CASE("run, report and resume") {
    const auto dir = scratch("cli-run");
    write_file_atomic(dir / "c.json", kTinyAnalytic);
    std::ostringstream out, err;
    REQUIRE(cmd_truth(dir / "c.json", 1'000'000, 3, out, err) == kOk);
    std::ostringstream run_out;
    REQUIRE(cmd_run(dir / "c.json", {}, run_out, err) == kOk);
    CHECK(run_out.str().find("X_g1 U-LOO: runs=2") != std::string::npos);
    CHECK(run_out.str().find("X_g*j U-LOO: runs=2") != std::string::npos);
    const auto study = dir / "study";
    CHECK(std::filesystem::exists(study / "records" / "single-1__U-LOO__r00.csv"));
    CHECK(std::filesystem::exists(study / "checkpoints" / "convergence__U-LOO__r01.json"));
    CHECK(std::filesystem::exists(study / "truth" / "truth.json"));
    const std::string table = read_file(study / "report.txt");
    const std::string summary = read_file(study / "summary.csv");

    std::ostringstream rep_out;
    CHECK(cmd_report(study, "table", rep_out, err) == kOk);
    CHECK(rep_out.str() == table);
    CHECK(read_file(study / "summary.csv") == summary);
    std::ostringstream csv_out;
    CHECK(cmd_report(study, "csv", csv_out, err) == kOk);
    CHECK(csv_out.str() == summary);
    CHECK(cmd_report(study, "yaml", csv_out, err) == kValidation);

    std::filesystem::remove(study / "records" / "convergence__U-LOO__r01.csv");
    std::ostringstream resumed;
    RunOptions options;
    options.resume = true;
    CHECK(cmd_run(dir / "c.json", options, resumed, err) == kOk);
    CHECK(resumed.str() == run_out.str());
    CHECK(read_file(study / "report.txt") == table);

    RunOptions elsewhere;
    elsewhere.out = dir / "second";
    elsewhere.jobs = 2;
    std::ostringstream second;
    CHECK(cmd_run(dir / "c.json", elsewhere, second, err) == kOk);
    CHECK(read_file(dir / "second" / "report.txt") == table);
  }

  TEST_CASE("adapter failures exit with the adapter status") {
    const auto dir = scratch("cli-adapter");
    write_file_atomic(dir / "c.json", R"({
      "problem": {"kind": "threshold", "adapter": {"kind": "command", "command": ["sh", "-c", "exit 1"]}},
      "strategies": ["alternate"], "metrics": ["U"],
      "budget": 10, "n_init": 6, "pool_size": 500, "replications": 1
    })");
    std::ostringstream out, err;
    CHECK(cmd_run(dir / "c.json", {}, out, err) == kAdapter);
    CHECK(err.str().find("simulator") != std::string::npos);

    write_file_atomic(dir / "bad.json", R"({"problem": {"kind": "two-lsf-analytic"}, "n_init": 60})");
    CHECK(cmd_run(dir / "bad.json", {}, out, err) == kValidation);
    CHECK(cmd_run(dir / "missing.json", {}, out, err) != kOk);
  }

  TEST_CASE("mock adapter studies run through the line protocol") {
    ::setenv("PCKAL_MOCK_SIMULATOR", PCKAL_MOCK_BINARY, 1);
    CHECK(mock_simulator_path() == PCKAL_MOCK_BINARY);
    const auto dir = scratch("cli-mock");
    write_file_atomic(dir / "c.json", R"({
      "problem": {"kind": "threshold", "adapter": {"kind": "mock"}},
      "strategies": ["single:1", "alternate"], "metrics": ["U-LOO"],
      "budget": 12, "n_init": 6, "pool_size": 800, "replications": 1
    })");
    std::ostringstream out, err;
    REQUIRE(cmd_run(dir / "c.json", {}, out, err) == kOk);
    CHECK(out.str().find("p_gF=") != std::string::npos);
    const StudyConfig c = load_config(dir / "c.json");
    const BuiltProblem built = build_problem(c);
    REQUIRE(built.simulator != nullptr);
    CHECK(built.problem.limit_states[0].evaluate(Eigen::Vector2d(3.0, 317.0)) ==
          doctest::Approx(3.0 - 2.2));
    CHECK_THROWS_AS(build_problem(parse_config(R"({"problem": {"kind": "threshold", "adapter": {"kind": "command", "command": ["x"]}}, "budget": 9, "n_init": 4})"), true),
                    Error);
  }
}
