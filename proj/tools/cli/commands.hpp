#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>

#include "config.hpp"
#include "pckal/active_learning.hpp"
#include "pckal/errors.hpp"
#include "pckal/external_adapter.hpp"

namespace pckal::cli {

enum ExitCode : int { kOk = 0, kValidation = 1, kRuntime = 2, kAdapter = 3 };

ExitCode exit_code_for(ErrorCode code) noexcept;

/// Simulator executable behind `"adapter": {"kind": "mock"}`: $PCKAL_MOCK_SIMULATOR if set,
/// otherwise pckal-mock-penetration next to the running binary.
std::filesystem::path mock_simulator_path();

/// argv that starts the mock simulator with the configured surface parameters.
std::vector<std::string> mock_command(const MockPenetration& params);

struct BuiltProblem {
  Problem problem;
  std::shared_ptr<ExternalSimulator> simulator;  // null for in-process problems
};

/// Analytic problems run in process; threshold problems go through the line-protocol
/// adapter, or through the mock surface in process when `in_process_mock` is set.
BuiltProblem build_problem(const StudyConfig& config, bool in_process_mock = false);

struct RunOptions {
  std::optional<std::filesystem::path> out;
  std::size_t jobs = 1;
  bool resume = false;
};

int cmd_run(const std::filesystem::path& config_path, const RunOptions& options, std::ostream& out,
            std::ostream& err);

int cmd_truth(const std::filesystem::path& config_path, std::size_t n, std::uint64_t seed,
              std::ostream& out, std::ostream& err);

int cmd_report(const std::filesystem::path& study_dir, const std::string& format, std::ostream& out,
               std::ostream& err);

}  // namespace pckal::cli
