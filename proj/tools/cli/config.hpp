#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "pckal/active_learning.hpp"
#include "pckal/problems.hpp"

namespace pckal::cli {

struct AdapterSpec {
  std::string kind = "mock";  // "mock" or "command"
  MockPenetration mock;
  std::vector<std::string> command;
  std::size_t concurrency = 1;
  std::int64_t timeout_ms = 600'000;

  bool operator==(const AdapterSpec& other) const;
};

struct ProblemSpec {
  std::string kind = kAnalyticProblem;  // "two-lsf-analytic" or "threshold"
  std::string name;                     // threshold problems only
  std::vector<Marginal> inputs;
  std::vector<Threshold> thresholds;
  AdapterSpec adapter;

  bool operator==(const ProblemSpec& other) const;
};

struct StudyConfig {
  ProblemSpec problem;
  std::vector<std::string> strategies;
  std::vector<std::string> metrics;
  std::size_t budget = 0;
  std::size_t n_init = 0;
  std::size_t pool_size = 0;
  std::size_t replications = 0;
  std::uint64_t base_seed = 0;
  DegreeRange degrees;
  ThetaSearch theta;
  std::filesystem::path output_dir;
  std::optional<std::filesystem::path> truth_file;

  bool operator==(const StudyConfig& other) const;
};

/// Strict parse: unknown keys, wrong types and out-of-range values are all reported, one
/// "field: problem" line per issue, in a single validation error. Relative paths are kept
/// as written.
StudyConfig parse_config(const std::string& text);

/// Reads and parses a file, resolving relative paths against the file's directory.
StudyConfig load_config(const std::filesystem::path& path);

/// Canonical JSON with every field spelled out; parse_config(emit_config(c)) == c.
std::string emit_config(const StudyConfig& config);

/// Truth file used by `truth` and copied into study directories by `run`.
std::filesystem::path truth_path(const StudyConfig& config);

/// Problem name used in records and truth files.
std::string problem_name(const StudyConfig& config);

}  // namespace pckal::cli
