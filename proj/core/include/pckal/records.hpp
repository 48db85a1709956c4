#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "pckal/active_learning.hpp"

namespace pckal {

/// Identity of one replicated run inside a study.
struct RunInfo {
  std::string run_id;
  std::string problem;
  std::string strategy;  // strategy_key()
  std::string metric;    // "U" or "U-LOO"
  std::size_t replication = 0;
  std::uint64_t seed = 0;
  std::string status = "complete";  // "complete" or "exhausted"
  std::size_t pool_size = 0;
  std::vector<std::string> inputs;        // marginal names
  std::vector<std::string> limit_states;  // limit-state names
};

/// e.g. "single-1__U__r00", "convergence__U-LOO__r14".
std::string make_run_id(const StrategySpec& strategy, std::size_t replication);

struct EvolutionFile {
  RunInfo info;
  std::vector<StepRecord> steps;
};

/// Evolution file layout: '#'-prefixed "key=value" metadata lines, then one
/// comma-separated header row and one row per refit:
///
///   step,design_size,target,pool_index,u_score,x_<input>...,
///   p_<ls>,beta_<ls>,se_<ls>,degree_<ls>,theta_<ls> (per limit state),wall_seconds
///
/// target is one-based; empty fields mark the post-budget row. Doubles use %.17g so
/// the file round-trips exactly.
std::string format_evolution(const RunInfo& info, const std::vector<StepRecord>& steps);
EvolutionFile parse_evolution(const std::string& text);

void write_evolution(const std::filesystem::path& path, const RunInfo& info,
                     const std::vector<StepRecord>& steps);
EvolutionFile read_evolution(const std::filesystem::path& path);

/// Writes through a temporary sibling and renames it into place.
void write_file_atomic(const std::filesystem::path& path, const std::string& content);
std::string read_file(const std::filesystem::path& path);

/// "%.17g", with "inf"/"-inf"/"nan" for non-finite values.
std::string format_double(double value);
double parse_double(const std::string& text);

}  // namespace pckal
