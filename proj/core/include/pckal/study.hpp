#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "pckal/active_learning.hpp"
#include "pckal/records.hpp"

namespace pckal {

struct StudySpec {
  std::vector<std::string> strategies;  // strategy keys, e.g. "single:1"
  std::vector<LearningMetric> metrics;
  std::size_t replications = 15;
  std::uint64_t base_seed = 0;
  /// budget, n_init, pool_size, degrees and search are taken from here; seed,
  /// checkpoint and resume are set per run.
  ActiveLearningConfig run;
  std::filesystem::path output_dir;
  std::size_t jobs = 1;
  /// Reuse finished records and continue from checkpoints.
  bool resume = false;
  /// Called under a lock after each run finishes (or is reused).
  std::function<void(const RunInfo&)> on_run_complete;
};

/// Seed shared by every (strategy, metric) pair for replication `rep`, so strategies are
/// compared on the same pool and initial design.
std::uint64_t replication_seed(std::uint64_t base_seed, std::size_t replication);

struct StudyLayout {
  std::filesystem::path root;

  std::filesystem::path records_dir() const { return root / "records"; }
  std::filesystem::path checkpoints_dir() const { return root / "checkpoints"; }
  std::filesystem::path truth_file() const { return root / "truth" / "truth.json"; }
  std::filesystem::path record(const std::string& run_id) const {
    return records_dir() / (run_id + ".csv");
  }
  std::filesystem::path checkpoint(const std::string& run_id) const {
    return checkpoints_dir() / (run_id + ".json");
  }
};

/// Runs replications x strategies x metrics active-learning runs and writes one evolution
/// file per run under records/. Results are ordered metric-major, then strategy, then
/// replication, independent of `jobs`. The first failure stops the remaining work and is
/// rethrown once running jobs have finished.
std::vector<EvolutionFile> run_study(const Problem& problem, const StudySpec& spec);

}  // namespace pckal
