#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "pckal/active_learning.hpp"
#include "pckal/reliability.hpp"

namespace pckal {

inline constexpr std::size_t kMinTruthSamples = 1'000'000;

/// Brute-force Monte Carlo estimate of p{g <= 0}. Draws are generated in fixed chunks
/// of 2^20 with one stream per chunk, so the result does not depend on threading.
ReliabilityEstimate monte_carlo_probability(const RandomInput& input,
                                            const std::function<double(const Eigen::VectorXd&)>& g,
                                            std::size_t n, std::uint64_t seed);

/// Reference beta for limit state `j` on the exact function. Requires n >= 10^6 and a
/// cheap-analytic limit state.
ReliabilityEstimate ground_truth_beta(const Problem& problem, std::size_t j, std::size_t n,
                                      std::uint64_t seed);

struct TruthEntry {
  std::string problem;
  std::string limit_state;
  std::size_t n = 0;
  std::uint64_t seed = 0;
  ReliabilityEstimate estimate;
};

/// JSON file of reference estimates keyed by (problem, limit state, n, seed).
class TruthCache {
 public:
  /// A missing file yields an empty cache.
  static TruthCache load(const std::filesystem::path& path);
  void save(const std::filesystem::path& path) const;

  std::optional<TruthEntry> find(const std::string& problem, const std::string& limit_state,
                                 std::size_t n, std::uint64_t seed) const;
  /// Entry with the largest n for (problem, limit state); first one wins ties.
  std::optional<TruthEntry> best(const std::string& problem, const std::string& limit_state) const;
  void add(TruthEntry entry);

  const std::vector<TruthEntry>& entries() const noexcept { return entries_; }

 private:
  std::vector<TruthEntry> entries_;
};

}  // namespace pckal
