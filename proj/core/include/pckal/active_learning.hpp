#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "pckal/pck.hpp"
#include "pckal/prob_space.hpp"
#include "pckal/reliability.hpp"
#include "pckal/variance_correction.hpp"

namespace pckal {

/// Input model plus the m limit states trained on a shared design.
struct Problem {
  std::string name;
  RandomInput input;
  std::vector<LimitState> limit_states;
};

enum class LearningMetric { u, u_loo };

enum class StrategyKind { single_target, alternate, convergence_guided };

struct StrategySpec {
  StrategyKind kind = StrategyKind::alternate;
  std::size_t target = 0;  // zero-based; single_target only
  LearningMetric metric = LearningMetric::u;
};

std::string_view to_string(LearningMetric metric) noexcept;
LearningMetric parse_metric(std::string_view text);

/// "single:<j>" (one-based), "alternate" or "convergence".
std::string strategy_key(const StrategySpec& spec);
StrategySpec parse_strategy(std::string_view key, LearningMetric metric);

/// Shared design: physical inputs, their standard-space images and one response
/// column per limit state.
class ExperimentalDesign {
 public:
  ExperimentalDesign(std::size_t dims, std::size_t limit_states);

  std::size_t size() const noexcept { return static_cast<std::size_t>(inputs_.rows()); }
  std::size_t dims() const noexcept { return static_cast<std::size_t>(inputs_.cols()); }
  std::size_t limit_states() const noexcept { return static_cast<std::size_t>(responses_.cols()); }

  const Eigen::MatrixXd& inputs() const noexcept { return inputs_; }
  const Eigen::MatrixXd& standard() const noexcept { return standard_; }
  const Eigen::MatrixXd& responses() const noexcept { return responses_; }

  /// True if some design point lies within `tolerance` of u (standard space).
  bool contains(const Eigen::Ref<const Eigen::VectorXd>& u, double tolerance = 1e-10) const;

  /// Throws validation on a duplicate point or a wrong-length response vector.
  void append(const Eigen::VectorXd& x, const Eigen::VectorXd& u, const Eigen::VectorXd& responses);

 private:
  Eigen::MatrixXd inputs_;
  Eigen::MatrixXd standard_;
  Eigen::MatrixXd responses_;
};

/// Candidate population with per-run caches: the trend matrix at the highest degree,
/// distances to every design site and each candidate's nearest site.
class CandidatePool {
 public:
  CandidatePool(const RandomInput& input, const SamplePool& pool, unsigned max_degree,
                std::size_t site_capacity = 64);

  std::size_t size() const noexcept { return static_cast<std::size_t>(standard_.rows()); }
  std::size_t sites() const noexcept { return sites_; }
  const Eigen::MatrixXd& physical() const noexcept { return physical_; }
  const Eigen::MatrixXd& standard() const noexcept { return standard_; }
  const Eigen::MatrixXd& trend() const noexcept { return trend_; }

  void add_site(const Eigen::Ref<const Eigen::VectorXd>& u);

  std::size_t nearest_site(std::size_t candidate) const { return nearest_[candidate]; }
  double nearest_distance(std::size_t candidate) const { return nearest_distance_[candidate]; }

  /// Predictions over the whole pool. The model must be trained on the first
  /// model.size() sites in insertion order.
  void predict(const PckModel& model, Eigen::VectorXd& mean, Eigen::VectorXd* variance) const;

 private:
  Eigen::MatrixXd physical_;
  Eigen::MatrixXd standard_;
  Eigen::MatrixXd trend_;
  Eigen::MatrixXd distances_;  // capacity x n
  std::size_t sites_ = 0;
  std::vector<std::uint32_t> nearest_;
  std::vector<double> nearest_distance_;
};

/// |mean| / stddev, with 0/0 -> 0 and x/0 -> +inf.
double u_score(const Prediction& prediction);

struct Selection {
  std::size_t index = 0;
  double score = 0.0;
};

/// Lowest score, ties to the lowest index, skipping flagged entries; nullopt when every
/// entry is skipped.
std::optional<Selection> argmin_score(std::span<const double> scores,
                                      const std::vector<bool>& skip);

/// U-scores of every pool candidate for `model`, inflating the variance through
/// `correction` when given. Candidates within 1e-10 of a design site are flagged.
void score_candidates(const PckModel& model, const CorrectionField* correction,
                      const CandidatePool& pool, std::vector<double>& scores,
                      std::vector<bool>& duplicate);

/// Argmin of the U-function over the pool; throws exhausted_pool when every candidate
/// duplicates a design point.
Selection select_candidate(const PckModel& model, const CorrectionField* correction,
                           const CandidatePool& pool);

/// Zero-based target for active step `step`. `beta_history[k]` holds the per-limit-state
/// beta estimates after the k-th refit, the last entry being the current one; NaN marks an
/// undefined index (estimated probability 0 or 1) and counts as the largest change.
std::size_t choose_target(const StrategySpec& strategy, std::size_t step, std::size_t limit_states,
                          std::span<const std::vector<double>> beta_history);

struct StepRecord {
  std::size_t design_size = 0;
  std::optional<std::size_t> target;
  std::optional<std::size_t> pool_index;
  double u_score = 0.0;
  Eigen::VectorXd point;  // physical space; empty on the final row
  std::vector<ReliabilityEstimate> estimates;
  std::vector<unsigned> degrees;
  std::vector<double> thetas;
  double wall_seconds = 0.0;
};

/// One row per refit, from the initial design size up to the budget. Rows with a target
/// also record the point that was added; the last row is the post-budget refit.
struct RunRecord {
  std::vector<std::string> limit_states;
  std::vector<StepRecord> steps;
  ExperimentalDesign design{1, 1};
  bool exhausted = false;
  std::vector<PckModel> final_models;

  const StepRecord& final_step() const { return steps.back(); }
};

struct ActiveLearningConfig {
  std::size_t budget = 49;
  std::size_t n_init = 10;
  std::size_t pool_size = 100000;
  std::uint64_t seed = 0;
  DegreeRange degrees;
  ThetaSearch search;
  /// Written after every accepted point when set.
  std::optional<std::filesystem::path> checkpoint;
  /// Continue from `checkpoint` if the file exists.
  bool resume = false;
  /// Replaces build_correction for the U-LOO metric when set.
  std::function<CorrectionField(const PckModel&)> correction_builder;
};

RunRecord run_active_learning(const Problem& problem, const StrategySpec& strategy,
                              const ActiveLearningConfig& config);

// Checkpoint files (JSON): design, responses, step history and the stream labels.
void write_checkpoint(const std::filesystem::path& path, const Problem& problem,
                      const StrategySpec& strategy, const ActiveLearningConfig& config,
                      const RunRecord& record);

struct Checkpoint {
  ExperimentalDesign design{1, 1};
  std::vector<StepRecord> steps;
  bool exhausted = false;
};

Checkpoint read_checkpoint(const std::filesystem::path& path, const Problem& problem,
                           const StrategySpec& strategy, const ActiveLearningConfig& config);

}  // namespace pckal
