#include "pckal/active_learning.hpp"

#include <chrono>
#include <cmath>
#include <limits>

#include "pckal/errors.hpp"

namespace pckal {

std::string_view to_string(LearningMetric metric) noexcept {
  return metric == LearningMetric::u ? "U" : "U-LOO";
}

LearningMetric parse_metric(std::string_view text) {
  if (text == "U") return LearningMetric::u;
  if (text == "U-LOO") return LearningMetric::u_loo;
  throw Error(ErrorCode::validation, "unknown learning metric '" + std::string(text) +
                                         "' (expected U or U-LOO)");
}

std::string strategy_key(const StrategySpec& spec) {
  switch (spec.kind) {
    case StrategyKind::single_target: return "single:" + std::to_string(spec.target + 1);
    case StrategyKind::alternate: return "alternate";
    case StrategyKind::convergence_guided: return "convergence";
  }
  return "unknown";
}

StrategySpec parse_strategy(std::string_view key, LearningMetric metric) {
  if (key == "alternate") return {StrategyKind::alternate, 0, metric};
  if (key == "convergence") return {StrategyKind::convergence_guided, 0, metric};
  constexpr std::string_view prefix = "single:";
  if (key.starts_with(prefix)) {
    const std::string digits(key.substr(prefix.size()));
    std::size_t used = 0;
    long j = 0;
    try {
      j = std::stol(digits, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == digits.size() && !digits.empty() && j >= 1) {
      return {StrategyKind::single_target, static_cast<std::size_t>(j - 1), metric};
    }
  }
  throw Error(ErrorCode::validation,
              "unknown strategy '" + std::string(key) +
                  "' (expected single:<j>, alternate or convergence)");
}

std::size_t choose_target(const StrategySpec& strategy, std::size_t step, std::size_t limit_states,
                          std::span<const std::vector<double>> beta_history) {
  if (limit_states == 0) throw Error(ErrorCode::validation, "no limit states to target");
  const std::size_t round_robin = step % limit_states;
  switch (strategy.kind) {
    case StrategyKind::single_target:
      if (strategy.target >= limit_states) {
        throw Error(ErrorCode::validation, "single-target index out of range");
      }
      return strategy.target;
    case StrategyKind::alternate:
      return round_robin;
    case StrategyKind::convergence_guided:
      break;
  }
  // Every limit state is targeted once before the beta-change rule takes over.
  if (step < limit_states || beta_history.size() < 2) return round_robin;
  const auto& previous = beta_history[beta_history.size() - 2];
  const auto& current = beta_history.back();
  std::vector<double> delta(limit_states);
  double largest = -1.0;
  for (std::size_t j = 0; j < limit_states; ++j) {
    double d = delta_beta(previous.at(j), current.at(j));
    if (std::isnan(d)) d = std::numeric_limits<double>::infinity();
    delta[j] = d;
    largest = std::max(largest, d);
  }
  for (std::size_t k = 0; k < limit_states; ++k) {
    const std::size_t j = (round_robin + k) % limit_states;
    if (delta[j] == largest) return j;
  }
  return round_robin;
}

namespace {

void validate(const Problem& problem, const StrategySpec& strategy,
              const ActiveLearningConfig& config) {
  if (problem.limit_states.empty()) {
    throw Error(ErrorCode::validation, "problem has no limit states");
  }
  if (config.n_init < 2) throw Error(ErrorCode::validation, "n_init must be at least 2");
  if (config.n_init >= config.budget) {
    throw Error(ErrorCode::validation, "n_init must be smaller than budget");
  }
  if (config.pool_size == 0) throw Error(ErrorCode::empty_pool, "pool_size must be positive");
  if (config.degrees.min > config.degrees.max) {
    throw Error(ErrorCode::validation, "degree range is empty");
  }
  if (strategy.kind == StrategyKind::single_target &&
      strategy.target >= problem.limit_states.size()) {
    throw Error(ErrorCode::validation, "single-target index exceeds the number of limit states");
  }
}

Eigen::VectorXd evaluate_all(const Problem& problem, const Eigen::VectorXd& x) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(problem.limit_states.size()));
  for (std::size_t j = 0; j < problem.limit_states.size(); ++j) {
    const double g = problem.limit_states[j].evaluate(x);
    if (!std::isfinite(g)) {
      throw Error(ErrorCode::external_evaluator,
                  "limit state '" + problem.limit_states[j].name + "' returned a non-finite value");
    }
    out[static_cast<Eigen::Index>(j)] = g;
  }
  return out;
}

// Reliability indices for the convergence rule. An estimate of 0 or 1 has no index, and
// the clamped value is not used; NaN makes delta_beta report +inf.
std::vector<double> betas_of(const StepRecord& step) {
  std::vector<double> out;
  out.reserve(step.estimates.size());
  for (const auto& e : step.estimates) {
    const bool defined = e.probability > 0.0 && e.probability < 1.0;
    out.push_back(defined ? e.beta : std::numeric_limits<double>::quiet_NaN());
  }
  return out;
}

}  // namespace

RunRecord run_active_learning(const Problem& problem, const StrategySpec& strategy,
                              const ActiveLearningConfig& config) {
  validate(problem, strategy, config);
  const std::size_t m = problem.limit_states.size();
  const std::size_t dims = problem.input.dims();

  const SamplePool pool = sample_mc(problem.input, config.pool_size, config.seed, 0);
  CandidatePool candidates(problem.input, pool, config.degrees.max, config.budget);

  RunRecord record;
  for (const auto& ls : problem.limit_states) record.limit_states.push_back(ls.name);
  record.design = ExperimentalDesign(dims, m);

  const bool resuming = config.checkpoint && config.resume &&
                        std::filesystem::exists(*config.checkpoint);
  if (resuming) {
    Checkpoint cp = read_checkpoint(*config.checkpoint, problem, strategy, config);
    record.design = std::move(cp.design);
    record.steps = std::move(cp.steps);
    record.exhausted = cp.exhausted;
  } else {
    const SamplePool initial = sample_lhs(problem.input, config.n_init, config.seed, 0);
    for (Eigen::Index i = 0; i < initial.points.rows(); ++i) {
      const Eigen::VectorXd x = initial.points.row(i).transpose();
      record.design.append(x, problem.input.to_standard(x), evaluate_all(problem, x));
    }
    if (config.checkpoint) write_checkpoint(*config.checkpoint, problem, strategy, config, record);
  }
  for (Eigen::Index i = 0; i < record.design.standard().rows(); ++i) {
    candidates.add_site(record.design.standard().row(i).transpose());
  }

  std::vector<std::vector<double>> beta_history;
  for (const auto& s : record.steps) beta_history.push_back(betas_of(s));
  const bool already_final = !record.steps.empty() && !record.steps.back().target.has_value();

  std::vector<double> scores;
  std::vector<bool> duplicate;
  Eigen::VectorXd mean;
  for (;;) {
    const auto started = std::chrono::steady_clock::now();
    const auto& design = record.design;
    std::vector<PckModel> models;
    models.reserve(m);
    StepRecord step;
    step.design_size = design.size();
    for (std::size_t j = 0; j < m; ++j) {
      models.push_back(select_model(design.standard(),
                                    design.responses().col(static_cast<Eigen::Index>(j)),
                                    config.degrees, config.search));
      candidates.predict(models.back(), mean, nullptr);
      step.estimates.push_back(
          estimate_probability(std::span<const double>(mean.data(), pool.size())));
      step.degrees.push_back(models.back().basis().degree());
      step.thetas.push_back(models.back().kernel().theta);
    }
    auto elapsed = [&] {
      return std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    };
    if (already_final) {
      record.final_models = std::move(models);
      break;
    }
    if (design.size() >= config.budget || record.exhausted) {
      step.wall_seconds = elapsed();
      record.steps.push_back(std::move(step));
      record.final_models = std::move(models);
      break;
    }

    beta_history.push_back(betas_of(step));
    const std::size_t t = record.steps.size();
    const std::size_t target = choose_target(strategy, t, m, beta_history);
    const PckModel& model = models[target];
    std::optional<CorrectionField> correction;
    if (strategy.metric == LearningMetric::u_loo) {
      correction = config.correction_builder ? config.correction_builder(model)
                                             : build_correction(model);
    }
    score_candidates(model, correction ? &*correction : nullptr, candidates, scores, duplicate);
    const auto best = argmin_score(scores, duplicate);
    if (!best) {
      record.exhausted = true;
      step.wall_seconds = elapsed();
      record.steps.push_back(std::move(step));
      record.final_models = std::move(models);
      break;
    }

    const auto row = static_cast<Eigen::Index>(best->index);
    const Eigen::VectorXd x = candidates.physical().row(row).transpose();
    const Eigen::VectorXd u = candidates.standard().row(row).transpose();
    const Eigen::VectorXd responses = evaluate_all(problem, x);
    record.design.append(x, u, responses);
    candidates.add_site(u);

    step.target = target;
    step.pool_index = best->index;
    step.u_score = best->score;
    step.point = x;
    step.wall_seconds = elapsed();
    record.steps.push_back(std::move(step));
    if (config.checkpoint) write_checkpoint(*config.checkpoint, problem, strategy, config, record);
  }
  if (config.checkpoint) write_checkpoint(*config.checkpoint, problem, strategy, config, record);
  return record;
}

}  // namespace pckal
