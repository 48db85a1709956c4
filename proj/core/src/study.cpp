#include "pckal/study.hpp"

#include <atomic>
#include <exception>
#include <mutex>
#include <thread>

#include "pckal/errors.hpp"
#include "pckal/random.hpp"

namespace pckal {

std::uint64_t replication_seed(std::uint64_t base_seed, std::size_t replication) {
  return derive_key(base_seed, "replication/" + std::to_string(replication));
}

namespace {

struct Job {
  StrategySpec strategy;
  std::size_t replication = 0;
  RunInfo info;
};

RunInfo info_for(const Problem& problem, const StudySpec& spec, const StrategySpec& strategy,
                 std::size_t rep) {
  RunInfo info;
  info.run_id = make_run_id(strategy, rep);
  info.problem = problem.name;
  info.strategy = strategy_key(strategy);
  info.metric = std::string(to_string(strategy.metric));
  info.replication = rep;
  info.seed = replication_seed(spec.base_seed, rep);
  info.pool_size = spec.run.pool_size;
  for (const auto& m : problem.input.marginals()) info.inputs.push_back(m.name);
  for (const auto& ls : problem.limit_states) info.limit_states.push_back(ls.name);
  return info;
}

bool reusable(const EvolutionFile& file, const RunInfo& expected, std::size_t budget) {
  const RunInfo& got = file.info;
  if (got.problem != expected.problem || got.strategy != expected.strategy ||
      got.metric != expected.metric || got.seed != expected.seed ||
      got.pool_size != expected.pool_size || got.limit_states != expected.limit_states) {
    return false;
  }
  if (file.steps.empty() || file.steps.back().target.has_value()) return false;
  return got.status == "exhausted" || file.steps.back().design_size == budget;
}

EvolutionFile execute(const Problem& problem, const StudySpec& spec, const Job& job) {
  const StudyLayout layout{spec.output_dir};
  const auto record_path = layout.record(job.info.run_id);
  if (spec.resume && std::filesystem::exists(record_path)) {
    EvolutionFile existing = read_evolution(record_path);
    if (reusable(existing, job.info, spec.run.budget)) return existing;
  }
  ActiveLearningConfig config = spec.run;
  config.seed = job.info.seed;
  config.checkpoint = layout.checkpoint(job.info.run_id);
  config.resume = spec.resume;
  RunRecord record = run_active_learning(problem, job.strategy, config);
  EvolutionFile out{job.info, std::move(record.steps)};
  out.info.status = record.exhausted ? "exhausted" : "complete";
  write_evolution(record_path, out.info, out.steps);
  return out;
}

}  // namespace

std::vector<EvolutionFile> run_study(const Problem& problem, const StudySpec& spec) {
  if (spec.replications == 0) throw Error(ErrorCode::validation, "replications must be >= 1");
  if (spec.strategies.empty()) throw Error(ErrorCode::validation, "no strategies requested");
  if (spec.metrics.empty()) throw Error(ErrorCode::validation, "no learning metrics requested");
  if (spec.output_dir.empty()) throw Error(ErrorCode::validation, "output directory is required");

  std::vector<Job> jobs;
  for (const auto metric : spec.metrics) {
    for (const auto& key : spec.strategies) {
      const StrategySpec strategy = parse_strategy(key, metric);
      if (strategy.kind == StrategyKind::single_target &&
          strategy.target >= problem.limit_states.size()) {
        throw Error(ErrorCode::validation, "strategy '" + key + "' targets a missing limit state");
      }
      for (std::size_t rep = 0; rep < spec.replications; ++rep) {
        jobs.push_back({strategy, rep, info_for(problem, spec, strategy, rep)});
      }
    }
  }

  std::vector<EvolutionFile> results(jobs.size());
  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};
  std::exception_ptr error;
  std::mutex mutex;
  auto worker = [&] {
    for (;;) {
      if (failed.load()) return;
      const std::size_t i = next.fetch_add(1);
      if (i >= jobs.size()) return;
      try {
        results[i] = execute(problem, spec, jobs[i]);
        if (spec.on_run_complete) {
          std::lock_guard lock(mutex);
          spec.on_run_complete(results[i].info);
        }
      } catch (...) {
        std::lock_guard lock(mutex);
        if (!error) error = std::current_exception();
        failed.store(true);
        return;
      }
    }
  };

  const std::size_t workers = std::max<std::size_t>(1, std::min(spec.jobs, jobs.size()));
  if (workers == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(worker);
  }
  if (error) std::rethrow_exception(error);
  return results;
}

}  // namespace pckal
