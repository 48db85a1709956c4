#include "commands.hpp"

#include <cstdio>
#include <cstdlib>
#include <ostream>

#include "pckal/errors.hpp"
#include "pckal/ground_truth.hpp"
#include "pckal/report.hpp"
#include "pckal/study.hpp"

namespace pckal::cli {
namespace {

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

template <class F>
int guarded(std::ostream& err, F&& body) {
  try {
    return body();
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return exit_code_for(e.code());
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kRuntime;
  }
}

void merge_truth(const std::filesystem::path& from, const std::filesystem::path& into,
                 const std::string& problem) {
  const TruthCache source = TruthCache::load(from);
  TruthCache target = TruthCache::load(into);
  bool any = false;
  for (const auto& e : source.entries()) {
    if (e.problem != problem) continue;
    if (!target.find(e.problem, e.limit_state, e.n, e.seed)) {
      target.add(e);
      any = true;
    }
  }
  if (any) target.save(into);
}

}  // namespace

ExitCode exit_code_for(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::validation:
    case ErrorCode::input_shape:
    case ErrorCode::hyperparameter_domain:
    case ErrorCode::unsupported_oracle:
    case ErrorCode::undefined_reference:
      return kValidation;
    case ErrorCode::external_evaluator:
      return kAdapter;
    default:
      return kRuntime;
  }
}

std::filesystem::path mock_simulator_path() {
  if (const char* env = std::getenv("PCKAL_MOCK_SIMULATOR"); env != nullptr && *env != '\0') {
    return env;
  }
  std::error_code ec;
  const auto self = std::filesystem::read_symlink("/proc/self/exe", ec);
  return (ec ? std::filesystem::path(".") : self.parent_path()) / "pckal-mock-penetration";
}

std::vector<std::string> mock_command(const MockPenetration& params) {
  return {mock_simulator_path().string(), "--scale",   format_double(params.scale),
          "--v-ref",                      format_double(params.v_ref),
          "--rho-ref",                    format_double(params.rho_ref),
          "--exponent",                   format_double(params.exponent)};
}

BuiltProblem build_problem(const StudyConfig& config, bool in_process_mock) {
  const auto& p = config.problem;
  if (p.kind == kAnalyticProblem) return {two_lsf_analytic(), nullptr};
  RandomInput input(p.inputs);
  if (in_process_mock) {
    if (p.adapter.kind != "mock") {
      throw Error(ErrorCode::unsupported_oracle,
                  "problem '" + p.name + "' uses an external simulator; no brute-force oracle");
    }
    const MockPenetration mock = p.adapter.mock;
    auto response = [mock](const Eigen::VectorXd& x) { return mock(x[0], x[1]); };
    return {threshold_problem(p.name, std::move(input), response, p.thresholds,
                              CostClass::cheap_analytic),
            nullptr};
  }
  AdapterConfig ac;
  ac.command = p.adapter.kind == "mock" ? mock_command(p.adapter.mock) : p.adapter.command;
  ac.timeout = std::chrono::milliseconds(p.adapter.timeout_ms);
  ac.concurrency = p.adapter.concurrency;
  auto sim = std::make_shared<ExternalSimulator>(std::move(ac));
  std::vector<LimitState> ls;
  for (const auto& t : p.thresholds) ls.push_back(external_limit_state(sim, t.value, t.name));
  return {Problem{p.name, std::move(input), std::move(ls)}, sim};
}

int cmd_run(const std::filesystem::path& config_path, const RunOptions& options, std::ostream& out,
            std::ostream& err) {
  return guarded(err, [&] {
    StudyConfig config = load_config(config_path);
    if (options.out) config.output_dir = *options.out;
    if (options.jobs == 0) throw Error(ErrorCode::validation, "--jobs: must be at least 1");
    BuiltProblem built = build_problem(config);

    StudySpec spec;
    spec.strategies = config.strategies;
    for (const auto& m : config.metrics) spec.metrics.push_back(parse_metric(m));
    spec.replications = config.replications;
    spec.base_seed = config.base_seed;
    spec.run.budget = config.budget;
    spec.run.n_init = config.n_init;
    spec.run.pool_size = config.pool_size;
    spec.run.degrees = config.degrees;
    spec.run.search = config.theta;
    spec.output_dir = config.output_dir;
    spec.jobs = options.jobs;
    spec.resume = options.resume;
    std::size_t done = 0;
    const std::size_t total =
        spec.replications * spec.strategies.size() * spec.metrics.size();
    spec.on_run_complete = [&](const RunInfo& info) {
      err << "[" << ++done << "/" << total << "] " << info.run_id << " " << info.status << '\n';
    };

    const StudyLayout layout{config.output_dir};
    std::filesystem::create_directories(layout.root);
    write_file_atomic(layout.root / "config.json", emit_config(config));
    const auto runs = run_study(built.problem, spec);

    const auto truth = truth_path(config);
    if (std::filesystem::exists(truth) &&
        !std::filesystem::equivalent(truth.parent_path(), layout.truth_file().parent_path())) {
      merge_truth(truth, layout.truth_file(), built.problem.name);
    }

    std::optional<StudyReport> report;
    try {
      report = report_from_directory(layout.root);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::undefined_reference) throw;
      err << "note: " << e.what() << '\n';
    }
    if (report) {
      write_report(layout.root, *report);
      for (const auto& g : report->groups) {
        out << strategy_label(g.strategy, report->limit_states) << " " << g.metric
            << ": runs=" << g.runs;
        for (std::size_t j = 0; j < report->limit_states.size(); ++j) {
          out << " eps_" << report->limit_states[j] << "=" << num(g.beta_error[j].mean);
        }
        out << " eps=" << num(g.combined.mean) << '\n';
      }
    } else {
      // Without references, summarize the final probabilities only.
      const auto names = runs.front().info.limit_states;
      for (std::size_t k = 0; k < runs.size(); k += spec.replications) {
        out << strategy_label(runs[k].info.strategy, names) << " " << runs[k].info.metric
            << ": runs=" << spec.replications;
        for (std::size_t j = 0; j < names.size(); ++j) {
          std::vector<double> p;
          for (std::size_t r = k; r < k + spec.replications; ++r) {
            p.push_back(runs[r].steps.back().estimates[j].probability);
          }
          out << " p_" << names[j] << "=" << num(summarize(p).mean);
        }
        out << '\n';
      }
    }
    if (built.simulator) {
      err << "simulator calls: " << built.simulator->invocations() << '\n';
    }
    return kOk;
  });
}

int cmd_truth(const std::filesystem::path& config_path, std::size_t n, std::uint64_t seed,
              std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const StudyConfig config = load_config(config_path);
    if (n < kMinTruthSamples) {
      throw Error(ErrorCode::validation, "--n: ground truth needs at least 1000000 samples, got " +
                                             std::to_string(n));
    }
    const BuiltProblem built = build_problem(config, true);
    const auto path = truth_path(config);
    TruthCache cache = TruthCache::load(path);
    bool computed = false;
    for (std::size_t j = 0; j < built.problem.limit_states.size(); ++j) {
      const auto& name = built.problem.limit_states[j].name;
      auto entry = cache.find(built.problem.name, name, n, seed);
      const bool hit = entry.has_value();
      if (!hit) {
        entry = TruthEntry{built.problem.name, name, n, seed,
                           ground_truth_beta(built.problem, j, n, seed)};
        cache.add(*entry);
        computed = true;
      }
      out << built.problem.name << " " << name << ": p=" << format_double(entry->estimate.probability)
          << " se=" << format_double(entry->estimate.standard_error)
          << " beta=" << format_double(entry->estimate.beta) << " n=" << n << " seed=" << seed
          << (hit ? " (cached)" : "") << '\n';
    }
    if (computed) cache.save(path);
    err << (computed ? "wrote " : "unchanged ") << path.string() << '\n';
    return kOk;
  });
}

int cmd_report(const std::filesystem::path& study_dir, const std::string& format, std::ostream& out,
               std::ostream& err) {
  return guarded(err, [&] {
    if (format != "table" && format != "csv") {
      throw Error(ErrorCode::validation, "--format: expected table or csv");
    }
    const StudyReport report = report_from_directory(study_dir);
    write_report(study_dir, report);
    out << (format == "table" ? render_table(report) : render_summary_csv(report));
    return kOk;
  });
}

}  // namespace pckal::cli
