#include "pckal/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <numeric>
#include <sstream>

#include "pckal/errors.hpp"
#include "pckal/ground_truth.hpp"
#include "pckal/reliability.hpp"
#include "pckal/study.hpp"

namespace pckal {
namespace {

std::string sci(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2e", v);
  return buf;
}

std::string sd_text(const std::optional<double>& sd) {
  return sd ? format_double(*sd) : "n/a";
}

int strategy_rank(const std::string& key) {
  if (key.rfind("single:", 0) == 0) return std::stoi(key.substr(7));
  if (key == "alternate") return 1'000'000;
  if (key == "convergence") return 1'000'001;
  return 2'000'000;
}

int metric_rank(const std::string& metric) { return metric == "U" ? 0 : 1; }

}  // namespace

double quantile(std::span<const double> values, double q) {
  if (values.empty()) throw Error(ErrorCode::validation, "quantile of an empty sample");
  std::vector<double> v(values.begin(), values.end());
  std::sort(v.begin(), v.end());
  const double h = (static_cast<double>(v.size()) - 1.0) * q;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, v.size() - 1);
  return v[lo] + (h - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

Summary summarize(std::span<const double> values) {
  if (values.empty()) throw Error(ErrorCode::validation, "summary of an empty sample");
  Summary s;
  const double n = static_cast<double>(values.size());
  s.mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
  if (values.size() > 1) {
    double ss = 0.0;
    for (const double v : values) ss += (v - s.mean) * (v - s.mean);
    s.stddev = std::sqrt(ss / (n - 1.0));
  }
  return s;
}

BoxStats box_stats(std::span<const double> values) {
  return BoxStats{quantile(values, 0.025), quantile(values, 0.25), quantile(values, 0.5),
                  quantile(values, 0.75),  quantile(values, 0.975), summarize(values).mean};
}

StudyReport build_report(const std::vector<EvolutionFile>& runs,
                         const std::vector<double>& truth_beta) {
  if (runs.empty()) throw Error(ErrorCode::validation, "no run records to report on");
  StudyReport report;
  report.problem = runs.front().info.problem;
  report.limit_states = runs.front().info.limit_states;
  report.truth_beta = truth_beta;
  const std::size_t m = report.limit_states.size();
  if (truth_beta.size() != m) {
    throw Error(ErrorCode::undefined_reference, "need one reference beta per limit state");
  }

  std::map<std::pair<int, int>, std::vector<const EvolutionFile*>> grouped;
  std::map<std::pair<int, int>, std::pair<std::string, std::string>> names;
  for (const auto& run : runs) {
    if (run.info.problem != report.problem || run.info.limit_states != report.limit_states) {
      throw Error(ErrorCode::validation, "records from different problems cannot be combined");
    }
    if (run.steps.empty()) {
      throw Error(ErrorCode::validation, "record " + run.info.run_id + " has no steps");
    }
    const std::pair key{metric_rank(run.info.metric), strategy_rank(run.info.strategy)};
    grouped[key].push_back(&run);
    names[key] = {run.info.strategy, run.info.metric};
  }

  for (auto& [key, members] : grouped) {
    std::sort(members.begin(), members.end(), [](const auto* a, const auto* b) {
      return a->info.replication < b->info.replication;
    });
    GroupReport g;
    g.strategy = names[key].first;
    g.metric = names[key].second;
    g.runs = members.size();

    std::vector<double> combined;
    std::vector<std::vector<double>> errors(m), finals(m);
    for (const auto* run : members) {
      const auto& last = run->steps.back();
      std::vector<double> e(m);
      for (std::size_t j = 0; j < m; ++j) {
        e[j] = relative_beta_error(last.estimates[j].beta, truth_beta[j]);
        errors[j].push_back(e[j]);
        finals[j].push_back(last.estimates[j].probability);
      }
      combined.push_back(combined_error(e));
    }
    for (std::size_t j = 0; j < m; ++j) {
      g.beta_error.push_back(summarize(errors[j]));
      g.final_probability.push_back(summarize(finals[j]));
      const double p = g.final_probability.back().mean;
      const double n = static_cast<double>(members.front()->info.pool_size);
      g.final_standard_error.push_back(n > 0 ? std::sqrt(p * (1.0 - p) / n) : 0.0);
    }
    g.combined = summarize(combined);
    g.combined_box = box_stats(combined);

    std::map<std::size_t, std::vector<std::vector<double>>> by_size;
    for (const auto* run : members) {
      for (const auto& s : run->steps) {
        auto& cols = by_size[s.design_size];
        cols.resize(m);
        for (std::size_t j = 0; j < m; ++j) cols[j].push_back(s.estimates[j].probability);
      }
    }
    for (const auto& [size, cols] : by_size) {
      BandPoint b;
      b.design_size = size;
      b.runs = cols.front().size();
      for (std::size_t j = 0; j < m; ++j) {
        b.mean.push_back(summarize(cols[j]).mean);
        b.p30.push_back(quantile(cols[j], 0.30));
        b.p60.push_back(quantile(cols[j], 0.60));
      }
      g.bands.push_back(std::move(b));
    }
    report.groups.push_back(std::move(g));
  }
  return report;
}

std::string strategy_label(const std::string& strategy_key,
                           const std::vector<std::string>& limit_states) {
  if (strategy_key == "alternate") return "X_gj";
  if (strategy_key == "convergence") return "X_g*j";
  if (strategy_key.rfind("single:", 0) == 0) {
    const auto j = static_cast<std::size_t>(std::stoul(strategy_key.substr(7)));
    if (j >= 1 && j <= limit_states.size()) return "X_" + limit_states[j - 1];
  }
  return strategy_key;
}

std::string render_table(const StudyReport& report) {
  const std::size_t m = report.limit_states.size();
  std::vector<std::string> header = {"Strategy", "Learning metric"};
  for (const auto& ls : report.limit_states) header.push_back("eps_beta," + ls);
  header.emplace_back("eps_beta");

  // Best mean per column within each metric block.
  std::map<std::string, std::vector<double>> best;
  for (const auto& g : report.groups) {
    auto& b = best[g.metric];
    if (b.empty()) b.assign(m + 1, INFINITY);
    for (std::size_t j = 0; j < m; ++j) b[j] = std::min(b[j], g.beta_error[j].mean);
    b[m] = std::min(b[m], g.combined.mean);
  }

  std::vector<std::vector<std::string>> rows;
  for (const auto& g : report.groups) {
    std::vector<std::string> row = {strategy_label(g.strategy, report.limit_states), g.metric};
    auto cell = [&](const Summary& s, double b) {
      std::string text = sci(s.mean);
      text += s.stddev ? " (" + sci(*s.stddev) + ")" : " (n/a)";
      if (s.mean == b) text += " *";
      return text;
    };
    for (std::size_t j = 0; j < m; ++j) row.push_back(cell(g.beta_error[j], best[g.metric][j]));
    row.push_back(cell(g.combined, best[g.metric][m]));
    rows.push_back(std::move(row));
  }

  std::vector<std::size_t> width(header.size());
  for (std::size_t c = 0; c < header.size(); ++c) {
    width[c] = header[c].size();
    for (const auto& r : rows) width[c] = std::max(width[c], r[c].size());
  }
  std::ostringstream out;
  out << "problem: " << report.problem << '\n';
  for (std::size_t j = 0; j < m; ++j) {
    out << "reference beta " << report.limit_states[j] << ": "
        << format_double(report.truth_beta[j]) << '\n';
  }
  auto emit = [&](const std::vector<std::string>& r) {
    for (std::size_t c = 0; c < r.size(); ++c) {
      out << r[c] << std::string(width[c] - r[c].size(), ' ');
      out << (c + 1 < r.size() ? "  " : "\n");
    }
  };
  emit(header);
  std::size_t total = 0;
  for (const auto w : width) total += w;
  out << std::string(total + 2 * (width.size() - 1), '-') << '\n';
  for (const auto& r : rows) emit(r);
  out << "values are mean (standard deviation) over replications; * marks the best mean per "
         "column for each learning metric\n";
  return out.str();
}

std::string render_summary_csv(const StudyReport& report) {
  std::ostringstream out;
  out << "strategy,metric,runs";
  for (const auto& ls : report.limit_states) out << ",eps_mean_" << ls << ",eps_sd_" << ls;
  out << ",eps_combined_mean,eps_combined_sd";
  for (const auto& ls : report.limit_states) {
    out << ",p_mean_" << ls << ",p_sd_" << ls << ",p_se_" << ls;
  }
  out << '\n';
  for (const auto& g : report.groups) {
    out << g.strategy << ',' << g.metric << ',' << g.runs;
    for (const auto& e : g.beta_error) out << ',' << format_double(e.mean) << ',' << sd_text(e.stddev);
    out << ',' << format_double(g.combined.mean) << ',' << sd_text(g.combined.stddev);
    for (std::size_t j = 0; j < g.final_probability.size(); ++j) {
      out << ',' << format_double(g.final_probability[j].mean) << ','
          << sd_text(g.final_probability[j].stddev) << ','
          << format_double(g.final_standard_error[j]);
    }
    out << '\n';
  }
  return out.str();
}

std::string render_bands_csv(const StudyReport& report, const GroupReport& group) {
  std::ostringstream out;
  out << "design_size,runs";
  for (const auto& ls : report.limit_states) {
    out << ",p_mean_" << ls << ",p_q30_" << ls << ",p_q60_" << ls;
  }
  out << '\n';
  for (const auto& b : group.bands) {
    out << b.design_size << ',' << b.runs;
    for (std::size_t j = 0; j < b.mean.size(); ++j) {
      out << ',' << format_double(b.mean[j]) << ',' << format_double(b.p30[j]) << ','
          << format_double(b.p60[j]);
    }
    out << '\n';
  }
  return out.str();
}

std::string render_boxplot_csv(const StudyReport& report) {
  std::ostringstream out;
  out << "strategy,metric,runs,q025,q25,median,q75,q975,mean\n";
  for (const auto& g : report.groups) {
    const auto& b = g.combined_box;
    out << g.strategy << ',' << g.metric << ',' << g.runs << ',' << format_double(b.low) << ','
        << format_double(b.q1) << ',' << format_double(b.median) << ',' << format_double(b.q3)
        << ',' << format_double(b.high) << ',' << format_double(b.mean) << '\n';
  }
  return out.str();
}

void write_report(const std::filesystem::path& dir, const StudyReport& report) {
  write_file_atomic(dir / "report.txt", render_table(report));
  write_file_atomic(dir / "summary.csv", render_summary_csv(report));
  write_file_atomic(dir / "boxplot.csv", render_boxplot_csv(report));
  for (const auto& g : report.groups) {
    std::string name = g.strategy + "__" + g.metric + ".csv";
    std::replace(name.begin(), name.end(), ':', '-');
    write_file_atomic(dir / "bands" / name, render_bands_csv(report, g));
  }
}

std::vector<EvolutionFile> load_records(const std::filesystem::path& study_dir) {
  const StudyLayout layout{study_dir};
  if (!std::filesystem::is_directory(layout.records_dir())) {
    throw Error(ErrorCode::io, "no records/ directory under " + study_dir.string());
  }
  std::vector<std::filesystem::path> paths;
  for (const auto& entry : std::filesystem::directory_iterator(layout.records_dir())) {
    if (entry.is_regular_file() && entry.path().extension() == ".csv") paths.push_back(entry.path());
  }
  std::sort(paths.begin(), paths.end());
  std::vector<EvolutionFile> runs;
  for (const auto& p : paths) runs.push_back(read_evolution(p));
  return runs;
}

StudyReport report_from_directory(const std::filesystem::path& study_dir) {
  auto runs = load_records(study_dir);
  if (runs.empty()) throw Error(ErrorCode::io, "no run records under " + study_dir.string());
  const StudyLayout layout{study_dir};
  const auto& info = runs.front().info;
  if (!std::filesystem::exists(layout.truth_file())) {
    throw Error(ErrorCode::undefined_reference,
                "no ground truth at " + layout.truth_file().string() +
                    "; compute it with `pckal truth <config> --n 10000000 --seed S` and rerun");
  }
  const TruthCache cache = TruthCache::load(layout.truth_file());
  std::vector<double> truth;
  for (const auto& ls : info.limit_states) {
    const auto entry = cache.best(info.problem, ls);
    if (!entry) {
      throw Error(ErrorCode::undefined_reference,
                  "no reference beta for " + info.problem + "/" + ls + " in " +
                      layout.truth_file().string() + "; run `pckal truth` first");
    }
    truth.push_back(entry->estimate.beta);
  }
  return build_report(runs, truth);
}

}  // namespace pckal
