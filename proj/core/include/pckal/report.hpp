#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "pckal/records.hpp"

namespace pckal {

/// Type-7 (linear interpolation) sample quantile, q in [0, 1].
double quantile(std::span<const double> values, double q);

/// Mean and sample standard deviation; the deviation is absent for a single value.
struct Summary {
  double mean = 0.0;
  std::optional<double> stddev;
};

Summary summarize(std::span<const double> values);

/// 2.5% and 97.5% whiskers, quartiles, median and mean.
struct BoxStats {
  double low = 0.0;
  double q1 = 0.0;
  double median = 0.0;
  double q3 = 0.0;
  double high = 0.0;
  double mean = 0.0;
};

BoxStats box_stats(std::span<const double> values);

/// Spread of the surrogate probabilities across replications at one design size.
struct BandPoint {
  std::size_t design_size = 0;
  std::size_t runs = 0;
  std::vector<double> mean;  // per limit state
  std::vector<double> p30;
  std::vector<double> p60;
};

struct GroupReport {
  std::string strategy;  // strategy key
  std::string metric;
  std::size_t runs = 0;
  std::vector<Summary> beta_error;  // per limit state, final refit
  Summary combined;
  BoxStats combined_box;
  std::vector<Summary> final_probability;  // per limit state, across replications
  std::vector<double> final_standard_error;  // binomial pool SE at the mean final p
  std::vector<BandPoint> bands;
};

struct StudyReport {
  std::string problem;
  std::vector<std::string> limit_states;
  std::vector<double> truth_beta;
  std::vector<GroupReport> groups;
};

/// Aggregates final-step errors against `truth_beta` (one per limit state). Groups are
/// ordered U before U-LOO, then single:1..m, alternate, convergence.
StudyReport build_report(const std::vector<EvolutionFile>& runs,
                         const std::vector<double>& truth_beta);

/// "X_g1", "X_gj", "X_g*j" style labels built from limit-state names.
std::string strategy_label(const std::string& strategy_key,
                           const std::vector<std::string>& limit_states);

/// Fixed-width table: one row per (strategy, metric) with mean (sigma) per error column;
/// '*' marks the best mean in each column within a metric block.
std::string render_table(const StudyReport& report);
std::string render_summary_csv(const StudyReport& report);
std::string render_bands_csv(const StudyReport& report, const GroupReport& group);
std::string render_boxplot_csv(const StudyReport& report);

/// report.txt, summary.csv, boxplot.csv and bands/<strategy>__<metric>.csv under `dir`.
void write_report(const std::filesystem::path& dir, const StudyReport& report);

/// All evolution files under records/, sorted by file name.
std::vector<EvolutionFile> load_records(const std::filesystem::path& study_dir);

/// Rebuilds the report from raw records and truth/truth.json. Throws
/// undefined_reference when a limit state has no reference beta.
StudyReport report_from_directory(const std::filesystem::path& study_dir);

}  // namespace pckal
