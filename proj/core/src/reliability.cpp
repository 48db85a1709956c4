#include "pckal/reliability.hpp"

#include <cmath>
#include <limits>
#include <numeric>

#include "pck_internal.hpp"
#include "pckal/errors.hpp"
#include "pckal/normal.hpp"

namespace pckal {

double beta_from_probability(double probability, std::size_t samples) {
  if (samples == 0) throw Error(ErrorCode::empty_pool, "no samples behind the probability");
  const double half = 0.5 / static_cast<double>(samples);
  double p = probability;
  if (p <= 0.0) p = half;
  if (p >= 1.0) p = 1.0 - half;
  return -normal_quantile(p);
}

ReliabilityEstimate estimate_probability(std::span<const double> g_values) {
  if (g_values.empty()) throw Error(ErrorCode::empty_pool, "no limit-state values to count");
  std::size_t failures = 0;
  for (double g : g_values) {
    if (g <= 0.0) ++failures;
  }
  const auto n = g_values.size();
  const double p = static_cast<double>(failures) / static_cast<double>(n);
  return ReliabilityEstimate{p, beta_from_probability(p, n), n,
                             std::sqrt(p * (1.0 - p) / static_cast<double>(n))};
}

ReliabilityEstimate surrogate_probability(const PckModel& model, const RandomInput& input,
                                          const SamplePool& pool) {
  if (pool.size() == 0) throw Error(ErrorCode::empty_pool, "empty Monte Carlo pool");
  constexpr Eigen::Index kChunk = 4096;
  const Eigen::MatrixXd u = input.to_standard_rows(pool.points);
  std::vector<double> means(pool.size());
  Eigen::VectorXd mean;
  for (Eigen::Index start = 0; start < u.rows(); start += kChunk) {
    const Eigen::Index len = std::min(kChunk, u.rows() - start);
    const auto block = u.middleRows(start, len);
    const Eigen::MatrixXd trend = model.basis().design_matrix(block);
    const Eigen::MatrixXd dist = detail::pairwise_distances(model.inputs(), block);
    model.predict_batch(trend, dist, mean, nullptr);
    std::copy(mean.data(), mean.data() + len, means.begin() + start);
  }
  return estimate_probability(means);
}

double relative_beta_error(double estimate, double truth) {
  if (truth == 0.0) {
    throw Error(ErrorCode::undefined_reference, "relative error against a zero reference beta");
  }
  return std::abs((estimate - truth) / truth);
}

double combined_error(std::span<const double> errors) {
  if (errors.empty()) throw Error(ErrorCode::validation, "combined error needs m >= 1 terms");
  return std::accumulate(errors.begin(), errors.end(), 0.0);
}

double delta_beta(double previous, double current) {
  if (previous == 0.0 || !std::isfinite(previous) || !std::isfinite(current)) {
    return std::numeric_limits<double>::infinity();
  }
  return std::abs((current - previous) / previous);
}

}  // namespace pckal
