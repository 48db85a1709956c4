#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <string>

#include <Eigen/Core>

#include "pckal/pck.hpp"
#include "pckal/prob_space.hpp"

namespace pckal {

enum class CostClass { cheap_analytic, expensive_external };

/// Performance function on physical-space points; the event of interest is g <= 0.
struct LimitState {
  std::string name;
  std::function<double(const Eigen::VectorXd&)> evaluate;
  CostClass cost = CostClass::cheap_analytic;
};

struct ReliabilityEstimate {
  double probability = 0.0;
  double beta = 0.0;
  std::size_t samples = 0;
  double standard_error = 0.0;
};

/// beta = -Phi^-1(p), with p = 0 and p = 1 pulled in to 1/(2n) and 1 - 1/(2n).
double beta_from_probability(double probability, std::size_t samples);

/// Fraction of non-positive values, its binomial standard error and beta.
ReliabilityEstimate estimate_probability(std::span<const double> g_values);

/// Same estimate on the surrogate's predictive means over a physical-space pool.
ReliabilityEstimate surrogate_probability(const PckModel& model, const RandomInput& input,
                                          const SamplePool& pool);

/// |(estimate - truth) / truth|; truth must be non-zero.
double relative_beta_error(double estimate, double truth);

double combined_error(std::span<const double> errors);

/// |(current - previous) / previous|; +inf when previous is zero or not finite.
double delta_beta(double previous, double current);

}  // namespace pckal
