#pragma once

#include <functional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "pckal/active_learning.hpp"
#include "pckal/prob_space.hpp"

namespace pckal {

/// sin(5 x1 / 2) + 2 - (x1^2 + 4)(x2 - 1) / 20
double g1(double x1, double x2);

/// sin(2 x1) - 1/2 + (x1^2 + 4)(x2 + 1) / 20
double g2(double x1, double x2);

/// x1 ~ N(1.5, 1), x2 ~ N(2.5, 1).
RandomInput analytic_input();

inline constexpr const char* kAnalyticProblem = "two-lsf-analytic";

/// The two-limit-state analytic benchmark (g1, g2).
Problem two_lsf_analytic();

/// Ship speed v_s ~ N(3.0, 0.6) m/s and flow stress rho0 ~ N(317, 30) N/mm^2.
RandomInput collision_input();

struct Threshold {
  std::string name;
  double value = 0.0;
};

/// Failure at 3 m penetration (gF) and damage/repair at 2 m (gd).
std::vector<Threshold> collision_thresholds();

/// Non-physical stand-in for the collision simulator: a smooth surface increasing in
/// ship speed and decreasing in flow stress,
///   penetration = scale * sign(v) |v / v_ref|^exponent * (rho_ref / rho0).
struct MockPenetration {
  double scale = 2.2;
  double v_ref = 3.0;
  double rho_ref = 317.0;
  double exponent = 2.0;

  double operator()(double v_s, double rho0) const;
};

/// g_k(x) = threshold_k - response(x) for every threshold.
Problem threshold_problem(std::string name, RandomInput input,
                          std::function<double(const Eigen::VectorXd&)> response,
                          const std::vector<Threshold>& thresholds, CostClass cost);

}  // namespace pckal
