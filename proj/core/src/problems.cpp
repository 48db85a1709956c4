#include "pckal/problems.hpp"

#include <cmath>
#include <memory>

#include "pckal/errors.hpp"

namespace pckal {

double g1(double x1, double x2) {
  return std::sin(5.0 * x1 / 2.0) + 2.0 - (x1 * x1 + 4.0) * (x2 - 1.0) / 20.0;
}

double g2(double x1, double x2) {
  return std::sin(2.0 * x1) - 0.5 + (x1 * x1 + 4.0) * (x2 + 1.0) / 20.0;
}

RandomInput analytic_input() {
  return RandomInput({{"x1", 1.5, 1.0}, {"x2", 2.5, 1.0}});
}

Problem two_lsf_analytic() {
  std::vector<LimitState> ls;
  ls.push_back({"g1", [](const Eigen::VectorXd& x) { return g1(x[0], x[1]); },
                CostClass::cheap_analytic});
  ls.push_back({"g2", [](const Eigen::VectorXd& x) { return g2(x[0], x[1]); },
                CostClass::cheap_analytic});
  return Problem{kAnalyticProblem, analytic_input(), std::move(ls)};
}

RandomInput collision_input() {
  return RandomInput({{"v_s", 3.0, 0.6}, {"rho0", 317.0, 30.0}});
}

std::vector<Threshold> collision_thresholds() { return {{"gF", 3.0}, {"gd", 2.0}}; }

double MockPenetration::operator()(double v_s, double rho0) const {
  const double ratio = v_s / v_ref;
  const double speed_term = std::copysign(std::pow(std::abs(ratio), exponent), ratio);
  return scale * speed_term * (rho_ref / rho0);
}

Problem threshold_problem(std::string name, RandomInput input,
                          std::function<double(const Eigen::VectorXd&)> response,
                          const std::vector<Threshold>& thresholds, CostClass cost) {
  if (thresholds.empty()) throw Error(ErrorCode::validation, "at least one threshold is required");
  auto shared = std::make_shared<std::function<double(const Eigen::VectorXd&)>>(std::move(response));
  std::vector<LimitState> ls;
  for (const auto& t : thresholds) {
    const double value = t.value;
    ls.push_back({t.name, [shared, value](const Eigen::VectorXd& x) { return value - (*shared)(x); },
                  cost});
  }
  return Problem{std::move(name), std::move(input), std::move(ls)};
}

}  // namespace pckal
