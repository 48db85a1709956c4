#include "pckal/variance_correction.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "pckal/errors.hpp"

namespace pckal {

CorrectionField::CorrectionField(Eigen::MatrixXd sites, Eigen::VectorXd factors)
    : sites_(std::move(sites)), factors_(std::move(factors)) {
  if (sites_.rows() == 0) {
    throw Error(ErrorCode::empty_design, "correction field needs at least one site");
  }
  if (factors_.size() != sites_.rows()) {
    throw Error(ErrorCode::input_shape, "one correction factor per site is required");
  }
  for (Eigen::Index i = 0; i < factors_.size(); ++i) {
    if (!std::isfinite(factors_[i]) || factors_[i] < 1.0) {
      throw Error(ErrorCode::validation, "correction factors must be finite and >= 1");
    }
  }
}

CorrectionField CorrectionField::identity(Eigen::MatrixXd sites) {
  const Eigen::Index n = sites.rows();
  return CorrectionField(std::move(sites), Eigen::VectorXd::Ones(n));
}

std::size_t CorrectionField::owner(const Eigen::Ref<const Eigen::VectorXd>& u) const {
  if (u.size() != sites_.cols()) {
    throw Error(ErrorCode::input_shape, "query point has the wrong dimension");
  }
  std::size_t best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < sites_.rows(); ++i) {
    const double d = (sites_.row(i).transpose() - u).norm();
    if (d < best_d) {
      best_d = d;
      best = static_cast<std::size_t>(i);
    }
  }
  return best;
}

double CorrectionField::corrected_variance(const Eigen::Ref<const Eigen::VectorXd>& u,
                                           double raw) const {
  return raw * factors_[static_cast<Eigen::Index>(owner(u))];
}

CorrectionField build_correction(const PckModel& model) {
  const auto& loo = model.loo();
  const Eigen::Index n = model.inputs().rows();
  if (n == 0) throw Error(ErrorCode::empty_design, "model has no training points");
  const double floor = 1e-12 * model.sigma2();
  Eigen::VectorXd factors(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double s2 = std::max(loo.variances[i], floor);
    factors[i] = 1.0 + loo.errors[i] * loo.errors[i] / s2;
  }
  return CorrectionField(model.inputs(), std::move(factors));
}

}  // namespace pckal
