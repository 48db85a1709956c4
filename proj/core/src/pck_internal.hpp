#pragma once

#include <optional>

#include <Eigen/Core>

namespace pckal::detail {

struct TrendSolve {
  Eigen::MatrixXd whitened_trend;
  Eigen::MatrixXd gram_chol;
  Eigen::VectorXd coefficients;
  Eigen::VectorXd alpha;
  double quadratic = 0.0;
};

struct Profile {
  Eigen::MatrixXd chol;
  TrendSolve solve;
  double nugget = 0.0;
  double sigma2 = 0.0;
  double objective = 0.0;
};

/// 1e-12 * var(y); constant data falls back to max(mean square, 1).
double variance_floor(const Eigen::Ref<const Eigen::VectorXd>& y);

Eigen::MatrixXd pairwise_distances(const Eigen::Ref<const Eigen::MatrixXd>& a,
                                   const Eigen::Ref<const Eigen::MatrixXd>& b);

Eigen::MatrixXd correlation_matrix(const Eigen::Ref<const Eigen::MatrixXd>& inputs, double theta,
                                   double nugget);

std::optional<Eigen::MatrixXd> cholesky_lower(const Eigen::MatrixXd& r);

/// GLS solve given the correlation factor. With `fixed_coefficients` the trend is not
/// re-estimated (used when restoring a serialized model).
std::optional<TrendSolve> solve_trend(const Eigen::MatrixXd& chol, const Eigen::MatrixXd& trend,
                                      const Eigen::Ref<const Eigen::VectorXd>& y,
                                      const Eigen::VectorXd* fixed_coefficients);

std::optional<Profile> profile(const Eigen::Ref<const Eigen::MatrixXd>& inputs,
                               const Eigen::Ref<const Eigen::VectorXd>& y,
                               const Eigen::MatrixXd& trend, double theta, double nugget);

std::optional<Profile> profile_with_ladder(const Eigen::Ref<const Eigen::MatrixXd>& inputs,
                                           const Eigen::Ref<const Eigen::VectorXd>& y,
                                           const Eigen::MatrixXd& trend, double theta,
                                           double start_nugget);

}  // namespace pckal::detail
