#pragma once

#include <cstddef>

#include <Eigen/Core>

#include "pckal/pck.hpp"

namespace pckal {

/// Piecewise-constant variance inflation over the Voronoi cells of the training
/// inputs: a query takes the factor 1 + e_LOO^2 / s_LOO^2 of its nearest site.
class CorrectionField {
 public:
  /// `sites` is N x M (standard space); every factor must be finite and >= 1.
  CorrectionField(Eigen::MatrixXd sites, Eigen::VectorXd factors);

  /// All factors equal to one.
  static CorrectionField identity(Eigen::MatrixXd sites);

  const Eigen::MatrixXd& sites() const noexcept { return sites_; }
  const Eigen::VectorXd& factors() const noexcept { return factors_; }
  std::size_t size() const noexcept { return static_cast<std::size_t>(sites_.rows()); }

  /// Index of the nearest site; ties go to the lowest index.
  std::size_t owner(const Eigen::Ref<const Eigen::VectorXd>& u) const;

  double corrected_variance(const Eigen::Ref<const Eigen::VectorXd>& u, double raw) const;

 private:
  Eigen::MatrixXd sites_;
  Eigen::VectorXd factors_;
};

/// Factors from the model's LOO diagnostics, with s_LOO^2 floored at 1e-12 sigma^2.
CorrectionField build_correction(const PckModel& model);

}  // namespace pckal
