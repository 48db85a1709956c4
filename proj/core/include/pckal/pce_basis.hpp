#pragma once

#include <cstddef>
#include <vector>

#include <Eigen/Core>

namespace pckal {

using MultiIndex = std::vector<unsigned>;

/// Total-degree truncated multi-index set in graded-lexicographic order.
///
/// Within a total degree the first coordinate decreases, so for M = 2 the order is
/// (0,0), (1,0), (0,1), (2,0), (1,1), (0,2), ... The set for degree p is therefore a
/// prefix of the set for degree p + 1.
class MultiIndexSet {
 public:
  MultiIndexSet() = default;
  MultiIndexSet(std::size_t dims, unsigned degree, std::vector<MultiIndex> indices);

  std::size_t dims() const noexcept { return dims_; }
  unsigned degree() const noexcept { return degree_; }
  std::size_t size() const noexcept { return indices_.size(); }
  const MultiIndex& operator[](std::size_t i) const { return indices_[i]; }
  const std::vector<MultiIndex>& indices() const noexcept { return indices_; }

 private:
  std::size_t dims_ = 0;
  unsigned degree_ = 0;
  std::vector<MultiIndex> indices_;
};

MultiIndexSet build_index_set(std::size_t dims, unsigned degree);

/// Number of terms C(M + p, p) in a total-degree set.
std::size_t index_set_size(std::size_t dims, unsigned degree);

/// Probabilists' Hermite polynomial He_n(u) by the three-term recurrence.
double hermite(unsigned n, double u);

/// Orthonormal multivariate Hermite basis on standard-normal inputs:
/// psi_alpha(u) = prod_i He_{alpha_i}(u_i) / sqrt(alpha_i!).
class PceBasis {
 public:
  PceBasis() = default;
  explicit PceBasis(MultiIndexSet indices);
  PceBasis(std::size_t dims, unsigned degree) : PceBasis(build_index_set(dims, degree)) {}

  std::size_t dims() const noexcept { return indices_.dims(); }
  unsigned degree() const noexcept { return indices_.degree(); }
  std::size_t size() const noexcept { return indices_.size(); }
  const MultiIndexSet& index_set() const noexcept { return indices_; }

  Eigen::VectorXd eval(const Eigen::Ref<const Eigen::VectorXd>& u) const;

  /// n x |A| regression matrix; row s is eval(points.row(s)).
  Eigen::MatrixXd design_matrix(const Eigen::Ref<const Eigen::MatrixXd>& points) const;

 private:
  MultiIndexSet indices_;
};

}  // namespace pckal
