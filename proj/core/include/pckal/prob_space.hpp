#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace pckal {

struct Marginal {
  std::string name;
  double mu = 0.0;
  double sigma = 1.0;
};

/// Independent Gaussian input model. Points are rows in "physical" space; the
/// standard space is the per-dimension z-score (x - mu) / sigma.
class RandomInput {
 public:
  explicit RandomInput(std::vector<Marginal> marginals);

  std::size_t dims() const noexcept { return marginals_.size(); }
  const std::vector<Marginal>& marginals() const noexcept { return marginals_; }
  const Marginal& marginal(std::size_t i) const { return marginals_.at(i); }

  Eigen::VectorXd to_standard(const Eigen::Ref<const Eigen::VectorXd>& x) const;
  Eigen::VectorXd from_standard(const Eigen::Ref<const Eigen::VectorXd>& u) const;

  /// Row-wise transforms for an n x M matrix.
  Eigen::MatrixXd to_standard_rows(const Eigen::Ref<const Eigen::MatrixXd>& x) const;
  Eigen::MatrixXd from_standard_rows(const Eigen::Ref<const Eigen::MatrixXd>& u) const;

 private:
  std::vector<Marginal> marginals_;
  Eigen::VectorXd mu_;
  Eigen::VectorXd sigma_;
};

/// An n x M block of physical-space points and the stream it came from.
struct SamplePool {
  Eigen::MatrixXd points;
  std::uint64_t seed = 0;
  std::uint64_t generation = 0;

  std::size_t size() const noexcept { return static_cast<std::size_t>(points.rows()); }
};

/// i.i.d. Monte Carlo draws; stream label "mc/<generation>".
SamplePool sample_mc(const RandomInput& input, std::size_t n, std::uint64_t seed,
                     std::uint64_t generation = 0);

/// Latin hypercube design with stratum-midpoint probabilities mapped through the
/// Gaussian quantile; per-dimension strata are randomly permuted. Stream label
/// "lhs/<generation>".
SamplePool sample_lhs(const RandomInput& input, std::size_t n, std::uint64_t seed,
                      std::uint64_t generation = 0);

}  // namespace pckal
