#include "pckal/prob_space.hpp"

#include <cmath>
#include <numeric>

#include "pckal/errors.hpp"
#include "pckal/normal.hpp"
#include "pckal/random.hpp"

namespace pckal {
namespace {

void check_dims(Eigen::Index got, std::size_t want) {
  if (static_cast<std::size_t>(got) != want) {
    throw Error(ErrorCode::input_shape, "expected " + std::to_string(want) +
                                            " coordinates, got " + std::to_string(got));
  }
}

}  // namespace

RandomInput::RandomInput(std::vector<Marginal> marginals) : marginals_(std::move(marginals)) {
  if (marginals_.empty()) {
    throw Error(ErrorCode::validation, "random input needs at least one dimension");
  }
  const auto m = static_cast<Eigen::Index>(marginals_.size());
  mu_.resize(m);
  sigma_.resize(m);
  for (Eigen::Index i = 0; i < m; ++i) {
    const auto& mg = marginals_[static_cast<std::size_t>(i)];
    if (!(mg.sigma > 0.0) || !std::isfinite(mg.sigma) || !std::isfinite(mg.mu)) {
      throw Error(ErrorCode::validation,
                  "marginal " + std::to_string(i) + " needs finite mu and sigma > 0");
    }
    mu_[i] = mg.mu;
    sigma_[i] = mg.sigma;
  }
}

Eigen::VectorXd RandomInput::to_standard(const Eigen::Ref<const Eigen::VectorXd>& x) const {
  check_dims(x.size(), dims());
  return (x - mu_).cwiseQuotient(sigma_);
}

Eigen::VectorXd RandomInput::from_standard(const Eigen::Ref<const Eigen::VectorXd>& u) const {
  check_dims(u.size(), dims());
  return mu_ + u.cwiseProduct(sigma_);
}

Eigen::MatrixXd RandomInput::to_standard_rows(const Eigen::Ref<const Eigen::MatrixXd>& x) const {
  check_dims(x.cols(), dims());
  Eigen::MatrixXd u(x.rows(), x.cols());
  for (Eigen::Index j = 0; j < x.cols(); ++j) {
    u.col(j) = (x.col(j).array() - mu_[j]) / sigma_[j];
  }
  return u;
}

Eigen::MatrixXd RandomInput::from_standard_rows(
    const Eigen::Ref<const Eigen::MatrixXd>& u) const {
  check_dims(u.cols(), dims());
  Eigen::MatrixXd x(u.rows(), u.cols());
  for (Eigen::Index j = 0; j < u.cols(); ++j) {
    x.col(j) = mu_[j] + u.col(j).array() * sigma_[j];
  }
  return x;
}

SamplePool sample_mc(const RandomInput& input, std::size_t n, std::uint64_t seed,
                     std::uint64_t generation) {
  if (n == 0) {
    throw Error(ErrorCode::empty_pool, "Monte Carlo pool size must be at least 1");
  }
  RandomStream stream(seed, "mc/" + std::to_string(generation));
  const auto rows = static_cast<Eigen::Index>(n);
  const auto cols = static_cast<Eigen::Index>(input.dims());
  Eigen::MatrixXd u(rows, cols);
  // Row-major fill so the stream order does not depend on the storage order.
  for (Eigen::Index i = 0; i < rows; ++i) {
    for (Eigen::Index j = 0; j < cols; ++j) {
      u(i, j) = stream.normal();
    }
  }
  return SamplePool{input.from_standard_rows(u), seed, generation};
}

SamplePool sample_lhs(const RandomInput& input, std::size_t n, std::uint64_t seed,
                      std::uint64_t generation) {
  if (n < 2) {
    throw Error(ErrorCode::degenerate_design, "Latin hypercube needs at least 2 points");
  }
  RandomStream stream(seed, "lhs/" + std::to_string(generation));
  const auto rows = static_cast<Eigen::Index>(n);
  const auto cols = static_cast<Eigen::Index>(input.dims());
  Eigen::MatrixXd u(rows, cols);
  std::vector<std::size_t> strata(n);
  for (Eigen::Index j = 0; j < cols; ++j) {
    std::iota(strata.begin(), strata.end(), std::size_t{0});
    for (std::size_t i = n - 1; i > 0; --i) {
      std::swap(strata[i], strata[stream.below(i + 1)]);
    }
    for (Eigen::Index i = 0; i < rows; ++i) {
      const double p = (static_cast<double>(strata[static_cast<std::size_t>(i)]) + 0.5) /
                       static_cast<double>(n);
      u(i, j) = normal_quantile(p);
    }
  }
  return SamplePool{input.from_standard_rows(u), seed, generation};
}

}  // namespace pckal
