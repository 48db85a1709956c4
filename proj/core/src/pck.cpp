#include "pckal/pck.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <optional>

#include <Eigen/Cholesky>
#include <boost/math/tools/minima.hpp>

#include "pck_internal.hpp"
#include "pckal/errors.hpp"

namespace pckal {
namespace detail {

namespace {

// Smallest accepted squared pivot of the correlation Cholesky factor. Matrices whose
// factorization only succeeds below this are treated as singular and escalated.
constexpr double kPivotFloor = 1e-12;

constexpr double kFailedObjective = std::numeric_limits<double>::max();

}  // namespace

double variance_floor(const Eigen::Ref<const Eigen::VectorXd>& y) {
  const auto n = static_cast<double>(y.size());
  const double mean = y.mean();
  const double var = (y.array() - mean).square().sum() / n;
  const double scale = var > 0.0 ? var : std::max(y.squaredNorm() / n, 1.0);
  return 1e-12 * scale;
}

Eigen::MatrixXd pairwise_distances(const Eigen::Ref<const Eigen::MatrixXd>& a,
                                   const Eigen::Ref<const Eigen::MatrixXd>& b) {
  Eigen::MatrixXd d(a.rows(), b.rows());
  for (Eigen::Index j = 0; j < b.rows(); ++j) {
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
      d(i, j) = (a.row(i) - b.row(j)).norm();
    }
  }
  return d;
}

Eigen::MatrixXd correlation_matrix(const Eigen::Ref<const Eigen::MatrixXd>& inputs, double theta,
                                   double nugget) {
  const Eigen::Index n = inputs.rows();
  Eigen::MatrixXd r(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    r(j, j) = 1.0 + nugget;
    for (Eigen::Index i = j + 1; i < n; ++i) {
      const double v = matern52((inputs.row(i) - inputs.row(j)).norm(), theta);
      r(i, j) = v;
      r(j, i) = v;
    }
  }
  return r;
}

std::optional<Eigen::MatrixXd> cholesky_lower(const Eigen::MatrixXd& r) {
  Eigen::LLT<Eigen::MatrixXd> llt(r);
  if (llt.info() != Eigen::Success) return std::nullopt;
  Eigen::MatrixXd l = llt.matrixL();
  const double min_pivot = l.diagonal().minCoeff();
  if (!std::isfinite(min_pivot) || min_pivot * min_pivot < kPivotFloor) return std::nullopt;
  return l;
}

std::optional<TrendSolve> solve_trend(const Eigen::MatrixXd& chol, const Eigen::MatrixXd& trend,
                                      const Eigen::Ref<const Eigen::VectorXd>& y,
                                      const Eigen::VectorXd* fixed_coefficients) {
  TrendSolve out;
  const auto lower = chol.triangularView<Eigen::Lower>();
  out.whitened_trend = lower.solve(trend);
  const Eigen::MatrixXd gram = out.whitened_trend.transpose() * out.whitened_trend;
  Eigen::LLT<Eigen::MatrixXd> gram_llt(gram);
  if (gram_llt.info() != Eigen::Success) return std::nullopt;
  out.gram_chol = gram_llt.matrixL();
  const double gmin = out.gram_chol.diagonal().minCoeff();
  const double gmax = out.gram_chol.diagonal().maxCoeff();
  if (!(gmin > 1e-7 * gmax)) return std::nullopt;

  const Eigen::VectorXd z = lower.solve(y);
  if (fixed_coefficients != nullptr) {
    out.coefficients = *fixed_coefficients;
  } else {
    const Eigen::MatrixXd& g = out.gram_chol;
    Eigen::VectorXd rhs = out.whitened_trend.transpose() * z;
    g.triangularView<Eigen::Lower>().solveInPlace(rhs);
    g.transpose().triangularView<Eigen::Upper>().solveInPlace(rhs);
    out.coefficients = rhs;
  }
  const Eigen::VectorXd w = z - out.whitened_trend * out.coefficients;
  out.quadratic = w.squaredNorm();
  out.alpha = lower.transpose().solve(w);
  return out;
}

std::optional<Profile> profile(const Eigen::Ref<const Eigen::MatrixXd>& inputs,
                               const Eigen::Ref<const Eigen::VectorXd>& y,
                               const Eigen::MatrixXd& trend, double theta, double nugget) {
  auto chol = cholesky_lower(correlation_matrix(inputs, theta, nugget));
  if (!chol) return std::nullopt;
  auto solved = solve_trend(*chol, trend, y, nullptr);
  if (!solved) return std::nullopt;

  const auto n = static_cast<double>(y.size());
  Profile p;
  p.chol = std::move(*chol);
  p.solve = std::move(*solved);
  p.nugget = nugget;
  p.sigma2 = std::max(p.solve.quadratic / n, variance_floor(y));
  const double log_det = 2.0 * p.chol.diagonal().array().log().sum();
  p.objective = 0.5 * (log_det + n * std::log(2.0 * std::numbers::pi * p.sigma2) + n);
  return p;
}

std::optional<Profile> profile_with_ladder(const Eigen::Ref<const Eigen::MatrixXd>& inputs,
                                           const Eigen::Ref<const Eigen::VectorXd>& y,
                                           const Eigen::MatrixXd& trend, double theta,
                                           double start_nugget) {
  if (auto p = profile(inputs, y, trend, theta, start_nugget)) return p;
  for (double nugget : kNuggetLadder) {
    if (nugget <= start_nugget) continue;
    if (auto p = profile(inputs, y, trend, theta, nugget)) return p;
  }
  return std::nullopt;
}

}  // namespace detail

double matern52(double distance, double theta) {
  if (!(theta > 0.0)) {
    throw Error(ErrorCode::hyperparameter_domain, "Matern scale theta must be positive");
  }
  const double s = std::sqrt(5.0) * distance / theta;
  return (1.0 + s + s * s / 3.0) * std::exp(-s);
}

namespace {

void check_training_shapes(const Eigen::Ref<const Eigen::MatrixXd>& inputs,
                           const Eigen::Ref<const Eigen::VectorXd>& outputs,
                           const PceBasis& basis) {
  if (inputs.rows() != outputs.size()) {
    throw Error(ErrorCode::input_shape, "inputs and outputs disagree on the number of points");
  }
  if (static_cast<std::size_t>(inputs.cols()) != basis.dims()) {
    throw Error(ErrorCode::input_shape, "inputs and basis disagree on the dimension");
  }
}

void check_kernel(double theta, double nugget) {
  if (!(theta > 0.0) || !std::isfinite(theta)) {
    throw Error(ErrorCode::hyperparameter_domain, "theta must be positive and finite");
  }
  if (!(nugget >= 0.0)) {
    throw Error(ErrorCode::hyperparameter_domain, "nugget must be non-negative");
  }
}

}  // namespace

ProfileFit fit_given(const Eigen::Ref<const Eigen::MatrixXd>& inputs,
                     const Eigen::Ref<const Eigen::VectorXd>& outputs, const PceBasis& basis,
                     double theta, double nugget) {
  check_training_shapes(inputs, outputs, basis);
  check_kernel(theta, nugget);
  if (static_cast<std::size_t>(inputs.rows()) <= basis.size()) {
    throw Error(ErrorCode::underdetermined_trend,
                std::to_string(inputs.rows()) + " points for " + std::to_string(basis.size()) +
                    " trend terms");
  }
  const Eigen::MatrixXd trend = basis.design_matrix(inputs);
  auto p = detail::profile_with_ladder(inputs, outputs, trend, theta, nugget);
  if (!p) {
    throw Error(ErrorCode::ill_conditioned, "correlation matrix not factorizable at theta=" +
                                                std::to_string(theta));
  }
  return ProfileFit{p->solve.coefficients, p->sigma2, p->objective, p->nugget};
}

PckModel fit_fixed(const Eigen::Ref<const Eigen::MatrixXd>& inputs,
                   const Eigen::Ref<const Eigen::VectorXd>& outputs, const PceBasis& basis,
                   KernelSpec kernel) {
  check_training_shapes(inputs, outputs, basis);
  check_kernel(kernel.theta, kernel.nugget);
  if (static_cast<std::size_t>(inputs.rows()) < basis.size() + 2) {
    throw Error(ErrorCode::underdetermined_trend,
                std::to_string(inputs.rows()) + " points cannot support LOO with " +
                    std::to_string(basis.size()) + " trend terms");
  }
  const Eigen::MatrixXd trend = basis.design_matrix(inputs);

  std::vector<double> nuggets{kernel.nugget};
  for (double n : kNuggetLadder) {
    if (n > kernel.nugget) nuggets.push_back(n);
  }
  for (double nugget : nuggets) {
    auto p = detail::profile(inputs, outputs, trend, kernel.theta, nugget);
    if (!p) continue;
    PckModel model;
    model.basis_ = basis;
    model.kernel_ = KernelSpec{kernel.theta, nugget};
    model.inputs_ = inputs;
    model.outputs_ = outputs;
    model.trend_ = trend;
    model.chol_ = std::move(p->chol);
    model.whitened_trend_ = std::move(p->solve.whitened_trend);
    model.gram_chol_ = std::move(p->solve.gram_chol);
    model.coefficients_ = std::move(p->solve.coefficients);
    model.alpha_ = std::move(p->solve.alpha);
    model.quadratic_ = p->solve.quadratic;
    model.sigma2_ = p->sigma2;
    model.objective_ = p->objective;
    try {
      model.loo_ = loo_diagnostics(model);
    } catch (const Error& e) {
      if (e.code() == ErrorCode::ill_conditioned) continue;
      throw;
    }
    return model;
  }
  throw Error(ErrorCode::ill_conditioned,
              "no nugget on the ladder makes the design factorizable at theta=" +
                  std::to_string(kernel.theta));
}

PckModel fit(const Eigen::Ref<const Eigen::MatrixXd>& inputs,
             const Eigen::Ref<const Eigen::VectorXd>& outputs, const PceBasis& basis,
             const ThetaSearch& search) {
  check_training_shapes(inputs, outputs, basis);
  if (!(search.lo > 0.0) || !(search.lo < search.hi) || search.starts == 0) {
    throw Error(ErrorCode::hyperparameter_domain, "theta search needs 0 < lo < hi and starts >= 1");
  }
  if (static_cast<std::size_t>(inputs.rows()) < basis.size() + 2) {
    throw Error(ErrorCode::underdetermined_trend,
                std::to_string(inputs.rows()) + " points for " + std::to_string(basis.size()) +
                    " trend terms");
  }
  const Eigen::MatrixXd trend = basis.design_matrix(inputs);
  auto objective = [&](double log_theta) {
    auto p = detail::profile_with_ladder(inputs, outputs, trend, std::exp(log_theta), 0.0);
    return p ? p->objective : detail::kFailedObjective;
  };

  const double log_lo = std::log(search.lo);
  const double log_hi = std::log(search.hi);
  const double width = (log_hi - log_lo) / static_cast<double>(search.starts);
  double best_log_theta = 0.0;
  double best_value = detail::kFailedObjective;
  std::vector<double> trace;
  trace.reserve(search.starts);
  for (unsigned k = 0; k < search.starts; ++k) {
    const double a = log_lo + width * static_cast<double>(k);
    const double b = k + 1 == search.starts ? log_hi : a + width;
    std::uintmax_t max_iter = 200;
    const auto [x, fx] = boost::math::tools::brent_find_minima(objective, a, b, search.bits, max_iter);
    if (fx < best_value) {
      best_value = fx;
      best_log_theta = x;
    }
    trace.push_back(best_value);
  }
  if (!(best_value < detail::kFailedObjective)) {
    throw Error(ErrorCode::ill_conditioned, "every theta start failed to factorize");
  }
  PckModel model = fit_fixed(inputs, outputs, basis, KernelSpec{std::exp(best_log_theta), 0.0});
  model.search_trace_ = std::move(trace);
  return model;
}

PckModel select_model(const Eigen::Ref<const Eigen::MatrixXd>& inputs,
                      const Eigen::Ref<const Eigen::VectorXd>& outputs, DegreeRange degrees,
                      const ThetaSearch& search) {
  const auto n = static_cast<std::size_t>(inputs.rows());
  const auto dims = static_cast<std::size_t>(inputs.cols());
  std::optional<PckModel> best;
  const double tie = 1e-12 * std::max(outputs.squaredNorm() / static_cast<double>(n), 1e-300);
  for (unsigned p = degrees.min; p <= degrees.max; ++p) {
    if (n <= index_set_size(dims, p) + 1) break;
    PckModel candidate = fit(inputs, outputs, PceBasis(dims, p), search);
    if (!best || candidate.loo().eps < best->loo().eps - tie) {
      best = std::move(candidate);
    }
  }
  if (!best) {
    throw Error(ErrorCode::underdetermined_trend,
                "no degree in [" + std::to_string(degrees.min) + ", " +
                    std::to_string(degrees.max) + "] is admissible for " + std::to_string(n) +
                    " points");
  }
  return std::move(*best);
}

LooDiagnostics loo_diagnostics(const PckModel& model) {
  const Eigen::Index n = model.inputs_.rows();
  const auto p = static_cast<Eigen::Index>(model.basis_.size());
  if (n < p + 2) {
    throw Error(ErrorCode::underdetermined_trend, "LOO needs at least |A| + 2 points");
  }
  // P = R^-1 - R^-1 F (F^T R^-1 F)^-1 F^T R^-1. Its diagonal gives the delete-one
  // residual e_s = (P y)_s / P_ss and the delete-one quadratic Q - (P y)_s^2 / P_ss.
  const auto lower = model.chol_.triangularView<Eigen::Lower>();
  Eigen::MatrixXd linv = Eigen::MatrixXd::Identity(n, n);
  lower.solveInPlace(linv);
  const Eigen::MatrixXd rinv = linv.transpose() * linv;
  const Eigen::MatrixXd h = linv.transpose() * model.whitened_trend_;  // R^-1 F
  Eigen::MatrixXd b = h.transpose();
  model.gram_chol_.triangularView<Eigen::Lower>().solveInPlace(b);

  LooDiagnostics out;
  out.errors.resize(n);
  out.variances.resize(n);
  Eigen::VectorXd rest(n - 1);
  for (Eigen::Index s = 0; s < n; ++s) {
    const double pss = rinv(s, s) - b.col(s).squaredNorm();
    if (!(pss > 0.0) || !std::isfinite(pss)) {
      throw Error(ErrorCode::ill_conditioned, "degenerate LOO fold " + std::to_string(s));
    }
    const double ps_y = model.alpha_[s];
    out.errors[s] = ps_y / pss;
    const double fold_quadratic = model.quadratic_ - ps_y * ps_y / pss;
    rest.head(s) = model.outputs_.head(s);
    rest.tail(n - 1 - s) = model.outputs_.tail(n - 1 - s);
    const double fold_sigma2 =
        std::max(fold_quadratic / static_cast<double>(n - 1), detail::variance_floor(rest));
    out.variances[s] = fold_sigma2 * std::max(1.0 / pss - model.kernel_.nugget, 0.0);
  }
  out.eps = out.errors.squaredNorm() / static_cast<double>(n);
  return out;
}

Prediction PckModel::predict(const Eigen::Ref<const Eigen::VectorXd>& u) const {
  if (static_cast<std::size_t>(u.size()) != basis_.dims()) {
    throw Error(ErrorCode::input_shape, "prediction point has the wrong dimension");
  }
  const Eigen::MatrixXd query = u.transpose();
  const Eigen::MatrixXd trend = basis_.design_matrix(query);
  const Eigen::MatrixXd distances = detail::pairwise_distances(inputs_, query);
  Eigen::VectorXd mean;
  Eigen::VectorXd variance;
  predict_batch(trend, distances, mean, &variance);
  return Prediction{mean[0], std::sqrt(variance[0])};
}

void PckModel::predict_batch(const Eigen::Ref<const Eigen::MatrixXd>& trend,
                             const Eigen::Ref<const Eigen::MatrixXd>& distances,
                             Eigen::VectorXd& mean, Eigen::VectorXd* variance) const {
  const Eigen::Index n_train = inputs_.rows();
  const auto p = static_cast<Eigen::Index>(basis_.size());
  const Eigen::Index q = distances.cols();
  if (distances.rows() != n_train || trend.rows() != q || trend.cols() < p) {
    throw Error(ErrorCode::input_shape, "batched prediction blocks have inconsistent shapes");
  }
  const double theta = kernel_.theta;
  const double scale = std::sqrt(5.0) / theta;
  Eigen::MatrixXd k(n_train, q);
  for (Eigen::Index j = 0; j < q; ++j) {
    for (Eigen::Index i = 0; i < n_train; ++i) {
      const double s = scale * distances(i, j);
      k(i, j) = (1.0 + s + s * s / 3.0) * std::exp(-s);
    }
  }
  const auto f = trend.leftCols(p);
  mean = f * coefficients_ + k.transpose() * alpha_;
  if (variance == nullptr) return;

  chol_.triangularView<Eigen::Lower>().solveInPlace(k);  // k <- L^-1 r
  Eigen::MatrixXd v = f.transpose() - whitened_trend_.transpose() * k;
  gram_chol_.triangularView<Eigen::Lower>().solveInPlace(v);
  variance->resize(q);
  for (Eigen::Index j = 0; j < q; ++j) {
    const double normalized = 1.0 - k.col(j).squaredNorm() + v.col(j).squaredNorm();
    const double var = sigma2_ * normalized;
    (*variance)[j] = var > 0.0 ? var : 0.0;
  }
}

}  // namespace pckal
