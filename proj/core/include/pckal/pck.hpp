#pragma once

#include <array>
#include <cstddef>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "pckal/pce_basis.hpp"

namespace pckal {

/// Matern-5/2 correlation (1 + s + s^2/3) exp(-s), s = sqrt(5) d / theta.
double matern52(double distance, double theta);

struct KernelSpec {
  double theta = 1.0;
  double nugget = 0.0;
};

struct Prediction {
  double mean = 0.0;
  double stddev = 0.0;

  double variance() const noexcept { return stddev * stddev; }
};

/// Nuggets tried in order when the correlation matrix fails to factor.
inline constexpr std::array<double, 4> kNuggetLadder{0.0, 1e-10, 1e-8, 1e-6};

/// Bounded search for the isotropic scale theta.
struct ThetaSearch {
  double lo = 1e-2;
  double hi = 1e2;
  unsigned starts = 5;
  int bits = 20;
};

/// Inner generalized-least-squares step at fixed theta.
struct ProfileFit {
  Eigen::VectorXd coefficients;
  double sigma2 = 0.0;
  /// 0.5 * [log det R + N log(2 pi sigma2) + N]
  double objective = 0.0;
  double nugget = 0.0;
};

struct LooDiagnostics {
  Eigen::VectorXd errors;
  Eigen::VectorXd variances;
  double eps = 0.0;
};

class PckModel;

/// Profile likelihood at a fixed theta. Nuggets below `nugget` on the ladder are
/// skipped; larger ones are tried when factorization fails.
ProfileFit fit_given(const Eigen::Ref<const Eigen::MatrixXd>& inputs,
                     const Eigen::Ref<const Eigen::VectorXd>& outputs, const PceBasis& basis,
                     double theta, double nugget = 0.0);

/// Full model at a fixed kernel, including LOO diagnostics.
PckModel fit_fixed(const Eigen::Ref<const Eigen::MatrixXd>& inputs,
                   const Eigen::Ref<const Eigen::VectorXd>& outputs, const PceBasis& basis,
                   KernelSpec kernel);

/// Maximum-likelihood theta over the search domain, then fit_fixed at the optimum.
PckModel fit(const Eigen::Ref<const Eigen::MatrixXd>& inputs,
             const Eigen::Ref<const Eigen::VectorXd>& outputs, const PceBasis& basis,
             const ThetaSearch& search = {});

struct DegreeRange {
  unsigned min = 0;
  unsigned max = 4;
};

/// Fits one candidate per admissible total degree (N > |A| + 1) and keeps the one
/// with the smallest LOO error, ties going to the lower degree.
PckModel select_model(const Eigen::Ref<const Eigen::MatrixXd>& inputs,
                      const Eigen::Ref<const Eigen::VectorXd>& outputs, DegreeRange degrees,
                      const ThetaSearch& search = {});

/// Recomputes the closed-form delete-one diagnostics of a fitted model.
LooDiagnostics loo_diagnostics(const PckModel& model);

/// Fitted PC-Kriging model. Inputs are standard-space rows; immutable after fitting.
class PckModel {
 public:
  const PceBasis& basis() const noexcept { return basis_; }
  const KernelSpec& kernel() const noexcept { return kernel_; }
  const Eigen::VectorXd& coefficients() const noexcept { return coefficients_; }
  double sigma2() const noexcept { return sigma2_; }
  double objective() const noexcept { return objective_; }
  const Eigen::MatrixXd& inputs() const noexcept { return inputs_; }
  const Eigen::VectorXd& outputs() const noexcept { return outputs_; }
  /// Lower Cholesky factor of R (nugget included on the diagonal).
  const Eigen::MatrixXd& cholesky() const noexcept { return chol_; }
  const LooDiagnostics& loo() const noexcept { return loo_; }
  /// Best objective after each theta start, in search order.
  const std::vector<double>& search_trace() const noexcept { return search_trace_; }
  std::size_t size() const noexcept { return static_cast<std::size_t>(inputs_.rows()); }

  Prediction predict(const Eigen::Ref<const Eigen::VectorXd>& u) const;

  /// Batched prediction for n query points.
  /// `trend` is n x P' with P' >= |A|; only its leading |A| columns are read, which
  /// works because lower-degree index sets are prefixes of higher-degree ones.
  /// `distances` is N x n, distances from each training input to each query.
  /// `variance` may be null when only the mean is needed.
  void predict_batch(const Eigen::Ref<const Eigen::MatrixXd>& trend,
                     const Eigen::Ref<const Eigen::MatrixXd>& distances, Eigen::VectorXd& mean,
                     Eigen::VectorXd* variance) const;

 private:
  friend PckModel fit_fixed(const Eigen::Ref<const Eigen::MatrixXd>&,
                            const Eigen::Ref<const Eigen::VectorXd>&, const PceBasis&,
                            KernelSpec);
  friend PckModel fit(const Eigen::Ref<const Eigen::MatrixXd>&,
                      const Eigen::Ref<const Eigen::VectorXd>&, const PceBasis&,
                      const ThetaSearch&);
  friend PckModel model_from_json(const std::string&);
  friend LooDiagnostics loo_diagnostics(const PckModel&);

  PceBasis basis_;
  KernelSpec kernel_;
  Eigen::MatrixXd inputs_;
  Eigen::VectorXd outputs_;
  Eigen::MatrixXd trend_;  // F, N x |A|
  Eigen::MatrixXd chol_;   // L, R = L L^T
  Eigen::MatrixXd whitened_trend_;  // G = L^-1 F
  Eigen::MatrixXd gram_chol_;       // lower Cholesky of G^T G = F^T R^-1 F
  Eigen::VectorXd coefficients_;
  Eigen::VectorXd alpha_;  // R^-1 (y - F a)
  double quadratic_ = 0.0;  // (y - F a)^T R^-1 (y - F a)
  double sigma2_ = 0.0;
  double objective_ = 0.0;
  LooDiagnostics loo_;
  std::vector<double> search_trace_;
};

/// Structured-text (JSON) checkpoint of every fitted field at full precision.
std::string to_json(const PckModel& model);
PckModel model_from_json(const std::string& text);

}  // namespace pckal
