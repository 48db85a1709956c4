#include <algorithm>
#include <cmath>
#include <limits>

#include "pckal/active_learning.hpp"
#include "pckal/errors.hpp"

namespace pckal {
namespace {

constexpr Eigen::Index kChunk = 2048;
constexpr double kDuplicateTolerance = 1e-10;

}  // namespace

ExperimentalDesign::ExperimentalDesign(std::size_t dims, std::size_t limit_states)
    : inputs_(0, static_cast<Eigen::Index>(dims)),
      standard_(0, static_cast<Eigen::Index>(dims)),
      responses_(0, static_cast<Eigen::Index>(limit_states)) {}

bool ExperimentalDesign::contains(const Eigen::Ref<const Eigen::VectorXd>& u,
                                  double tolerance) const {
  for (Eigen::Index i = 0; i < standard_.rows(); ++i) {
    if ((standard_.row(i).transpose() - u).norm() < tolerance) return true;
  }
  return false;
}

void ExperimentalDesign::append(const Eigen::VectorXd& x, const Eigen::VectorXd& u,
                                const Eigen::VectorXd& responses) {
  if (x.size() != inputs_.cols() || u.size() != standard_.cols() ||
      responses.size() != responses_.cols()) {
    throw Error(ErrorCode::input_shape, "design row has the wrong shape");
  }
  if (contains(u)) {
    throw Error(ErrorCode::validation, "point already in the experimental design");
  }
  const Eigen::Index n = inputs_.rows();
  inputs_.conservativeResize(n + 1, Eigen::NoChange);
  standard_.conservativeResize(n + 1, Eigen::NoChange);
  responses_.conservativeResize(n + 1, Eigen::NoChange);
  inputs_.row(n) = x.transpose();
  standard_.row(n) = u.transpose();
  responses_.row(n) = responses.transpose();
}

CandidatePool::CandidatePool(const RandomInput& input, const SamplePool& pool,
                             unsigned max_degree, std::size_t site_capacity)
    : physical_(pool.points),
      standard_(input.to_standard_rows(pool.points)),
      trend_(PceBasis(input.dims(), max_degree).design_matrix(standard_)),
      distances_(static_cast<Eigen::Index>(std::max<std::size_t>(site_capacity, 1)),
                 standard_.rows()),
      nearest_(pool.size(), 0),
      nearest_distance_(pool.size(), std::numeric_limits<double>::infinity()) {
  if (pool.size() == 0) throw Error(ErrorCode::empty_pool, "candidate pool is empty");
}

void CandidatePool::add_site(const Eigen::Ref<const Eigen::VectorXd>& u) {
  if (u.size() != standard_.cols()) {
    throw Error(ErrorCode::input_shape, "site has the wrong dimension");
  }
  const auto row = static_cast<Eigen::Index>(sites_);
  if (row == distances_.rows()) {
    Eigen::MatrixXd grown(2 * distances_.rows(), distances_.cols());
    grown.topRows(row) = distances_;
    distances_ = std::move(grown);
  }
  for (Eigen::Index j = 0; j < standard_.rows(); ++j) {
    const double d = (standard_.row(j).transpose() - u).norm();
    distances_(row, j) = d;
    const auto c = static_cast<std::size_t>(j);
    if (d < nearest_distance_[c]) {
      nearest_distance_[c] = d;
      nearest_[c] = static_cast<std::uint32_t>(sites_);
    }
  }
  ++sites_;
}

void CandidatePool::predict(const PckModel& model, Eigen::VectorXd& mean,
                            Eigen::VectorXd* variance) const {
  const auto n_train = static_cast<Eigen::Index>(model.size());
  if (model.size() > sites_) {
    throw Error(ErrorCode::input_shape, "model trained on more points than the pool tracks");
  }
  const Eigen::Index n = standard_.rows();
  mean.resize(n);
  if (variance != nullptr) variance->resize(n);
  Eigen::VectorXd chunk_mean;
  Eigen::VectorXd chunk_var;
  for (Eigen::Index start = 0; start < n; start += kChunk) {
    const Eigen::Index len = std::min(kChunk, n - start);
    model.predict_batch(trend_.middleRows(start, len), distances_.block(0, start, n_train, len),
                        chunk_mean, variance != nullptr ? &chunk_var : nullptr);
    mean.segment(start, len) = chunk_mean;
    if (variance != nullptr) variance->segment(start, len) = chunk_var;
  }
}

double u_score(const Prediction& prediction) {
  const double m = std::abs(prediction.mean);
  if (prediction.stddev > 0.0) return m / prediction.stddev;
  return m == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
}

std::optional<Selection> argmin_score(std::span<const double> scores,
                                      const std::vector<bool>& skip) {
  std::optional<Selection> best;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (i < skip.size() && skip[i]) continue;
    if (!best || scores[i] < best->score) best = Selection{i, scores[i]};
  }
  return best;
}

void score_candidates(const PckModel& model, const CorrectionField* correction,
                      const CandidatePool& pool, std::vector<double>& scores,
                      std::vector<bool>& duplicate) {
  Eigen::VectorXd mean;
  Eigen::VectorXd variance;
  pool.predict(model, mean, &variance);
  const std::size_t n = pool.size();
  scores.resize(n);
  duplicate.assign(n, false);
  const bool cached_owner = correction != nullptr && correction->size() == pool.sites();
  for (std::size_t i = 0; i < n; ++i) {
    duplicate[i] = pool.nearest_distance(i) < kDuplicateTolerance;
    double var = variance[static_cast<Eigen::Index>(i)];
    if (correction != nullptr) {
      const std::size_t owner = cached_owner
                                    ? pool.nearest_site(i)
                                    : correction->owner(pool.standard().row(
                                          static_cast<Eigen::Index>(i)).transpose());
      var *= correction->factors()[static_cast<Eigen::Index>(owner)];
    }
    scores[i] = u_score(Prediction{mean[static_cast<Eigen::Index>(i)], std::sqrt(var)});
  }
}

Selection select_candidate(const PckModel& model, const CorrectionField* correction,
                           const CandidatePool& pool) {
  std::vector<double> scores;
  std::vector<bool> duplicate;
  score_candidates(model, correction, pool, scores, duplicate);
  auto best = argmin_score(scores, duplicate);
  if (!best) {
    throw Error(ErrorCode::exhausted_pool, "every candidate duplicates a design point");
  }
  return *best;
}

}  // namespace pckal
