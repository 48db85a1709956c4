#include "pckal/pce_basis.hpp"

#include <cmath>

#include "pckal/errors.hpp"

namespace pckal {
namespace {

// Appends every composition of `remaining` into the trailing coordinates, first
// coordinate descending.
void compose(std::size_t pos, unsigned remaining, MultiIndex& current,
             std::vector<MultiIndex>& out) {
  if (pos + 1 == current.size()) {
    current[pos] = remaining;
    out.push_back(current);
    return;
  }
  for (unsigned k = remaining + 1; k-- > 0;) {
    current[pos] = k;
    compose(pos + 1, remaining - k, current, out);
  }
  current[pos] = 0;
}

}  // namespace

MultiIndexSet::MultiIndexSet(std::size_t dims, unsigned degree, std::vector<MultiIndex> indices)
    : dims_(dims), degree_(degree), indices_(std::move(indices)) {}

MultiIndexSet build_index_set(std::size_t dims, unsigned degree) {
  if (dims == 0) {
    throw Error(ErrorCode::validation, "index set needs at least one dimension");
  }
  std::vector<MultiIndex> indices;
  indices.reserve(index_set_size(dims, degree));
  MultiIndex current(dims, 0);
  for (unsigned total = 0; total <= degree; ++total) {
    compose(0, total, current, indices);
  }
  return MultiIndexSet(dims, degree, std::move(indices));
}

std::size_t index_set_size(std::size_t dims, unsigned degree) {
  // C(M + p, p), built incrementally to stay exact.
  std::size_t result = 1;
  for (unsigned k = 1; k <= degree; ++k) {
    result = result * (dims + k) / k;
  }
  return result;
}

double hermite(unsigned n, double u) {
  if (n == 0) return 1.0;
  double prev = 1.0;
  double curr = u;
  for (unsigned k = 1; k < n; ++k) {
    const double next = u * curr - static_cast<double>(k) * prev;
    prev = curr;
    curr = next;
  }
  return curr;
}

PceBasis::PceBasis(MultiIndexSet indices) : indices_(std::move(indices)) {}

Eigen::VectorXd PceBasis::eval(const Eigen::Ref<const Eigen::VectorXd>& u) const {
  if (static_cast<std::size_t>(u.size()) != dims()) {
    throw Error(ErrorCode::input_shape, "basis expects " + std::to_string(dims()) +
                                            " coordinates, got " + std::to_string(u.size()));
  }
  const auto m = static_cast<Eigen::Index>(dims());
  const auto p = static_cast<Eigen::Index>(degree());
  // table(k, i) = He_k(u_i) / sqrt(k!)
  Eigen::MatrixXd table(p + 1, m);
  for (Eigen::Index i = 0; i < m; ++i) {
    double prev = 1.0;
    double curr = u[i];
    table(0, i) = 1.0;
    double norm = 1.0;
    for (Eigen::Index k = 1; k <= p; ++k) {
      if (k > 1) {
        const double next = u[i] * curr - static_cast<double>(k - 1) * prev;
        prev = curr;
        curr = next;
      }
      norm *= std::sqrt(static_cast<double>(k));
      table(k, i) = curr / norm;
    }
  }
  Eigen::VectorXd out(static_cast<Eigen::Index>(size()));
  for (std::size_t a = 0; a < size(); ++a) {
    const MultiIndex& alpha = indices_[a];
    double v = 1.0;
    for (Eigen::Index i = 0; i < m; ++i) {
      v *= table(alpha[static_cast<std::size_t>(i)], i);
    }
    out[static_cast<Eigen::Index>(a)] = v;
  }
  return out;
}

Eigen::MatrixXd PceBasis::design_matrix(const Eigen::Ref<const Eigen::MatrixXd>& points) const {
  if (static_cast<std::size_t>(points.cols()) != dims()) {
    throw Error(ErrorCode::input_shape, "design matrix expects " + std::to_string(dims()) +
                                            " columns, got " + std::to_string(points.cols()));
  }
  Eigen::MatrixXd f(points.rows(), static_cast<Eigen::Index>(size()));
  for (Eigen::Index s = 0; s < points.rows(); ++s) {
    f.row(s) = eval(points.row(s).transpose()).transpose();
  }
  return f;
}

}  // namespace pckal
