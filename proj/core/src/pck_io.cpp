// JSON checkpoint format for fitted PC-Kriging models.
//
// {
//   "format": "pckal.pck-model/1",
//   "dims": M, "degree": p, "indices": [[a_1..a_M], ...],
//   "kernel": {"family": "matern52", "theta": t, "nugget": n},
//   "coefficients": [...], "sigma2": s, "objective": o,
//   "inputs": [[u_1..u_M], ...], "outputs": [...],
//   "cholesky": [[row 0 of L], ...],
//   "loo": {"errors": [...], "variances": [...], "eps": e},
//   "search_trace": [...]
// }
//
// Doubles are written in shortest round-trip form. Derived solves are rebuilt from the
// stored factor with the same operations used at fit time, so a restored model predicts
// bit-identically.

#include <json.hpp>

#include "pck_internal.hpp"
#include "pckal/errors.hpp"
#include "pckal/pck.hpp"

namespace pckal {
namespace {

using nlohmann::json;

constexpr const char* kFormat = "pckal.pck-model/1";

json vector_to_json(const Eigen::VectorXd& v) {
  return json(std::vector<double>(v.data(), v.data() + v.size()));
}

json matrix_to_json(const Eigen::MatrixXd& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    std::vector<double> row(static_cast<std::size_t>(m.cols()));
    for (Eigen::Index j = 0; j < m.cols(); ++j) row[static_cast<std::size_t>(j)] = m(i, j);
    rows.push_back(std::move(row));
  }
  return rows;
}

Eigen::VectorXd vector_from_json(const json& j) {
  const auto values = j.get<std::vector<double>>();
  return Eigen::Map<const Eigen::VectorXd>(values.data(), static_cast<Eigen::Index>(values.size()));
}

Eigen::MatrixXd matrix_from_json(const json& j, Eigen::Index cols) {
  Eigen::MatrixXd m(static_cast<Eigen::Index>(j.size()), cols);
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    const auto row = j.at(static_cast<std::size_t>(i)).get<std::vector<double>>();
    if (static_cast<Eigen::Index>(row.size()) != cols) {
      throw Error(ErrorCode::io, "ragged matrix in model file");
    }
    for (Eigen::Index c = 0; c < cols; ++c) m(i, c) = row[static_cast<std::size_t>(c)];
  }
  return m;
}

}  // namespace

std::string to_json(const PckModel& model) {
  json j;
  j["format"] = kFormat;
  j["dims"] = model.basis().dims();
  j["degree"] = model.basis().degree();
  j["indices"] = model.basis().index_set().indices();
  j["kernel"] = {{"family", "matern52"},
                 {"theta", model.kernel().theta},
                 {"nugget", model.kernel().nugget}};
  j["coefficients"] = vector_to_json(model.coefficients());
  j["sigma2"] = model.sigma2();
  j["objective"] = model.objective();
  j["inputs"] = matrix_to_json(model.inputs());
  j["outputs"] = vector_to_json(model.outputs());
  j["cholesky"] = matrix_to_json(model.cholesky());
  j["loo"] = {{"errors", vector_to_json(model.loo().errors)},
              {"variances", vector_to_json(model.loo().variances)},
              {"eps", model.loo().eps}};
  j["search_trace"] = model.search_trace();
  return j.dump(2);
}

PckModel model_from_json(const std::string& text) {
  try {
    const json j = json::parse(text);
    if (j.at("format").get<std::string>() != kFormat) {
      throw Error(ErrorCode::io, "unsupported model format");
    }
    const auto dims = j.at("dims").get<std::size_t>();
    const auto degree = j.at("degree").get<unsigned>();
    auto indices = j.at("indices").get<std::vector<MultiIndex>>();
    if (j.at("kernel").at("family").get<std::string>() != "matern52") {
      throw Error(ErrorCode::io, "unsupported kernel family");
    }

    PckModel model;
    model.basis_ = PceBasis(MultiIndexSet(dims, degree, std::move(indices)));
    model.kernel_ = KernelSpec{j.at("kernel").at("theta").get<double>(),
                               j.at("kernel").at("nugget").get<double>()};
    model.coefficients_ = vector_from_json(j.at("coefficients"));
    model.sigma2_ = j.at("sigma2").get<double>();
    model.objective_ = j.at("objective").get<double>();
    model.inputs_ = matrix_from_json(j.at("inputs"), static_cast<Eigen::Index>(dims));
    model.outputs_ = vector_from_json(j.at("outputs"));
    const Eigen::Index n = model.inputs_.rows();
    model.chol_ = matrix_from_json(j.at("cholesky"), n);
    model.loo_.errors = vector_from_json(j.at("loo").at("errors"));
    model.loo_.variances = vector_from_json(j.at("loo").at("variances"));
    model.loo_.eps = j.at("loo").at("eps").get<double>();
    model.search_trace_ = j.at("search_trace").get<std::vector<double>>();

    if (model.outputs_.size() != n || model.chol_.rows() != n ||
        model.coefficients_.size() != static_cast<Eigen::Index>(model.basis_.size())) {
      throw Error(ErrorCode::io, "inconsistent array sizes in model file");
    }
    model.trend_ = model.basis_.design_matrix(model.inputs_);
    auto solved = detail::solve_trend(model.chol_, model.trend_, model.outputs_,
                                      &model.coefficients_);
    if (!solved) throw Error(ErrorCode::io, "stored model has a singular trend Gram matrix");
    model.whitened_trend_ = std::move(solved->whitened_trend);
    model.gram_chol_ = std::move(solved->gram_chol);
    model.alpha_ = std::move(solved->alpha);
    model.quadratic_ = solved->quadratic;
    return model;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::io, std::string("malformed model file: ") + e.what());
  }
}

}  // namespace pckal
