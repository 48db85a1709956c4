// Run checkpoint format:
//
// {
//   "format": "pckal.checkpoint/1",
//   "problem": name, "limit_states": [names], "strategy": key, "metric": "U" | "U-LOO",
//   "seed": s, "budget": b, "n_init": n, "pool_size": k,
//   "streams": {"pool": "mc/0", "initial_design": "lhs/0"},
//   "design": {"inputs": [[x..]], "responses": [[g_1..g_m]]},
//   "steps": [{"design_size", "target", "pool_index", "u_score", "point",
//              "estimates": [{"p", "beta", "n", "se"}], "degrees", "thetas",
//              "wall_seconds"}],
//   "exhausted": false
// }
//
// A null u_score stands for +inf.

#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include <json.hpp>

#include "pckal/active_learning.hpp"
#include "pckal/errors.hpp"

namespace pckal {
namespace {

using nlohmann::json;

constexpr const char* kFormat = "pckal.checkpoint/1";

json row_to_json(const Eigen::VectorXd& v) {
  return json(std::vector<double>(v.data(), v.data() + v.size()));
}

Eigen::VectorXd row_from_json(const json& j) {
  const auto values = j.get<std::vector<double>>();
  return Eigen::Map<const Eigen::VectorXd>(values.data(), static_cast<Eigen::Index>(values.size()));
}

json step_to_json(const StepRecord& s) {
  json j;
  j["design_size"] = s.design_size;
  j["target"] = s.target ? json(*s.target) : json(nullptr);
  j["pool_index"] = s.pool_index ? json(*s.pool_index) : json(nullptr);
  j["u_score"] = std::isfinite(s.u_score) ? json(s.u_score) : json(nullptr);
  j["point"] = row_to_json(s.point);
  json est = json::array();
  for (const auto& e : s.estimates) {
    est.push_back({{"p", e.probability}, {"beta", e.beta}, {"n", e.samples},
                   {"se", e.standard_error}});
  }
  j["estimates"] = std::move(est);
  j["degrees"] = s.degrees;
  j["thetas"] = s.thetas;
  j["wall_seconds"] = s.wall_seconds;
  return j;
}

StepRecord step_from_json(const json& j) {
  StepRecord s;
  s.design_size = j.at("design_size").get<std::size_t>();
  if (!j.at("target").is_null()) s.target = j.at("target").get<std::size_t>();
  if (!j.at("pool_index").is_null()) s.pool_index = j.at("pool_index").get<std::size_t>();
  s.u_score = j.at("u_score").is_null() ? std::numeric_limits<double>::infinity()
                                        : j.at("u_score").get<double>();
  s.point = row_from_json(j.at("point"));
  for (const auto& e : j.at("estimates")) {
    s.estimates.push_back(ReliabilityEstimate{e.at("p").get<double>(), e.at("beta").get<double>(),
                                              e.at("n").get<std::size_t>(),
                                              e.at("se").get<double>()});
  }
  s.degrees = j.at("degrees").get<std::vector<unsigned>>();
  s.thetas = j.at("thetas").get<std::vector<double>>();
  s.wall_seconds = j.at("wall_seconds").get<double>();
  return s;
}

std::vector<std::string> names_of(const Problem& problem) {
  std::vector<std::string> names;
  for (const auto& ls : problem.limit_states) names.push_back(ls.name);
  return names;
}

}  // namespace

void write_checkpoint(const std::filesystem::path& path, const Problem& problem,
                      const StrategySpec& strategy, const ActiveLearningConfig& config,
                      const RunRecord& record) {
  json j;
  j["format"] = kFormat;
  j["problem"] = problem.name;
  j["limit_states"] = names_of(problem);
  j["strategy"] = strategy_key(strategy);
  j["metric"] = std::string(to_string(strategy.metric));
  j["seed"] = config.seed;
  j["budget"] = config.budget;
  j["n_init"] = config.n_init;
  j["pool_size"] = config.pool_size;
  j["streams"] = {{"pool", "mc/0"}, {"initial_design", "lhs/0"}};
  json inputs = json::array();
  json responses = json::array();
  for (Eigen::Index i = 0; i < record.design.inputs().rows(); ++i) {
    inputs.push_back(row_to_json(record.design.inputs().row(i).transpose()));
    responses.push_back(row_to_json(record.design.responses().row(i).transpose()));
  }
  j["design"] = {{"inputs", std::move(inputs)}, {"responses", std::move(responses)}};
  json steps = json::array();
  for (const auto& s : record.steps) steps.push_back(step_to_json(s));
  j["steps"] = std::move(steps);
  j["exhausted"] = record.exhausted;

  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp);
    if (!out) throw Error(ErrorCode::io, "cannot write checkpoint " + tmp.string());
    out << j.dump(1) << '\n';
  }
  std::filesystem::rename(tmp, path);
}

Checkpoint read_checkpoint(const std::filesystem::path& path, const Problem& problem,
                           const StrategySpec& strategy, const ActiveLearningConfig& config) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::io, "cannot read checkpoint " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  try {
    const json j = json::parse(buffer.str());
    if (j.at("format").get<std::string>() != kFormat) {
      throw Error(ErrorCode::io, "unsupported checkpoint format in " + path.string());
    }
    const bool matches =
        j.at("problem").get<std::string>() == problem.name &&
        j.at("limit_states").get<std::vector<std::string>>() == names_of(problem) &&
        j.at("strategy").get<std::string>() == strategy_key(strategy) &&
        j.at("metric").get<std::string>() == to_string(strategy.metric) &&
        j.at("seed").get<std::uint64_t>() == config.seed &&
        j.at("budget").get<std::size_t>() == config.budget &&
        j.at("n_init").get<std::size_t>() == config.n_init &&
        j.at("pool_size").get<std::size_t>() == config.pool_size;
    if (!matches) {
      throw Error(ErrorCode::validation,
                  "checkpoint " + path.string() + " was written by a different configuration");
    }
    Checkpoint cp;
    cp.design = ExperimentalDesign(problem.input.dims(), problem.limit_states.size());
    const auto& inputs = j.at("design").at("inputs");
    const auto& responses = j.at("design").at("responses");
    if (inputs.size() != responses.size()) {
      throw Error(ErrorCode::io, "checkpoint design and responses disagree in length");
    }
    for (std::size_t i = 0; i < inputs.size(); ++i) {
      const Eigen::VectorXd x = row_from_json(inputs[i]);
      cp.design.append(x, problem.input.to_standard(x), row_from_json(responses[i]));
    }
    for (const auto& s : j.at("steps")) cp.steps.push_back(step_from_json(s));
    cp.exhausted = j.at("exhausted").get<bool>();
    return cp;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::io, "malformed checkpoint " + path.string() + ": " + e.what());
  }
}

}  // namespace pckal
