#include "config.hpp"

#include <cmath>
#include <set>
#include <sstream>

#include <json.hpp>

#include "pckal/errors.hpp"
#include "pckal/records.hpp"

namespace pckal::cli {
namespace {

using nlohmann::json;

constexpr const char* kThreshold = "threshold";

bool same(const Marginal& a, const Marginal& b) {
  return a.name == b.name && a.mu == b.mu && a.sigma == b.sigma;
}

bool same(const MockPenetration& a, const MockPenetration& b) {
  return a.scale == b.scale && a.v_ref == b.v_ref && a.rho_ref == b.rho_ref &&
         a.exponent == b.exponent;
}

class Checker {
 public:
  void fail(const std::string& field, const std::string& what) {
    issues_.push_back(field + ": " + what);
  }

  void keys(const json& obj, const std::string& where, std::initializer_list<const char*> allowed) {
    const std::set<std::string> ok(allowed.begin(), allowed.end());
    for (const auto& [key, value] : obj.items()) {
      if (!ok.contains(key)) fail(where.empty() ? key : where + "." + key, "unknown key");
    }
  }

  const json* object(const json& parent, const char* key, const std::string& field) {
    if (!parent.contains(key)) return nullptr;
    const json& v = parent.at(key);
    if (!v.is_object()) {
      fail(field, "expected an object");
      return nullptr;
    }
    return &v;
  }

  template <class T>
  std::optional<T> get(const json& parent, const char* key, const std::string& field) {
    if (!parent.contains(key)) return std::nullopt;
    const json& v = parent.at(key);
    if constexpr (std::is_same_v<T, std::string>) {
      if (!v.is_string()) return fail(field, "expected a string"), std::nullopt;
    } else if constexpr (std::is_same_v<T, double>) {
      if (!v.is_number()) return fail(field, "expected a number"), std::nullopt;
      if (!std::isfinite(v.get<double>())) return fail(field, "must be finite"), std::nullopt;
    } else if constexpr (std::is_integral_v<T>) {
      if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<std::int64_t>() >= 0)) {
        return fail(field, "expected a non-negative integer"), std::nullopt;
      }
    }
    return v.get<T>();
  }

  std::optional<std::vector<std::string>> strings(const json& parent, const char* key,
                                                  const std::string& field) {
    if (!parent.contains(key)) return std::nullopt;
    const json& v = parent.at(key);
    if (!v.is_array()) return fail(field, "expected an array of strings"), std::nullopt;
    std::vector<std::string> out;
    for (const auto& s : v) {
      if (!s.is_string()) return fail(field, "expected an array of strings"), std::nullopt;
      out.push_back(s.get<std::string>());
    }
    return out;
  }

  void finish() const {
    if (issues_.empty()) return;
    std::string msg = "invalid configuration";
    for (const auto& i : issues_) msg += "\n  " + i;
    throw Error(ErrorCode::validation, msg);
  }

 private:
  std::vector<std::string> issues_;
};

void parse_problem(Checker& c, const json& p, ProblemSpec& out) {
  c.keys(p, "problem", {"kind", "name", "inputs", "thresholds", "adapter"});
  if (auto kind = c.get<std::string>(p, "kind", "problem.kind")) out.kind = *kind;
  else c.fail("problem.kind", "required");

  if (out.kind == kAnalyticProblem) {
    for (const char* k : {"name", "inputs", "thresholds", "adapter"}) {
      if (p.contains(k)) c.fail(std::string("problem.") + k, "not allowed for " + out.kind);
    }
    return;
  }
  if (out.kind != kThreshold) {
    c.fail("problem.kind", "expected \"two-lsf-analytic\" or \"threshold\"");
    return;
  }

  out.name = c.get<std::string>(p, "name", "problem.name").value_or("collision-mock");
  out.inputs = collision_input().marginals();
  if (p.contains("inputs")) {
    out.inputs.clear();
    const json& arr = p.at("inputs");
    if (!arr.is_array() || arr.empty()) c.fail("problem.inputs", "expected a non-empty array");
    else {
      for (std::size_t i = 0; i < arr.size(); ++i) {
        const std::string f = "problem.inputs[" + std::to_string(i) + "]";
        if (!arr[i].is_object()) {
          c.fail(f, "expected an object");
          continue;
        }
        c.keys(arr[i], f, {"name", "mu", "sigma"});
        Marginal m;
        m.name = c.get<std::string>(arr[i], "name", f + ".name").value_or("");
        m.mu = c.get<double>(arr[i], "mu", f + ".mu").value_or(0.0);
        m.sigma = c.get<double>(arr[i], "sigma", f + ".sigma").value_or(0.0);
        if (m.name.empty()) c.fail(f + ".name", "required");
        if (!(m.sigma > 0.0)) c.fail(f + ".sigma", "must be positive");
        out.inputs.push_back(m);
      }
    }
  }
  out.thresholds = collision_thresholds();
  if (p.contains("thresholds")) {
    out.thresholds.clear();
    const json& arr = p.at("thresholds");
    if (!arr.is_array() || arr.empty()) c.fail("problem.thresholds", "expected a non-empty array");
    else {
      for (std::size_t i = 0; i < arr.size(); ++i) {
        const std::string f = "problem.thresholds[" + std::to_string(i) + "]";
        if (!arr[i].is_object()) {
          c.fail(f, "expected an object");
          continue;
        }
        c.keys(arr[i], f, {"name", "value"});
        Threshold t;
        t.name = c.get<std::string>(arr[i], "name", f + ".name").value_or("");
        t.value = c.get<double>(arr[i], "value", f + ".value").value_or(0.0);
        if (t.name.empty()) c.fail(f + ".name", "required");
        out.thresholds.push_back(t);
      }
    }
  }

  const json* a = c.object(p, "adapter", "problem.adapter");
  if (a == nullptr) {
    if (!p.contains("adapter")) c.fail("problem.adapter", "required for threshold problems");
    return;
  }
  c.keys(*a, "problem.adapter", {"kind", "params", "command", "concurrency", "timeout_ms"});
  AdapterSpec& ad = out.adapter;
  ad.kind = c.get<std::string>(*a, "kind", "problem.adapter.kind").value_or("");
  ad.concurrency = c.get<std::size_t>(*a, "concurrency", "problem.adapter.concurrency").value_or(1);
  ad.timeout_ms = static_cast<std::int64_t>(
      c.get<std::uint64_t>(*a, "timeout_ms", "problem.adapter.timeout_ms").value_or(600'000));
  if (ad.concurrency == 0) c.fail("problem.adapter.concurrency", "must be at least 1");
  if (ad.timeout_ms == 0) c.fail("problem.adapter.timeout_ms", "must be positive");
  if (ad.kind == "mock") {
    if (a->contains("command")) c.fail("problem.adapter.command", "not allowed for the mock adapter");
    if (const json* params = c.object(*a, "params", "problem.adapter.params")) {
      c.keys(*params, "problem.adapter.params", {"scale", "v_ref", "rho_ref", "exponent"});
      auto& mk = ad.mock;
      mk.scale = c.get<double>(*params, "scale", "problem.adapter.params.scale").value_or(mk.scale);
      mk.v_ref = c.get<double>(*params, "v_ref", "problem.adapter.params.v_ref").value_or(mk.v_ref);
      mk.rho_ref =
          c.get<double>(*params, "rho_ref", "problem.adapter.params.rho_ref").value_or(mk.rho_ref);
      mk.exponent = c.get<double>(*params, "exponent", "problem.adapter.params.exponent")
                        .value_or(mk.exponent);
      if (!(mk.v_ref > 0.0)) c.fail("problem.adapter.params.v_ref", "must be positive");
      if (!(mk.rho_ref > 0.0)) c.fail("problem.adapter.params.rho_ref", "must be positive");
    }
    if (out.inputs.size() != 2) c.fail("problem.inputs", "the mock adapter expects 2 inputs (v_s rho0)");
  } else if (ad.kind == "command") {
    if (a->contains("params")) c.fail("problem.adapter.params", "only allowed for the mock adapter");
    ad.command = c.strings(*a, "command", "problem.adapter.command").value_or(std::vector<std::string>{});
    if (ad.command.empty()) c.fail("problem.adapter.command", "required non-empty argv array");
  } else {
    c.fail("problem.adapter.kind", "expected \"mock\" or \"command\"");
  }
}

}  // namespace

bool AdapterSpec::operator==(const AdapterSpec& o) const {
  return kind == o.kind && same(mock, o.mock) && command == o.command &&
         concurrency == o.concurrency && timeout_ms == o.timeout_ms;
}

bool ProblemSpec::operator==(const ProblemSpec& o) const {
  if (kind != o.kind || name != o.name || inputs.size() != o.inputs.size() ||
      thresholds.size() != o.thresholds.size() || !(adapter == o.adapter)) {
    return false;
  }
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    if (!same(inputs[i], o.inputs[i])) return false;
  }
  for (std::size_t i = 0; i < thresholds.size(); ++i) {
    if (thresholds[i].name != o.thresholds[i].name || thresholds[i].value != o.thresholds[i].value) {
      return false;
    }
  }
  return true;
}

bool StudyConfig::operator==(const StudyConfig& o) const {
  return problem == o.problem && strategies == o.strategies && metrics == o.metrics &&
         budget == o.budget && n_init == o.n_init && pool_size == o.pool_size &&
         replications == o.replications && base_seed == o.base_seed &&
         degrees.min == o.degrees.min && degrees.max == o.degrees.max && theta.lo == o.theta.lo &&
         theta.hi == o.theta.hi && theta.starts == o.theta.starts && theta.bits == o.theta.bits &&
         output_dir == o.output_dir && truth_file == o.truth_file;
}

StudyConfig parse_config(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::validation, std::string("config is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw Error(ErrorCode::validation, "config must be a JSON object");

  Checker c;
  c.keys(j, "", {"problem", "strategies", "metrics", "budget", "n_init", "pool_size",
                 "replications", "base_seed", "degrees", "theta", "output_dir", "truth_file"});
  StudyConfig cfg;
  if (const json* p = c.object(j, "problem", "problem")) parse_problem(c, *p, cfg.problem);
  else if (!j.contains("problem")) c.fail("problem", "required");

  const bool analytic = cfg.problem.kind == kAnalyticProblem;
  cfg.strategies = c.strings(j, "strategies", "strategies")
                       .value_or(std::vector<std::string>{"single:1", "single:2", "alternate",
                                                          "convergence"});
  cfg.metrics = c.strings(j, "metrics", "metrics").value_or(std::vector<std::string>{"U", "U-LOO"});

  auto count = [&](const char* key, std::optional<std::size_t> fallback) -> std::size_t {
    if (auto v = c.get<std::size_t>(j, key, key)) return *v;
    if (!j.contains(key)) {
      if (fallback) return *fallback;
      c.fail(key, "required for this problem");
    }
    return 0;
  };
  cfg.budget = count("budget", analytic ? std::optional<std::size_t>(49) : std::nullopt);
  cfg.n_init = count("n_init", analytic ? std::optional<std::size_t>(10) : std::nullopt);
  cfg.pool_size = count("pool_size", std::size_t{100'000});
  cfg.replications = count("replications", analytic ? std::size_t{15} : std::size_t{10});
  cfg.base_seed = c.get<std::uint64_t>(j, "base_seed", "base_seed").value_or(0);

  if (const json* d = c.object(j, "degrees", "degrees")) {
    c.keys(*d, "degrees", {"min", "max"});
    cfg.degrees.min = c.get<unsigned>(*d, "min", "degrees.min").value_or(cfg.degrees.min);
    cfg.degrees.max = c.get<unsigned>(*d, "max", "degrees.max").value_or(cfg.degrees.max);
  }
  if (const json* t = c.object(j, "theta", "theta")) {
    c.keys(*t, "theta", {"lo", "hi", "starts", "bits"});
    cfg.theta.lo = c.get<double>(*t, "lo", "theta.lo").value_or(cfg.theta.lo);
    cfg.theta.hi = c.get<double>(*t, "hi", "theta.hi").value_or(cfg.theta.hi);
    cfg.theta.starts = c.get<unsigned>(*t, "starts", "theta.starts").value_or(cfg.theta.starts);
    cfg.theta.bits = c.get<int>(*t, "bits", "theta.bits").value_or(cfg.theta.bits);
  }
  cfg.output_dir = c.get<std::string>(j, "output_dir", "output_dir").value_or("study");
  if (auto t = c.get<std::string>(j, "truth_file", "truth_file")) cfg.truth_file = *t;

  std::set<std::string> seen;
  for (const auto& s : cfg.strategies) {
    try {
      const auto spec = parse_strategy(s, LearningMetric::u);
      const std::size_t m = analytic ? 2 : cfg.problem.thresholds.size();
      if (spec.kind == StrategyKind::single_target && spec.target >= m) {
        c.fail("strategies", "'" + s + "' targets limit state " + std::to_string(spec.target + 1) +
                                 " but the problem has " + std::to_string(m));
      }
    } catch (const Error&) {
      c.fail("strategies", "unknown strategy '" + s + "' (single:<j>, alternate, convergence)");
    }
    if (!seen.insert(s).second) c.fail("strategies", "duplicate entry '" + s + "'");
  }
  if (cfg.strategies.empty()) c.fail("strategies", "must not be empty");
  seen.clear();
  for (const auto& m : cfg.metrics) {
    if (m != "U" && m != "U-LOO") c.fail("metrics", "unknown metric '" + m + "' (U, U-LOO)");
    if (!seen.insert(m).second) c.fail("metrics", "duplicate entry '" + m + "'");
  }
  if (cfg.metrics.empty()) c.fail("metrics", "must not be empty");

  if (j.contains("n_init") || analytic) {
    if (cfg.n_init < 2 && (j.contains("n_init") || analytic)) c.fail("n_init", "must be at least 2");
  }
  if (cfg.budget > 0 && cfg.n_init >= cfg.budget) {
    c.fail("n_init", "must be smaller than budget (n_init=" + std::to_string(cfg.n_init) +
                         ", budget=" + std::to_string(cfg.budget) + ")");
  }
  if (cfg.pool_size == 0) c.fail("pool_size", "must be positive");
  if (cfg.replications == 0) c.fail("replications", "must be at least 1");
  if (cfg.degrees.min > cfg.degrees.max) c.fail("degrees", "min must not exceed max");
  if (!(cfg.theta.lo > 0.0 && cfg.theta.lo < cfg.theta.hi)) {
    c.fail("theta", "need 0 < lo < hi");
  }
  if (cfg.theta.starts == 0) c.fail("theta.starts", "must be at least 1");
  if (cfg.theta.bits < 4 || cfg.theta.bits > 52) c.fail("theta.bits", "must lie in [4, 52]");
  if (cfg.output_dir.empty()) c.fail("output_dir", "must not be empty");
  c.finish();
  return cfg;
}

StudyConfig load_config(const std::filesystem::path& path) {
  StudyConfig cfg = parse_config(read_file(path));
  const auto base = path.parent_path();
  if (cfg.output_dir.is_relative()) cfg.output_dir = (base / cfg.output_dir).lexically_normal();
  if (cfg.truth_file && cfg.truth_file->is_relative()) {
    cfg.truth_file = (base / *cfg.truth_file).lexically_normal();
  }
  return cfg;
}

std::string emit_config(const StudyConfig& cfg) {
  json p;
  p["kind"] = cfg.problem.kind;
  if (cfg.problem.kind == kThreshold) {
    p["name"] = cfg.problem.name;
    json inputs = json::array();
    for (const auto& m : cfg.problem.inputs) {
      inputs.push_back({{"name", m.name}, {"mu", m.mu}, {"sigma", m.sigma}});
    }
    p["inputs"] = inputs;
    json thresholds = json::array();
    for (const auto& t : cfg.problem.thresholds) {
      thresholds.push_back({{"name", t.name}, {"value", t.value}});
    }
    p["thresholds"] = thresholds;
    const auto& a = cfg.problem.adapter;
    json adapter{{"kind", a.kind}, {"concurrency", a.concurrency}, {"timeout_ms", a.timeout_ms}};
    if (a.kind == "mock") {
      adapter["params"] = {{"scale", a.mock.scale},
                           {"v_ref", a.mock.v_ref},
                           {"rho_ref", a.mock.rho_ref},
                           {"exponent", a.mock.exponent}};
    } else {
      adapter["command"] = a.command;
    }
    p["adapter"] = adapter;
  }
  json j;
  j["problem"] = p;
  j["strategies"] = cfg.strategies;
  j["metrics"] = cfg.metrics;
  j["budget"] = cfg.budget;
  j["n_init"] = cfg.n_init;
  j["pool_size"] = cfg.pool_size;
  j["replications"] = cfg.replications;
  j["base_seed"] = cfg.base_seed;
  j["degrees"] = {{"min", cfg.degrees.min}, {"max", cfg.degrees.max}};
  j["theta"] = {{"lo", cfg.theta.lo}, {"hi", cfg.theta.hi}, {"starts", cfg.theta.starts},
                {"bits", cfg.theta.bits}};
  j["output_dir"] = cfg.output_dir.string();
  if (cfg.truth_file) j["truth_file"] = cfg.truth_file->string();
  return j.dump(2) + "\n";
}

std::filesystem::path truth_path(const StudyConfig& config) {
  return config.truth_file ? *config.truth_file : config.output_dir / "truth" / "truth.json";
}

std::string problem_name(const StudyConfig& config) {
  return config.problem.kind == kThreshold ? config.problem.name : std::string(kAnalyticProblem);
}

}  // namespace pckal::cli
