#include "pckal/records.hpp"

#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>

#include "pckal/errors.hpp"

namespace pckal {
namespace {

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, sep)) out.push_back(field);
  if (!line.empty() && line.back() == sep) out.emplace_back();
  return out;
}

std::string join(const std::vector<std::string>& parts, char sep) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i > 0) out += sep;
    out += parts[i];
  }
  return out;
}

std::size_t parse_count(const std::string& text) {
  std::size_t used = 0;
  unsigned long long v = 0;
  try {
    v = std::stoull(text, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != text.size()) {
    throw Error(ErrorCode::io, "expected an unsigned integer, got '" + text + "'");
  }
  return static_cast<std::size_t>(v);
}

std::vector<std::string> header_for(const RunInfo& info) {
  std::vector<std::string> h = {"step", "design_size", "target", "pool_index", "u_score"};
  for (const auto& x : info.inputs) h.push_back("x_" + x);
  for (const auto& ls : info.limit_states) {
    for (const char* k : {"p_", "beta_", "se_", "degree_", "theta_"}) h.push_back(k + ls);
  }
  h.emplace_back("wall_seconds");
  return h;
}

}  // namespace

std::string make_run_id(const StrategySpec& strategy, std::size_t replication) {
  std::string key = strategy_key(strategy);
  for (auto& c : key) {
    if (c == ':') c = '-';
  }
  char rep[32];
  std::snprintf(rep, sizeof rep, "r%02zu", replication);
  return key + "__" + std::string(to_string(strategy.metric)) + "__" + rep;
}

std::string format_double(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", value);
  return buf;
}

double parse_double(const std::string& text) {
  if (text == "inf") return std::numeric_limits<double>::infinity();
  if (text == "-inf") return -std::numeric_limits<double>::infinity();
  if (text == "nan") return std::numeric_limits<double>::quiet_NaN();
  char* end = nullptr;
  errno = 0;
  const double v = std::strtod(text.c_str(), &end);
  if (text.empty() || end != text.c_str() + text.size()) {
    throw Error(ErrorCode::io, "expected a number, got '" + text + "'");
  }
  return v;
}

std::string format_evolution(const RunInfo& info, const std::vector<StepRecord>& steps) {
  std::ostringstream out;
  out << "# run_id=" << info.run_id << '\n'
      << "# problem=" << info.problem << '\n'
      << "# strategy=" << info.strategy << '\n'
      << "# metric=" << info.metric << '\n'
      << "# replication=" << info.replication << '\n'
      << "# seed=" << info.seed << '\n'
      << "# status=" << info.status << '\n'
      << "# pool_size=" << info.pool_size << '\n'
      << "# inputs=" << join(info.inputs, ' ') << '\n'
      << "# limit_states=" << join(info.limit_states, ' ') << '\n';
  out << join(header_for(info), ',') << '\n';

  const std::size_t dims = info.inputs.size();
  for (std::size_t k = 0; k < steps.size(); ++k) {
    const auto& s = steps[k];
    if (s.estimates.size() != info.limit_states.size()) {
      throw Error(ErrorCode::input_shape, "step record has the wrong number of estimates");
    }
    std::vector<std::string> f;
    f.push_back(std::to_string(k));
    f.push_back(std::to_string(s.design_size));
    f.push_back(s.target ? std::to_string(*s.target + 1) : "");
    f.push_back(s.pool_index ? std::to_string(*s.pool_index) : "");
    f.push_back(s.target ? format_double(s.u_score) : "");
    for (std::size_t i = 0; i < dims; ++i) {
      f.push_back(static_cast<std::size_t>(s.point.size()) == dims
                      ? format_double(s.point[static_cast<Eigen::Index>(i)])
                      : "");
    }
    for (std::size_t j = 0; j < info.limit_states.size(); ++j) {
      const auto& e = s.estimates[j];
      f.push_back(format_double(e.probability));
      f.push_back(format_double(e.beta));
      f.push_back(format_double(e.standard_error));
      f.push_back(j < s.degrees.size() ? std::to_string(s.degrees[j]) : "");
      f.push_back(j < s.thetas.size() ? format_double(s.thetas[j]) : "");
    }
    f.push_back(format_double(s.wall_seconds));
    out << join(f, ',') << '\n';
  }
  return out.str();
}

EvolutionFile parse_evolution(const std::string& text) {
  EvolutionFile file;
  std::map<std::string, std::string> meta;
  std::istringstream in(text);
  std::string line;
  std::vector<std::string> header;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (line.front() == '#') {
      const auto eq = line.find('=');
      if (eq == std::string::npos) continue;
      std::string key = line.substr(1, eq - 1);
      while (!key.empty() && key.front() == ' ') key.erase(key.begin());
      meta[key] = line.substr(eq + 1);
      continue;
    }
    if (header.empty()) {
      header = split(line, ',');
      break;
    }
  }
  auto need = [&](const char* key) -> const std::string& {
    const auto it = meta.find(key);
    if (it == meta.end()) throw Error(ErrorCode::io, std::string("record lacks '") + key + "'");
    return it->second;
  };
  auto words = [](const std::string& s) {
    std::vector<std::string> out;
    std::istringstream ws(s);
    for (std::string w; ws >> w;) out.push_back(w);
    return out;
  };
  RunInfo& info = file.info;
  info.run_id = need("run_id");
  info.problem = need("problem");
  info.strategy = need("strategy");
  info.metric = need("metric");
  info.replication = parse_count(need("replication"));
  info.seed = parse_count(need("seed"));
  info.status = need("status");
  info.pool_size = parse_count(need("pool_size"));
  info.inputs = words(need("inputs"));
  info.limit_states = words(need("limit_states"));
  if (header != header_for(info)) throw Error(ErrorCode::io, "unexpected record header");

  const std::size_t dims = info.inputs.size();
  const std::size_t m = info.limit_states.size();
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto f = split(line, ',');
    if (f.size() != header.size()) throw Error(ErrorCode::io, "ragged record row");
    StepRecord s;
    std::size_t c = 1;
    s.design_size = parse_count(f[c++]);
    const std::string& target = f[c++];
    const std::string& pool_index = f[c++];
    const std::string& u = f[c++];
    if (!target.empty()) {
      const std::size_t t = parse_count(target);
      if (t == 0) throw Error(ErrorCode::io, "record target must be one-based");
      s.target = t - 1;
    }
    if (!pool_index.empty()) s.pool_index = parse_count(pool_index);
    s.u_score = u.empty() ? 0.0 : parse_double(u);
    if (!f[c].empty()) {
      s.point.resize(static_cast<Eigen::Index>(dims));
      for (std::size_t i = 0; i < dims; ++i) s.point[static_cast<Eigen::Index>(i)] = parse_double(f[c + i]);
    }
    c += dims;
    for (std::size_t j = 0; j < m; ++j) {
      ReliabilityEstimate e;
      e.probability = parse_double(f[c++]);
      e.beta = parse_double(f[c++]);
      e.standard_error = parse_double(f[c++]);
      e.samples = info.pool_size;
      s.estimates.push_back(e);
      const std::string& degree = f[c++];
      if (!degree.empty()) s.degrees.push_back(static_cast<unsigned>(parse_count(degree)));
      const std::string& theta = f[c++];
      if (!theta.empty()) s.thetas.push_back(parse_double(theta));
    }
    s.wall_seconds = parse_double(f[c]);
    file.steps.push_back(std::move(s));
  }
  return file;
}

void write_file_atomic(const std::filesystem::path& path, const std::string& content) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw Error(ErrorCode::io, "cannot write " + tmp.string());
    out << content;
    if (!out) throw Error(ErrorCode::io, "short write to " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::io, "cannot read " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

void write_evolution(const std::filesystem::path& path, const RunInfo& info,
                     const std::vector<StepRecord>& steps) {
  write_file_atomic(path, format_evolution(info, steps));
}

EvolutionFile read_evolution(const std::filesystem::path& path) {
  return parse_evolution(read_file(path));
}

}  // namespace pckal
