#include "pckal/ground_truth.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "pckal/errors.hpp"

namespace pckal {
namespace {

constexpr std::size_t kChunk = std::size_t{1} << 20;
// Keeps truth streams apart from the candidate pools, which use generation 0.
constexpr std::uint64_t kTruthGeneration = std::uint64_t{1} << 32;

}  // namespace

ReliabilityEstimate monte_carlo_probability(const RandomInput& input,
                                            const std::function<double(const Eigen::VectorXd&)>& g,
                                            std::size_t n, std::uint64_t seed) {
  if (n == 0) throw Error(ErrorCode::empty_pool, "Monte Carlo sample size must be positive");
  std::size_t failures = 0;
  Eigen::VectorXd x(static_cast<Eigen::Index>(input.dims()));
  for (std::size_t start = 0, chunk = 0; start < n; start += kChunk, ++chunk) {
    const std::size_t len = std::min(kChunk, n - start);
    const SamplePool block = sample_mc(input, len, seed, kTruthGeneration + chunk);
    for (Eigen::Index i = 0; i < block.points.rows(); ++i) {
      x = block.points.row(i).transpose();
      if (g(x) <= 0.0) ++failures;
    }
  }
  const double p = static_cast<double>(failures) / static_cast<double>(n);
  return ReliabilityEstimate{p, beta_from_probability(p, n), n,
                             std::sqrt(p * (1.0 - p) / static_cast<double>(n))};
}

ReliabilityEstimate ground_truth_beta(const Problem& problem, std::size_t j, std::size_t n,
                                      std::uint64_t seed) {
  if (j >= problem.limit_states.size()) {
    throw Error(ErrorCode::validation, "limit state index out of range");
  }
  if (n < kMinTruthSamples) {
    throw Error(ErrorCode::validation, "ground truth needs at least 10^6 samples, got " +
                                           std::to_string(n));
  }
  const auto& ls = problem.limit_states[j];
  if (ls.cost != CostClass::cheap_analytic) {
    throw Error(ErrorCode::unsupported_oracle,
                "limit state '" + ls.name + "' is not cheap to evaluate; no brute-force oracle");
  }
  return monte_carlo_probability(problem.input, ls.evaluate, n, seed);
}

TruthCache TruthCache::load(const std::filesystem::path& path) {
  TruthCache cache;
  if (!std::filesystem::exists(path)) return cache;
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::io, "cannot read " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  try {
    const auto j = nlohmann::json::parse(buffer.str());
    for (const auto& e : j.at("entries")) {
      TruthEntry entry;
      entry.problem = e.at("problem").get<std::string>();
      entry.limit_state = e.at("limit_state").get<std::string>();
      entry.n = e.at("n").get<std::size_t>();
      entry.seed = e.at("seed").get<std::uint64_t>();
      entry.estimate = ReliabilityEstimate{e.at("p").get<double>(), e.at("beta").get<double>(),
                                           entry.n, e.at("se").get<double>()};
      cache.entries_.push_back(std::move(entry));
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::io, "malformed truth file " + path.string() + ": " + e.what());
  }
  return cache;
}

void TruthCache::save(const std::filesystem::path& path) const {
  nlohmann::json entries = nlohmann::json::array();
  for (const auto& e : entries_) {
    entries.push_back({{"problem", e.problem},
                       {"limit_state", e.limit_state},
                       {"n", e.n},
                       {"seed", e.seed},
                       {"p", e.estimate.probability},
                       {"beta", e.estimate.beta},
                       {"se", e.estimate.standard_error}});
  }
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::io, "cannot write " + path.string());
  out << nlohmann::json{{"format", "pckal.truth/1"}, {"entries", entries}}.dump(2) << '\n';
}

std::optional<TruthEntry> TruthCache::find(const std::string& problem,
                                           const std::string& limit_state, std::size_t n,
                                           std::uint64_t seed) const {
  for (const auto& e : entries_) {
    if (e.problem == problem && e.limit_state == limit_state && e.n == n && e.seed == seed) {
      return e;
    }
  }
  return std::nullopt;
}

std::optional<TruthEntry> TruthCache::best(const std::string& problem,
                                           const std::string& limit_state) const {
  std::optional<TruthEntry> out;
  for (const auto& e : entries_) {
    if (e.problem == problem && e.limit_state == limit_state && (!out || e.n > out->n)) out = e;
  }
  return out;
}

void TruthCache::add(TruthEntry entry) {
  for (auto& e : entries_) {
    if (e.problem == entry.problem && e.limit_state == entry.limit_state && e.n == entry.n &&
        e.seed == entry.seed) {
      e = std::move(entry);
      return;
    }
  }
  entries_.push_back(std::move(entry));
}

}  // namespace pckal
