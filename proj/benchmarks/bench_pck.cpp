#include <benchmark/benchmark.h>

#include "pckal/active_learning.hpp"
#include "pckal/problems.hpp"
#include "pckal/variance_correction.hpp"

namespace {

using namespace pckal;

struct Data {
  Eigen::MatrixXd u;
  Eigen::VectorXd y;
};

Data design(std::size_t n) {
  const RandomInput in = analytic_input();
  const SamplePool p = sample_lhs(in, n, 42);
  Data d{in.to_standard_rows(p.points), Eigen::VectorXd(static_cast<Eigen::Index>(n))};
  for (Eigen::Index i = 0; i < d.y.size(); ++i) d.y[i] = g1(p.points(i, 0), p.points(i, 1));
  return d;
}

void BM_FitFixedDegree(benchmark::State& state) {
  const Data d = design(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(fit(d.u, d.y, PceBasis(2, 2)));
}
BENCHMARK(BM_FitFixedDegree)->Arg(10)->Arg(30)->Arg(49)->Unit(benchmark::kMillisecond);

void BM_SelectModel(benchmark::State& state) {
  const Data d = design(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(select_model(d.u, d.y, DegreeRange{0, 4}));
}
BENCHMARK(BM_SelectModel)->Arg(10)->Arg(30)->Arg(49)->Unit(benchmark::kMillisecond);

void BM_ScorePool(benchmark::State& state) {
  const Data d = design(49);
  const RandomInput in = analytic_input();
  const PckModel m = select_model(d.u, d.y, DegreeRange{0, 4});
  CandidatePool pool(in, sample_mc(in, static_cast<std::size_t>(state.range(0)), 7), 4, 49);
  for (Eigen::Index i = 0; i < d.u.rows(); ++i) pool.add_site(d.u.row(i).transpose());
  const CorrectionField corr = build_correction(m);
  const bool corrected = state.range(1) != 0;
  std::vector<double> scores;
  std::vector<bool> dup;
  for (auto _ : state) {
    score_candidates(m, corrected ? &corr : nullptr, pool, scores, dup);
    benchmark::DoNotOptimize(scores.data());
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_ScorePool)->Args({100000, 0})->Args({100000, 1})->Unit(benchmark::kMillisecond);

void BM_CorrectionOwner(benchmark::State& state) {
  const Data d = design(49);
  const CorrectionField f = CorrectionField::identity(d.u);
  const Eigen::Vector2d q(0.3, -0.7);
  for (auto _ : state) benchmark::DoNotOptimize(f.owner(q));
}
BENCHMARK(BM_CorrectionOwner);

}  // namespace

BENCHMARK_MAIN();
