#include <cmath>
#include <filesystem>
#include <memory>

#include <doctest.h>

#include "pckal/errors.hpp"
#include "pckal/ground_truth.hpp"
#include "pckal/normal.hpp"
#include "pckal/problems.hpp"
#include "pckal/random.hpp"
#include "pckal/records.hpp"
#include "pckal/report.hpp"
#include "pckal/study.hpp"

using namespace pckal;

namespace {

std::filesystem::path scratch(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / "pckal-unit" / name;
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

StudySpec tiny_study(const std::filesystem::path& dir) {
  StudySpec s;
  s.strategies = {"single:1", "alternate"};
  s.metrics = {LearningMetric::u, LearningMetric::u_loo};
  s.replications = 2;
  s.base_seed = 17;
  s.run.budget = 14;
  s.run.n_init = 8;
  s.run.pool_size = 2000;
  s.output_dir = dir;
  return s;
}

}  // namespace

TEST_SUITE("harness") {
  TEST_CASE("analytic limit states") {
    CHECK(g1(0.0, 1.0) == 2.0);
    CHECK(g1(0.0, 21.0) == -2.0);
    CHECK(g1(0.0, 11.0) == 0.0);
    CHECK(std::abs(g1(1.5, 2.5) - 0.95968868125765622756) < 1e-14);
    CHECK(g2(0.0, -1.0) == -0.5);
    CHECK(std::abs(g2(0.0, 1.5)) < 1e-15);
    CHECK(std::abs(g2(1.5, 2.5) - 0.734870008059867222) < 1e-14);

    RandomStream r(3, "closed-form");
    for (int i = 0; i < 10000; ++i) {
      const long double a = 1.5L + 3.0L * r.normal();
      const long double b = 2.5L + 3.0L * r.normal();
      const long double ref1 = std::sin(2.5L * a) + 2.0L - (a * a + 4.0L) * (b - 1.0L) / 20.0L;
      const long double ref2 = std::sin(2.0L * a) - 0.5L + (a * a + 4.0L) * (b + 1.0L) / 20.0L;
      const double x1 = static_cast<double>(a), x2 = static_cast<double>(b);
      CHECK(std::abs(g1(x1, x2) - ref1) <= 1e-12 * std::max(1.0L, std::abs(ref1)));
      CHECK(std::abs(g2(x1, x2) - ref2) <= 1e-12 * std::max(1.0L, std::abs(ref2)));
    }
  }

  TEST_CASE("analytic problem wiring") {
    const Problem p = two_lsf_analytic();
    CHECK(p.name == kAnalyticProblem);
    REQUIRE(p.limit_states.size() == 2);
    const Eigen::Vector2d x(0.3, 4.0);
    CHECK(p.limit_states[0].evaluate(x) == g1(0.3, 4.0));
    CHECK(p.limit_states[1].evaluate(x) == g2(0.3, 4.0));
    CHECK(p.input.marginals()[0].mu == 1.5);
    CHECK(p.input.marginals()[1].mu == 2.5);
  }

  TEST_CASE("threshold limit states differ by the threshold gap") {
    const MockPenetration mock;
    const Problem p = threshold_problem(
        "collision", collision_input(),
        [mock](const Eigen::VectorXd& x) { return mock(x[0], x[1]); }, collision_thresholds(),
        CostClass::cheap_analytic);
    const SamplePool pool = sample_mc(p.input, 10000, 4);
    for (Eigen::Index i = 0; i < pool.points.rows(); ++i) {
      const Eigen::VectorXd x = pool.points.row(i).transpose();
      const double gf = p.limit_states[0].evaluate(x);
      const double gd = p.limit_states[1].evaluate(x);
      CHECK(std::abs((gf - gd) - 1.0) <= 4e-15 * std::max(1.0, std::abs(gf)));
    }
    const Problem constant = threshold_problem(
        "constant", collision_input(), [](const Eigen::VectorXd&) { return 2.5; },
        collision_thresholds(), CostClass::cheap_analytic);
    CHECK(constant.limit_states[0].evaluate(Eigen::Vector2d(3.0, 317.0)) == 0.5);
    CHECK(constant.limit_states[1].evaluate(Eigen::Vector2d(3.0, 317.0)) == -0.5);
  }

  TEST_CASE("mock penetration surface is monotone") {
    const MockPenetration m;
    CHECK(m(3.0, 317.0) == doctest::Approx(2.2));
    CHECK(m(3.5, 317.0) > m(3.0, 317.0));
    CHECK(m(3.0, 350.0) < m(3.0, 317.0));
  }

  TEST_CASE("Monte Carlo sanity on a shifted normal") {
    const RandomInput in({{"x", 0.0, 1.0}});
    const auto e = monte_carlo_probability(
        in, [](const Eigen::VectorXd& x) { return 3.0 - x[0]; }, 2'000'000, 11);
    CHECK(std::abs(e.probability - 0.0013498980316300945) <= 3.0 * e.standard_error);
    const auto again = monte_carlo_probability(
        in, [](const Eigen::VectorXd& x) { return 3.0 - x[0]; }, 2'000'000, 11);
    CHECK(again.probability == e.probability);
  }

  TEST_CASE("ground truth guards and self-consistency") {
    const Problem p = two_lsf_analytic();
    try {
      (void)ground_truth_beta(p, 0, 1000, 1);
      FAIL("expected validation");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::validation);
    }
    Problem ext = p;
    ext.limit_states[0].cost = CostClass::expensive_external;
    try {
      (void)ground_truth_beta(ext, 0, kMinTruthSamples, 1);
      FAIL("expected unsupported_oracle");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::unsupported_oracle);
    }
    for (std::size_t j = 0; j < 2; ++j) {
      const auto a = ground_truth_beta(p, j, kMinTruthSamples, 1);
      const auto b = ground_truth_beta(p, j, kMinTruthSamples, 2);
      CHECK(std::abs(a.probability - b.probability) <= 3.0 * (a.standard_error + b.standard_error));
      CHECK(a.beta == doctest::Approx(-normal_quantile(a.probability)));
    }
  }

  TEST_CASE("truth cache") {
    const auto dir = scratch("truth");
    const auto file = dir / "sub" / "truth.json";
    TruthCache cache = TruthCache::load(file);
    CHECK(cache.entries().empty());
    cache.add({"prob", "g1", 1'000'000, 1, {0.03, 1.88, 1'000'000, 1.7e-4}});
    cache.add({"prob", "g1", 10'000'000, 1, {0.031, 1.866, 10'000'000, 5e-5}});
    cache.add({"prob", "g1", 1'000'000, 1, {0.0301, 1.879, 1'000'000, 1.7e-4}});
    CHECK(cache.entries().size() == 2);
    cache.save(file);
    const TruthCache back = TruthCache::load(file);
    REQUIRE(back.entries().size() == 2);
    CHECK(back.find("prob", "g1", 1'000'000, 1)->estimate.probability == 0.0301);
    CHECK_FALSE(back.find("prob", "g2", 1'000'000, 1).has_value());
    CHECK(back.best("prob", "g1")->n == 10'000'000);
    CHECK(back.best("prob", "g1")->estimate.beta == 1.866);
  }

  TEST_CASE("frozen truth re-verifies against a fresh oracle") {
    const TruthCache cache =
        TruthCache::load(std::filesystem::path(PCKAL_SOURCE_DIR) / "data/truth/two_lsf_analytic.json");
    const Problem p = two_lsf_analytic();
    for (std::size_t j = 0; j < 2; ++j) {
      const auto frozen = cache.best(p.name, p.limit_states[j].name);
      REQUIRE(frozen.has_value());
      CHECK(frozen->n == 10'000'000);
      const auto fresh = ground_truth_beta(p, j, 2'000'000, frozen->seed + 1);
      const double se = std::hypot(frozen->estimate.standard_error, fresh.standard_error);
      CHECK(std::abs(frozen->estimate.probability - fresh.probability) <= 3.0 * se);
    }
  }

  TEST_CASE("evolution files round trip exactly") {
    const auto dir = scratch("records");
    ActiveLearningConfig c;
    c.budget = 13;
    c.n_init = 8;
    c.pool_size = 1500;
    c.seed = 4;
    const StrategySpec s{StrategyKind::convergence_guided, 0, LearningMetric::u_loo};
    const Problem p = two_lsf_analytic();
    const RunRecord r = run_active_learning(p, s, c);
    RunInfo info;
    info.run_id = make_run_id(s, 3);
    info.problem = p.name;
    info.strategy = strategy_key(s);
    info.metric = "U-LOO";
    info.replication = 3;
    info.seed = 4;
    info.pool_size = 1500;
    info.inputs = {"x1", "x2"};
    info.limit_states = r.limit_states;
    CHECK(info.run_id == "convergence__U-LOO__r03");
    const auto path = dir / (info.run_id + ".csv");
    write_evolution(path, info, r.steps);
    const EvolutionFile back = read_evolution(path);
    CHECK(back.info.run_id == info.run_id);
    CHECK(back.info.seed == 4);
    CHECK(back.info.limit_states == info.limit_states);
    REQUIRE(back.steps.size() == r.steps.size());
    for (std::size_t k = 0; k < r.steps.size(); ++k) {
      CHECK(back.steps[k].target == r.steps[k].target);
      CHECK(back.steps[k].pool_index == r.steps[k].pool_index);
      CHECK(back.steps[k].point == r.steps[k].point);
      CHECK(back.steps[k].thetas == r.steps[k].thetas);
      CHECK(back.steps[k].estimates[1].beta == r.steps[k].estimates[1].beta);
    }
    CHECK(format_evolution(back.info, back.steps) == read_file(path));
    CHECK(make_run_id({StrategyKind::single_target, 0, LearningMetric::u}, 0) == "single-1__U__r00");
    CHECK(parse_double(format_double(0.1)) == 0.1);
    CHECK(std::isinf(parse_double(format_double(-INFINITY))));
  }

  TEST_CASE("summary statistics") {
    const std::vector<double> v = {4.0, 1.0, 3.0, 2.0};
    CHECK(quantile(v, 0.0) == 1.0);
    CHECK(quantile(v, 1.0) == 4.0);
    CHECK(quantile(v, 0.5) == 2.5);
    CHECK(quantile(v, 0.3) == doctest::Approx(1.9));
    const Summary s = summarize(v);
    CHECK(s.mean == 2.5);
    CHECK(*s.stddev == doctest::Approx(std::sqrt(5.0 / 3.0)));
    const std::vector<double> one = {0.7};
    CHECK(summarize(one).mean == 0.7);
    CHECK_FALSE(summarize(one).stddev.has_value());
    const BoxStats b = box_stats(v);
    CHECK(b.median == 2.5);
    CHECK(b.low == doctest::Approx(1.075));
    CHECK(b.high == doctest::Approx(3.925));
  }

  TEST_CASE("replication seeds are shared across strategies and distinct across reps") {
    CHECK(replication_seed(5, 0) == replication_seed(5, 0));
    CHECK(replication_seed(5, 0) != replication_seed(5, 1));
    CHECK(replication_seed(5, 0) != replication_seed(6, 0));
  }

  TEST_CASE("studies are deterministic and their reports recomputable") {
    const auto a_dir = scratch("study-a");
    const auto b_dir = scratch("study-b");
    StudySpec spec = tiny_study(a_dir);
    const auto a = run_study(two_lsf_analytic(), spec);
    spec.output_dir = b_dir;
    spec.jobs = 2;
    const auto b = run_study(two_lsf_analytic(), spec);
    REQUIRE(a.size() == 8);
    REQUIRE(b.size() == 8);
    CHECK(a[0].info.strategy == "single:1");
    CHECK(a[0].info.metric == "U");
    CHECK(a[7].info.strategy == "alternate");
    CHECK(a[7].info.metric == "U-LOO");
    CHECK(a[0].info.seed == a[2].info.seed);
    CHECK(a[0].info.seed == a[4].info.seed);

    const std::vector<double> truth = {1.8632, 1.0434};
    const StudyReport ra = build_report(a, truth);
    const StudyReport rb = build_report(b, truth);
    CHECK(render_table(ra) == render_table(rb));
    CHECK(render_summary_csv(ra) == render_summary_csv(rb));
    REQUIRE(ra.groups.size() == 4);
    CHECK(ra.groups[0].runs == 2);
    CHECK(ra.groups[0].bands.front().design_size == 8);
    CHECK(ra.groups[0].bands.back().design_size == 14);

    const StudyReport from_disk = build_report(load_records(a_dir), truth);
    CHECK(render_table(from_disk) == render_table(ra));
    CHECK(render_boxplot_csv(from_disk) == render_boxplot_csv(ra));
    for (const auto& g : ra.groups) CHECK(render_bands_csv(from_disk, g) == render_bands_csv(ra, g));

    CHECK_THROWS_AS(report_from_directory(a_dir), Error);
    TruthCache cache;
    cache.add({kAnalyticProblem, "g1", 1'000'000, 1, {0.0312, 1.8632, 1'000'000, 1e-4}});
    cache.add({kAnalyticProblem, "g2", 1'000'000, 1, {0.1484, 1.0434, 1'000'000, 1e-4}});
    cache.save(StudyLayout{a_dir}.truth_file());
    CHECK(render_table(report_from_directory(a_dir)) == render_table(ra));

    spec.output_dir = a_dir;
    spec.resume = true;
    spec.jobs = 1;
    std::size_t reused = 0;
    spec.on_run_complete = [&](const RunInfo&) { ++reused; };
    const auto again = run_study(two_lsf_analytic(), spec);
    CHECK(reused == 8);
    CHECK(render_table(build_report(again, truth)) == render_table(ra));
  }

  TEST_CASE("a single replication reports no deviation") {
    StudySpec spec = tiny_study(scratch("study-one"));
    spec.replications = 1;
    spec.strategies = {"single:2"};
    spec.metrics = {LearningMetric::u};
    const auto runs = run_study(two_lsf_analytic(), spec);
    const StudyReport r = build_report(runs, {1.8632, 1.0434});
    REQUIRE(r.groups.size() == 1);
    const auto& final_beta = runs[0].steps.back().estimates;
    CHECK(r.groups[0].beta_error[0].mean == relative_beta_error(final_beta[0].beta, 1.8632));
    CHECK_FALSE(r.groups[0].combined.stddev.has_value());
    const std::string table = render_table(r);
    CHECK(table.find("(n/a)") != std::string::npos);
    CHECK(table.find("X_g2") != std::string::npos);
  }

  TEST_CASE("strategy labels") {
    const std::vector<std::string> ls = {"g1", "g2"};
    CHECK(strategy_label("single:1", ls) == "X_g1");
    CHECK(strategy_label("alternate", ls) == "X_gj");
    CHECK(strategy_label("convergence", ls) == "X_g*j");
  }
}
