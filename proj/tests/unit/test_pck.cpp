#include <cmath>

#include <doctest.h>

#include "oracles.hpp"
#include "pckal/errors.hpp"
#include "pckal/pck.hpp"
#include "pckal/problems.hpp"
#include "pckal/random.hpp"

using namespace pckal;

namespace {

Eigen::MatrixXd random_design(Eigen::Index n, Eigen::Index dims, std::uint64_t seed,
                              double spread = 1.5) {
  RandomStream r(seed, "design");
  Eigen::MatrixXd x(n, dims);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index d = 0; d < dims; ++d) x(i, d) = spread * (2.0 * r.uniform() - 1.0);
  }
  return x;
}

Eigen::VectorXd smooth_response(const Eigen::MatrixXd& x) {
  Eigen::VectorXd y(x.rows());
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    y[i] = std::sin(2.0 * x(i, 0)) + 0.5 * x(i, 1) * x(i, 1) - 0.3 * x(i, 0) * x(i, 1);
  }
  return y;
}

ErrorCode code_of(auto&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an error");
  return ErrorCode::io;
}

}  // namespace

TEST_SUITE("pck") {
  TEST_CASE("matern52 values") {
    CHECK(matern52(0.0, 0.7) == 1.0);
    CHECK(std::abs(matern52(1.3, 1.3) - 0.523994108831820310592713250761) < 1e-15);
    double prev = 1.0;
    for (double d = 0.1; d < 60.0; d += 0.1) {
      const double r = matern52(d, 1.0);
      CHECK(r < prev);
      prev = r;
    }
    CHECK(matern52(1e3, 1.0) < 1e-300);
    CHECK(code_of([] { (void)matern52(1.0, 0.0); }) == ErrorCode::hyperparameter_domain);
    CHECK(code_of([] { (void)matern52(1.0, -2.0); }) == ErrorCode::hyperparameter_domain);
  }

  TEST_CASE("fit_given on constant data puts sigma2 at the floor") {
    const Eigen::MatrixXd x = random_design(8, 2, 1);
    const Eigen::VectorXd y = Eigen::VectorXd::Constant(8, 3.25);
    const ProfileFit f = fit_given(x, y, PceBasis(2, 0), 0.8);
    CHECK(f.coefficients[0] == doctest::Approx(3.25).epsilon(1e-12));
    CHECK(f.sigma2 <= 1e-12 * 3.25 * 3.25 * (1 + 1e-9));
    CHECK(f.sigma2 > 0.0);
  }

  TEST_CASE("fit_given on linear data absorbs the signal in the trend") {
    const Eigen::MatrixXd x = random_design(10, 2, 2);
    const Eigen::VectorXd y = (1.0 + 2.0 * x.col(0).array() - 0.5 * x.col(1).array()).matrix();
    const PceBasis basis(2, 1);
    const ProfileFit f = fit_given(x, y, basis, 1.0);
    const Eigen::VectorXd resid = y - basis.design_matrix(x) * f.coefficients;
    CHECK(resid.cwiseAbs().maxCoeff() <= 1e-8);
    CHECK(f.sigma2 <= 1e-12 * 1.01 * (y.array() - y.mean()).square().mean());
  }

  TEST_CASE("fit_given matches the dense-inverse oracle on a 12-point design") {
    const Eigen::MatrixXd x = random_design(12, 2, 3);
    const Eigen::VectorXd y = smooth_response(x);
    const PceBasis basis(2, 1);
    const ProfileFit f = fit_given(x, y, basis, 0.9);
    const auto o = oracle::dense_fit(x, y, basis, 0.9, 0.0);
    for (Eigen::Index k = 0; k < f.coefficients.size(); ++k) {
      CHECK(oracle::close(f.coefficients[k], o.coefficients[k], 1e-8, 1.0));
    }
    CHECK(oracle::close(f.sigma2, o.sigma2, 1e-8, 0.0));
    CHECK(oracle::close(f.objective, o.objective, 1e-8, 1.0));
  }

  TEST_CASE("fit_given preconditions") {
    const Eigen::MatrixXd x = random_design(6, 2, 4);
    const Eigen::VectorXd y = smooth_response(x);
    CHECK(code_of([&] { (void)fit_given(x, y, PceBasis(2, 2), 1.0); }) ==
          ErrorCode::underdetermined_trend);
    CHECK(code_of([&] { (void)fit_given(x, y, PceBasis(2, 0), 0.0); }) ==
          ErrorCode::hyperparameter_domain);
  }

  TEST_CASE("maximum likelihood recovers the scale of a Matern draw") {
    const Eigen::Index n = 60;
    const Eigen::MatrixXd x = random_design(n, 2, 5, 2.0);
    Eigen::MatrixXd r(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
      for (Eigen::Index j = 0; j < n; ++j) r(i, j) = matern52((x.row(i) - x.row(j)).norm(), 0.8);
    }
    r.diagonal().array() += 1e-10;
    const Eigen::MatrixXd l = r.llt().matrixL();
    RandomStream rng(5, "gp-draw");
    Eigen::VectorXd z(n);
    for (Eigen::Index i = 0; i < n; ++i) z[i] = rng.normal();
    const Eigen::VectorXd y = l * z;
    const PckModel m = fit(x, y, PceBasis(2, 0));
    CHECK(m.kernel().theta >= 0.4);
    CHECK(m.kernel().theta <= 1.6);
  }

  TEST_CASE("a duplicated point escalates the nugget and still fits") {
    Eigen::MatrixXd x = random_design(10, 2, 6);
    x.row(9) = x.row(3);
    Eigen::VectorXd y = smooth_response(x);
    const PckModel m = fit(x, y, PceBasis(2, 0));
    CHECK(m.kernel().nugget > 0.0);
    CHECK(std::abs(m.loo().errors[3]) < 1e-3 * y.cwiseAbs().maxCoeff());
    CHECK(std::abs(m.loo().errors[9]) < 1e-3 * y.cwiseAbs().maxCoeff());
  }

  TEST_CASE("eleven LHS points on g1 give a well-posed fit") {
    const RandomInput in = analytic_input();
    const auto lhs = sample_lhs(in, 11, 7);
    const Eigen::MatrixXd u = in.to_standard_rows(lhs.points);
    Eigen::VectorXd y(11);
    for (int i = 0; i < 11; ++i) y[i] = g1(lhs.points(i, 0), lhs.points(i, 1));
    const PckModel m = fit(u, y, PceBasis(2, 1));
    const auto held = sample_mc(in, 20, 8);
    for (Eigen::Index i = 0; i < held.points.rows(); ++i) {
      const Prediction p = m.predict(in.to_standard(held.points.row(i).transpose()));
      CHECK(std::isfinite(p.mean));
      CHECK(p.stddev > 0.0);
    }
  }

  TEST_CASE("interpolation at training points") {
    for (std::uint64_t seed = 10; seed < 15; ++seed) {
      const Eigen::MatrixXd x = random_design(15, 2, seed);
      const Eigen::VectorXd y = smooth_response(x);
      const PckModel m = fit_fixed(x, y, PceBasis(2, 1), KernelSpec{0.7, 0.0});
      for (Eigen::Index s = 0; s < x.rows(); ++s) {
        const Prediction p = m.predict(x.row(s).transpose());
        CHECK(std::abs(p.mean - y[s]) <= 1e-8 * (1.0 + std::abs(y[s])));
        CHECK(p.stddev <= 1e-4 * std::sqrt(m.sigma2()));
        CHECK(p.variance() <= 1e-8 * m.sigma2());
      }
    }
  }

  TEST_CASE("far from the data the variance reaches the process variance") {
    const Eigen::MatrixXd x = random_design(12, 2, 16);
    const PckModel m = fit(x, smooth_response(x), PceBasis(2, 1));
    const Prediction p = m.predict(Eigen::Vector2d(80.0, -60.0));
    CHECK(p.variance() >= m.sigma2() - 1e-6 * m.sigma2());
  }

  TEST_CASE("predictions match the dense-inverse oracle at 50 random points") {
    const Eigen::MatrixXd x = random_design(20, 2, 17);
    const Eigen::VectorXd y = smooth_response(x);
    const PckModel m = fit(x, y, PceBasis(2, 2));
    const auto o = oracle::dense_fit(x, y, m.basis(), m.kernel().theta, m.kernel().nugget);
    const Eigen::MatrixXd q = random_design(50, 2, 18, 2.5);
    for (Eigen::Index i = 0; i < q.rows(); ++i) {
      const Prediction p = m.predict(q.row(i).transpose());
      const auto d = oracle::dense_predict(o, q.row(i).transpose());
      CHECK(oracle::close(p.mean, d.mean, 1e-8, y.cwiseAbs().maxCoeff()));
      CHECK(oracle::close(p.variance(), d.variance, 1e-8, m.sigma2()));
    }
  }

  TEST_CASE("batched prediction equals pointwise prediction") {
    const Eigen::MatrixXd x = random_design(14, 2, 19);
    const PckModel m = fit(x, smooth_response(x), PceBasis(2, 1));
    const Eigen::MatrixXd q = random_design(30, 2, 20, 2.0);
    Eigen::MatrixXd d(14, 30);
    for (int i = 0; i < 14; ++i) {
      for (int j = 0; j < 30; ++j) d(i, j) = (x.row(i) - q.row(j)).norm();
    }
    // Wider trend block than the model needs: only the leading columns are read.
    const Eigen::MatrixXd trend = PceBasis(2, 4).design_matrix(q);
    Eigen::VectorXd mean, var;
    m.predict_batch(trend, d, mean, &var);
    for (int j = 0; j < 30; ++j) {
      const Prediction p = m.predict(q.row(j).transpose());
      CHECK(mean[j] == doctest::Approx(p.mean).epsilon(1e-12));
      CHECK(var[j] == doctest::Approx(p.variance()).epsilon(1e-10).scale(m.sigma2()));
    }
  }

  TEST_CASE("standard deviation is never negative or NaN") {
    const Eigen::MatrixXd x = random_design(25, 2, 21);
    const PckModel m = fit(x, smooth_response(x), PceBasis(2, 2));
    RandomStream r(21, "queries");
    for (int i = 0; i < 100000; ++i) {
      const Eigen::Vector2d u(4.0 * r.normal(), 4.0 * r.normal());
      const Prediction p = m.predict(u);
      CHECK_FALSE(std::isnan(p.stddev));
      CHECK(p.stddev >= 0.0);
    }
  }

  TEST_CASE("accepted objective values never increase across starts") {
    const Eigen::MatrixXd x = random_design(18, 2, 22);
    const PckModel m = fit(x, smooth_response(x), PceBasis(2, 1));
    const auto& trace = m.search_trace();
    REQUIRE(trace.size() == 5);
    for (std::size_t i = 1; i < trace.size(); ++i) CHECK(trace[i] <= trace[i - 1]);
    CHECK(trace.back() == doctest::Approx(m.objective()));
  }

  TEST_CASE("LOO is zero when the trend reproduces the data") {
    const Eigen::MatrixXd x = random_design(10, 2, 23);
    const Eigen::VectorXd y = (0.5 - x.col(0).array() + 3.0 * x.col(1).array()).matrix();
    const PckModel m = fit(x, y, PceBasis(2, 1));
    CHECK(m.loo().errors.cwiseAbs().maxCoeff() < 1e-8);
    CHECK(m.loo().eps <= 1e-10);
  }

  TEST_CASE("closed-form LOO matches literal delete-one refits") {
    for (std::uint64_t seed = 30; seed < 34; ++seed) {
      const Eigen::MatrixXd x = random_design(12, 2, seed);
      const Eigen::VectorXd y = smooth_response(x);
      const PckModel m = fit(x, y, PceBasis(2, 1));
      const auto lit =
          oracle::literal_loo(x, y, m.basis(), m.kernel().theta, m.kernel().nugget);
      const double scale = y.cwiseAbs().maxCoeff();
      for (Eigen::Index s = 0; s < 12; ++s) {
        CHECK(oracle::close(m.loo().errors[s], lit.errors[s], 1e-8, scale));
        CHECK(oracle::close(m.loo().variances[s], lit.variances[s], 1e-8, m.sigma2()));
      }
      CHECK(oracle::close(m.loo().eps, lit.eps, 1e-8, scale * scale));
      const LooDiagnostics again = loo_diagnostics(m);
      CHECK(again.errors == m.loo().errors);
    }
  }

  TEST_CASE("LOO needs two points beyond the trend size") {
    const Eigen::MatrixXd x = random_design(4, 2, 35);
    CHECK(code_of([&] {
            (void)fit_fixed(x, smooth_response(x), PceBasis(2, 1), KernelSpec{1.0, 0.0});
          }) == ErrorCode::underdetermined_trend);
  }

  TEST_CASE("degree selection recovers a quadratic trend") {
    int hits = 0;
    for (std::uint64_t seed = 0; seed < 15; ++seed) {
      const RandomInput in({{"a", 0.0, 1.0}, {"b", 0.0, 1.0}});
      const Eigen::MatrixXd x = sample_lhs(in, 25, 100 + seed).points;
      const Eigen::VectorXd y = (1.0 + x.col(0).array() + 0.5 * x.col(0).array().square() -
                                 x.col(0).array() * x.col(1).array() +
                                 0.3 * x.col(1).array().square())
                                    .matrix();
      if (select_model(x, y, DegreeRange{0, 4}).basis().degree() >= 2) ++hits;
    }
    CHECK(hits >= 13);
  }

  TEST_CASE("admissibility follows N > |A| + 1") {
    const Eigen::MatrixXd x4 = random_design(4, 2, 40);
    CHECK(select_model(x4, smooth_response(x4), DegreeRange{0, 3}).basis().degree() == 0);
    const Eigen::MatrixXd x5 = random_design(5, 2, 41);
    const Eigen::VectorXd y5 = (2.0 * x5.col(0).array() + x5.col(1).array()).matrix();
    CHECK(select_model(x5, y5, DegreeRange{0, 3}).basis().degree() == 1);
    CHECK(code_of([&] {
            (void)select_model(x4, smooth_response(x4), DegreeRange{1, 3});
          }) == ErrorCode::underdetermined_trend);
  }

  TEST_CASE("constant data selects degree zero") {
    const Eigen::MatrixXd x = random_design(20, 2, 42);
    const PckModel m = select_model(x, Eigen::VectorXd::Constant(20, -1.5), DegreeRange{0, 4});
    CHECK(m.basis().degree() == 0);
  }

  TEST_CASE("JSON round trip predicts bit-identically") {
    const Eigen::MatrixXd x = random_design(16, 2, 43);
    const PckModel m = select_model(x, smooth_response(x), DegreeRange{0, 3});
    const PckModel back = model_from_json(to_json(m));
    CHECK(back.kernel().theta == m.kernel().theta);
    CHECK(back.loo().errors == m.loo().errors);
    const Eigen::MatrixXd q = random_design(40, 2, 44, 3.0);
    for (Eigen::Index i = 0; i < q.rows(); ++i) {
      const Prediction a = m.predict(q.row(i).transpose());
      const Prediction b = back.predict(q.row(i).transpose());
      CHECK(a.mean == b.mean);
      CHECK(a.stddev == b.stddev);
    }
    CHECK(to_json(back) == to_json(m));
    CHECK_THROWS_AS((void)model_from_json("{\"format\": \"other\"}"), Error);
  }
}
