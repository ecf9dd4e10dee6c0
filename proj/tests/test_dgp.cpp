#include <doctest.h>

#include <cmath>
#include <random>

#include <boost/math/distributions/normal.hpp>
#include <boost/math/distributions/students_t.hpp>

#include "sentinel/dgp.hpp"
#include "sentinel/errors.hpp"
#include "support/oracles.hpp"

using namespace sentinel;

namespace {

double phi_inv(double p) { return boost::math::quantile(boost::math::normal_distribution<double>(), p); }

Eigen::Matrix2d cov(double sx, double sy, double rho) {
  Eigen::Matrix2d h;
  h << sx * sx, rho * sx * sy, rho * sx * sy, sy * sy;
  return h;
}

}  // namespace

TEST_CASE("t quantiles") {
  CHECK(student_t_quantile(0.5, 5.0, true) == doctest::Approx(0.0));
  CHECK(student_t_quantile(0.95, kGaussianDof, true) == doctest::Approx(1.644854).epsilon(1e-6));
  CHECK(student_t_quantile(0.975, 5.0, true) == doctest::Approx(2.570582 * std::sqrt(0.6)).epsilon(1e-6));
  CHECK(student_t_quantile(0.975, 5.0, false) == doctest::Approx(2.570582).epsilon(1e-6));
  CHECK_THROWS_AS(student_t_quantile(1.0, 5.0, true), InputError);
  CHECK_THROWS_AS(student_t_quantile(0.9, 2.0, true), InputError);
}

TEST_CASE("closed-form t CDF agrees with the incomplete beta route") {
  for (int nu = 1; nu <= 40; ++nu) {
    boost::math::students_t_distribution<double> t(nu);
    for (double x = -12.0; x <= 12.0; x += 0.37) {
      const double want = boost::math::cdf(t, x);
      CHECK(detail::t_cdf_integer(x, nu) == doctest::Approx(want).epsilon(1e-13));
    }
  }
  boost::math::students_t_distribution<double> t(4.5);
  CHECK(student_t_cdf(1.3, 4.5) == doctest::Approx(boost::math::cdf(t, 1.3)).epsilon(1e-14));
  CHECK(student_t_cdf(0.4, kGaussianDof) == doctest::Approx(0.6554217416103242));
  CHECK(unit_t_cdf(student_t_quantile(0.9, 5.0, true), 5.0) == doctest::Approx(0.9).epsilon(1e-12));
}

TEST_CASE("bivariate tail closed cases") {
  const double q = phi_inv(0.95);
  CHECK(bivariate_t_upper_tail(q, q, 0.0, kGaussianDof) == doctest::Approx(0.0025).epsilon(1e-9));
  CHECK(bivariate_t_upper_tail(q, q, 1.0, kGaussianDof) == doctest::Approx(0.05).epsilon(1e-12));
  const double qt = student_t_quantile(0.95, 5.0, true);
  CHECK(bivariate_t_upper_tail(qt, qt, 0.999999, 5.0) == doctest::Approx(0.05).epsilon(1e-3));
  CHECK(bivariate_t_upper_tail(-INFINITY, qt, 0.3, 5.0) == doctest::Approx(0.05).epsilon(1e-12));
  CHECK(bivariate_t_upper_tail(INFINITY, qt, 0.3, 5.0) == 0.0);
  CHECK(bivariate_t_upper_tail(0.5, -0.5, -1.0, kGaussianDof) == doctest::Approx(0.0));
  CHECK(bivariate_t_upper_tail(0.5, -1.5, -1.0, kGaussianDof) ==
        doctest::Approx(boost::math::cdf(boost::math::normal_distribution<double>(), 1.5) -
                        boost::math::cdf(boost::math::normal_distribution<double>(), 0.5)));
  CHECK_THROWS_AS(bivariate_t_upper_tail(0, 0, 1.2, 5.0), InputError);
}

TEST_CASE("bivariate tail against Monte Carlo") {
  const auto c = oracle::bivariate_tail_mc_check(2000000, 21);
  INFO(c.detail);
  CHECK(c.pass);
}

TEST_CASE("bivariate tail respects Frechet bounds, symmetry and monotonicity") {
  const double rhos[] = {-0.9, -0.4, 0.0, 0.5, 0.95};
  for (double nu : {5.0, kGaussianDof}) {
    for (double rho : rhos) {
      for (int i = 0; i < 10; ++i) {
        const double a = -2.0 + 0.45 * i;
        for (int j = 0; j < 10; ++j) {
          const double b = -2.0 + 0.45 * j;
          const double p = bivariate_t_upper_tail(a, b, rho, nu);
          const double pa = 1.0 - unit_t_cdf(a, nu);
          const double pb = 1.0 - unit_t_cdf(b, nu);
          CHECK(p >= std::max(0.0, pa + pb - 1.0) - 1e-12);
          CHECK(p <= std::min(pa, pb) + 1e-12);
          CHECK(p == doctest::Approx(bivariate_t_upper_tail(b, a, rho, nu)).epsilon(1e-11));
          CHECK(bivariate_t_upper_tail(a + 0.1, b, rho, nu) <= p + 1e-12);
          CHECK(bivariate_t_upper_tail(a, b + 0.1, rho, nu) <= p + 1e-12);
        }
      }
    }
  }
}

TEST_CASE("CoVaR forecasts") {
  const RiskLevels l{0.9, 0.95};
  SUBCASE("independence factorizes") {
    CHECK(covar_forecast(cov(1.3, 2.0, 0.0), kGaussianDof, l) == doctest::Approx(2.0 * phi_inv(0.9)).epsilon(1e-9));
    CHECK(rcovar_forecast(cov(1.3, 2.0, 0.0), kGaussianDof, l) == doctest::Approx(1.3 * phi_inv(0.9)).epsilon(1e-9));
  }
  SUBCASE("comonotone pair") {
    const RiskLevels e{0.9, 0.9};
    CoVaRSolver solver(5.0, e);
    const double c = solver.solve(1.0);
    std::mt19937_64 rng(22);
    oracle::PairSampler draw(0.0, 5.0);
    const double q = solver.var_quantile();
    const std::size_t n = 1000000;
    std::size_t hits = 0;
    for (std::size_t i = 0; i < n; ++i) {
      const double x = draw(rng).first;
      hits += x > q && x > c;
    }
    const double p = 0.01;
    CHECK(std::abs(static_cast<double>(hits) / n - p) <= 4.0 * std::sqrt(p * (1 - p) / n));
    CHECK(solver.solve(0.999) == doctest::Approx(c).epsilon(1e-2));
  }
  SUBCASE("self-consistency under the forecast law") {
    const auto c = oracle::covar_self_consistency_check(1000000, 23);
    INFO(c.detail);
    CHECK(c.pass);
  }
  SUBCASE("table start and cold start agree") {
    CoVaRSolver solver(5.0, l);
    const double cold = student_t_quantile(l.alpha, 5.0, true);
    const double q = solver.var_quantile();
    const double target = (1.0 - l.alpha) * (1.0 - l.beta);
    for (double rho = -0.95; rho < 0.96; rho += 0.137) {
      const double warm = solver.solve(rho);
      const double from_cold = solver.solve_from(rho, cold);
      CHECK(std::abs(bivariate_t_upper_tail(q, warm, rho, 5.0) - target) <= 1e-10);
      CHECK(std::abs(bivariate_t_upper_tail(q, from_cold, rho, 5.0) - target) <= 1e-10);
      // Both roots meet |f| <= 1e-10 and |f'| stays above 1e-3 here.
      CHECK(std::abs(warm - from_cold) <= 2e-7);
    }
  }
  SUBCASE("reverse CoVaR swaps the roles") {
    const auto h = cov(1.5, 0.7, 0.4);
    Eigen::Matrix2d swapped;
    swapped << h(1, 1), h(0, 1), h(0, 1), h(0, 0);
    CHECK(rcovar_forecast(h, 5.0, l) == covar_forecast(swapped, 5.0, l));
    const auto sym = cov(1.1, 1.1, 0.6);
    CHECK(rcovar_forecast(sym, 5.0, l) == covar_forecast(sym, 5.0, l));
  }
  SUBCASE("degenerate inputs") {
    CHECK_THROWS_AS(covar_forecast(cov(0.0, 1.0, 0.5), 5.0, l), InputError);
    CHECK_THROWS_AS(CoVaRSolver(5.0, {0.0, 0.9}), InputError);
  }
}

TEST_CASE("tail PITs") {
  const RiskLevels l{0.9, 0.9};
  const auto h = cov(1.0, 2.0, 0.5);
  CHECK(tail_pit(-1e6, 0.3, h, 5.0, l).pit_tail == doctest::Approx(0.0).epsilon(1e-9));
  CHECK(tail_pit(1e6, 0.3, h, 5.0, l).pit_tail == doctest::Approx(1.0).epsilon(1e-9));
  const auto g = cov(1.0, 2.0, 0.0);
  for (double y : {-1.0, 0.3, 2.5}) {
    const auto pit = tail_pit(y, 0.7, g, kGaussianDof, l);
    CHECK(pit.pit_tail == doctest::Approx(boost::math::cdf(boost::math::normal_distribution<double>(), y / 2.0)).epsilon(1e-9));
    CHECK(pit.pit_x == doctest::Approx(boost::math::cdf(boost::math::normal_distribution<double>(), 0.7)).epsilon(1e-12));
  }
}

TEST_CASE("DCC parameters") {
  const auto p = baseline_params(3);
  CHECK(p.k_plus_1 == 4);
  CHECK(p.q_bar(0, 1) == 0.5);
  CHECK_NOTHROW(validate(p));
  auto bad = p;
  bad.beta_g[1] = 0.95;
  CHECK_THROWS_AS(validate(bad), ConfigError);
  bad = p;
  bad.nu = 2.0;
  CHECK_THROWS_AS(validate(bad), ConfigError);
  bad = p;
  bad.q_bar(0, 1) = bad.q_bar(1, 0) = 1.5;
  CHECK_THROWS_AS(validate(bad), ConfigError);
  CHECK_THROWS_AS(validate(BreakSpec{10, 0.95}, p), ConfigError);

  const auto round = dcc_params_from_json(nlohmann::json::parse(to_json(p).dump()));
  CHECK(to_json(round) == to_json(p));
  const auto j = nlohmann::json::parse(R"({"k_plus_1": 3, "omega_g": 0.2, "alpha_g": 0.05, "beta_g": [0.9, 0.8, 0.7],
    "alpha_q": 0.02, "beta_q": 0.95, "nu": "inf", "q_bar": 0.3, "break": {"t_star": 100, "beta_post": 0.9}})");
  const auto q = dcc_params_from_json(j);
  CHECK(q.omega_g[2] == 0.2);
  CHECK(q.beta_g[1] == 0.8);
  CHECK(std::isinf(q.nu));
  CHECK(q.q_bar(2, 0) == 0.3);
  const auto brk = break_from_json(j);
  REQUIRE(brk);
  CHECK(brk->t_star == 100);
  CHECK_THROWS_AS(dcc_params_from_json(nlohmann::json::parse(R"({"k_plus_1": 2})")), SchemaError);
}

TEST_CASE("degenerate recursions") {
  auto p = baseline_params(2);
  p.alpha_g.setZero();
  p.beta_g.setZero();
  p.alpha_q = 0.0;
  p.beta_q = 0.0;
  Engine rng(31);
  const auto sim = simulate_dcc(p, std::nullopt, 200, 50, rng);
  for (const auto& c : sim.truth) {
    CHECK((c.d.array() == std::sqrt(0.1)).all());
    CHECK(c.r == p.q_bar);
  }

  auto ccc = baseline_params(2);
  ccc.alpha_q = 0.0;
  ccc.beta_q = 0.0;
  Engine rng2(32);
  const auto sim2 = simulate_dcc(ccc, std::nullopt, 200, 50, rng2);
  for (const auto& c : sim2.truth) CHECK(c.r == sim2.truth.front().r);
}

TEST_CASE("baseline simulation") {
  const auto p = baseline_params(2);
  Engine rng(33);
  const std::size_t n = 100000;
  const auto sim = simulate_dcc(p, std::nullopt, n, 500, rng);
  double s01 = 0, s00 = 0, s11 = 0, m0 = 0, m1 = 0;
  bool unit_diag = true;
  bool pd = true;
  for (std::size_t t = 0; t < n; ++t) {
    const auto& c = sim.truth[t];
    unit_diag = unit_diag && (c.r.diagonal().array() == 1.0).all();
    pd = pd && Eigen::LLT<Eigen::MatrixXd>(c.h()).info() == Eigen::Success;
    const double e0 = sim.returns[t].x / c.d[0];
    const double e1 = sim.returns[t].y[0] / c.d[1];
    m0 += e0;
    m1 += e1;
    s00 += e0 * e0;
    s11 += e1 * e1;
    s01 += e0 * e1;
  }
  CHECK(unit_diag);
  CHECK(pd);
  m0 /= n;
  m1 /= n;
  const double v0 = s00 / n - m0 * m0;
  const double v1 = s11 / n - m1 * m1;
  const double corr = (s01 / n - m0 * m1) / std::sqrt(v0 * v1);
  CHECK(std::abs(corr - 0.5) < 0.05);
  CHECK(std::abs(v0 - 1.0) < 0.05);
  CHECK(sim.returns.front().t == 1);
  CHECK(sim.returns.back().t == static_cast<std::int64_t>(n));
}

TEST_CASE("the forecaster reproduces the simulator's filter") {
  for (std::size_t burnin : {0, 300}) {
    const auto p = baseline_params(3);
    Engine rng(34);
    const auto sim = simulate_dcc(p, std::nullopt, 400, burnin, rng);
    Forecaster fc(p, sim.presample, MeasureKind::CoVaR, {0.9, 0.9});
    for (std::size_t t = 0; t < sim.returns.size(); ++t) {
      const auto cur = fc.current();
      CHECK(cur.d == sim.truth[t].d);
      CHECK(cur.r == sim.truth[t].r);
      fc.update(sim.returns[t]);
    }
  }
}

TEST_CASE("a break changes the path only after t*") {
  const auto p = baseline_params(1);
  Engine a(35);
  Engine b(35);
  const auto plain = simulate_dcc(p, std::nullopt, 200, 100, a);
  const auto broken = simulate_dcc(p, BreakSpec{120, 0.85}, 200, 100, b);
  for (std::size_t t = 0; t < 120; ++t) CHECK(plain.returns[t].x == broken.returns[t].x);
  CHECK(plain.returns[120].x != broken.returns[120].x);
  Engine c(36);
  CHECK_THROWS_AS(simulate_dcc(p, BreakSpec{500, 0.85}, 200, 100, c), ConfigError);
}

TEST_CASE("forecast records per measure") {
  const auto p = baseline_params(2);
  Engine rng(37);
  const auto sim = simulate_dcc(p, std::nullopt, 50, 100, rng);
  const RiskLevels l{0.9, 0.9};
  const auto cov_fc = make_forecast_panel(p, sim.presample, sim.returns, MeasureKind::CoVaR, l);
  CHECK(cov_fc.size() == 50);
  CHECK(cov_fc[0].var_hat.size() == 1);
  CHECK(cov_fc[0].sys_hat.size() == 2);
  const auto rev = make_forecast_panel(p, sim.presample, sim.returns, MeasureKind::RCoVaR, l);
  CHECK(rev[0].var_hat.size() == 2);
  const auto pit = make_forecast_panel(p, sim.presample, sim.returns, MeasureKind::MES, {0.0, 0.9});
  REQUIRE(pit[0].pit_x);
  CHECK(pit[0].pit_tail.size() == 2);

  // VaR forecast is the conditional standard deviation times the unit-variance quantile.
  Forecaster f(p, sim.presample, MeasureKind::CoVaR, l);
  const double sd = f.current().d[0];
  CHECK(f.forecast(sim.returns[0]).var_hat[0] == doctest::Approx(sd * student_t_quantile(0.9, 5.0, true)));

  // Lazy forecasts only skip values that cannot change the evidence.
  Forecaster eager(p, sim.presample, MeasureKind::CoVaR, l);
  Forecaster lazy(p, sim.presample, MeasureKind::CoVaR, l, true);
  for (const auto& obs : sim.returns) {
    const auto a = eager.forecast(obs);
    const auto b = lazy.forecast(obs);
    CHECK(step_evidence(obs, a, MeasureKind::CoVaR, l).evidence == step_evidence(obs, b, MeasureKind::CoVaR, l).evidence);
    eager.update(obs);
    lazy.update(obs);
  }
}
