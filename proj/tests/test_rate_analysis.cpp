#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "sgdrates/rate_analysis.hpp"

using namespace sgdrates;

namespace {

ProblemSpec spec_of(double gamma_alpha, double nu, double xi = 1.0) {
  return ProblemSpec(1.0, gamma_alpha, nu, {xi}, NoiseModel::two_point({0.0}, {1.0}));
}

ErrorCurve power_curve(double c, double p, unsigned k_max) {
  ErrorCurve curve(CurveMeaning::ExactMSE);
  for (auto n : dyadic_checkpoints(k_max)) curve.push(n, c * std::pow(static_cast<double>(n), p));
  return curve;
}

}  // namespace

TEST_CASE("rate band by regime") {
  const auto slow = theoretical_rate_band(spec_of(1.0, 0.5), 0.05);
  CHECK(slow.regime == Regime::SlowDecay);
  CHECK(slow.r0 == 0.25);
  CHECK(slow.r1 == 0.25);
  CHECK(slow.mse_upper_exponent() == 0.5);

  const auto small = theoretical_rate_band(spec_of(0.3, 1.0), 0.05);
  CHECK(small.regime == Regime::FastSmallStep);
  CHECK(small.r0 == doctest::Approx(0.35));
  CHECK(small.r1 == doctest::Approx(0.25));

  const auto large = theoretical_rate_band(spec_of(2.0, 1.0), 0.05);
  CHECK(large.regime == Regime::FastLargeStep);
  CHECK(large.r0 == 0.5);
  CHECK(large.r1 == 0.5);

  const auto vf = theoretical_rate_band(spec_of(1.0, 2.0), 0.05);
  CHECK(vf.regime == Regime::VeryFast);
  CHECK(vf.r0 == 0.0);
  CHECK(vf.r1 == 0.0);

  CHECK(to_string(Regime::FastSmallStep) == "FastSmallStep");
  CHECK_THROWS(theoretical_rate_band(spec_of(1.0, 1.0), 0.0));
}

TEST_CASE("band widens monotonically in epsilon") {
  const auto spec = spec_of(0.3, 1.0);
  double prev_r0 = 0.0, prev_r1 = 1.0;
  for (double eps : {0.01, 0.02, 0.05, 0.1}) {
    const auto b = theoretical_rate_band(spec, eps);
    CHECK(b.r1 <= b.r0);
    CHECK(b.r0 >= prev_r0);
    CHECK(b.r1 <= prev_r1);
    prev_r0 = b.r0;
    prev_r1 = b.r1;
  }
}

TEST_CASE("boundary detection") {
  CHECK(is_boundary_case(spec_of(0.5, 1.0)));
  CHECK_FALSE(is_boundary_case(spec_of(0.5, 0.9)));
  CHECK_FALSE(is_boundary_case(spec_of(0.6, 1.0)));
}

TEST_CASE("log-log fit recovers known power laws") {
  const auto a = fit_log_log_slope(power_curve(4.0, -0.5, 20));
  CHECK(a.slope == doctest::Approx(-0.5).epsilon(1e-12));
  CHECK(a.intercept == doctest::Approx(std::log(4.0)).epsilon(1e-12));
  CHECK(a.rms_residual < 1e-12);
  CHECK(a.window.n_max == (1u << 20));
  CHECK(a.num_points == 10);

  const auto flat = fit_log_log_slope(power_curve(0.3, 0.0, 12));
  CHECK(std::abs(flat.slope) < 1e-12);

  const auto spec = spec_of(1.0, 1.0, 0.0);
  CHECK(fit_log_log_slope(exact_mse_curve(spec, dyadic_checkpoints(16))).slope ==
        doctest::Approx(-1.0).epsilon(1e-9));
}

TEST_CASE("fit rejects short curves and zero values") {
  CHECK_THROWS(fit_log_log_slope(power_curve(1.0, -1.0, 4)));
  ErrorCurve zeros(CurveMeaning::ExactMSE);
  for (auto n : dyadic_checkpoints(10)) zeros.push(n, 0.0);
  CHECK_THROWS(fit_log_log_slope(zeros));
  CHECK_THROWS(fit_log_log_slope(power_curve(1.0, -1.0, 10), FitWindow{1, 8}));
}

TEST_CASE("classification on exact curves") {
  const auto cps = dyadic_checkpoints(22);
  struct Row {
    double ga, nu, xi;
    Verdict want;
    double expected_exponent;
  };
  const Row rows[] = {
      {1.0, 0.5, 1.0, Verdict::Pass, 0.5},   {2.0, 1.0, 1.0, Verdict::Pass, 1.0},
      {0.25, 1.0, 0.0, Verdict::Pass, 0.5},  {0.5, 1.0, 1.0, Verdict::Boundary, 1.0},
      {1.0, 2.0, 1.0, Verdict::Pass, 0.0},   {5.0, 1.0, 1.0, Verdict::Pass, 1.0},
  };
  for (const auto& r : rows) {
    CAPTURE(r.ga);
    CAPTURE(r.nu);
    const auto spec = spec_of(r.ga, r.nu, r.xi);
    const auto rep = classify_regime(spec, exact_mse_curve(spec, cps), 0.05);
    CHECK(rep.verdict == r.want);
    CHECK(rep.fitted_mse_exponent == doctest::Approx(r.expected_exponent).epsilon(0.1));
  }
}

TEST_CASE("classification flags a wrong-rate curve") {
  const auto spec = spec_of(2.0, 1.0);
  const auto rep = classify_regime(spec, power_curve(1.0, -0.6, 22), 0.05);
  CHECK(rep.verdict == Verdict::Fail);
}

TEST_CASE("classification needs four decades") {
  const auto spec = spec_of(1.0, 1.0);
  CHECK_THROWS_WITH(classify_regime(spec, exact_mse_curve(spec, dyadic_checkpoints(12)), 0.05),
                    doctest::Contains("curve too short"));
}

TEST_CASE("very fast decay flags a vanishing curve") {
  const auto spec = spec_of(1.0, 2.0);
  ErrorCurve zeros(CurveMeaning::ExactMSE);
  for (auto n : dyadic_checkpoints(20)) zeros.push(n, n < 1000 ? 1.0 : 0.0);
  CHECK_THROWS(classify_regime(spec, zeros, 0.05));
}

TEST_CASE("schedule diagnostic") {
  const auto one = schedule_diagnostic(1.0, 1.0, 1000);
  for (const auto& [l, d] : one.values) CHECK(d == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(schedule_diagnostic(2.0, 1.0, 100000).tail_estimate == doctest::Approx(1.5).epsilon(1e-4));
  CHECK(std::abs(schedule_diagnostic(0.5, 1.0, 100000).tail_estimate) < 1e-4);
  const auto slow = schedule_diagnostic(1.0, 0.5, 100000);
  CHECK(slow.tail_estimate > 1.9);
  CHECK(slow.tail_estimate < 2.0);
  CHECK_THROWS(schedule_diagnostic(1.0, 1.0, 1));
}

TEST_CASE("exponential limit and logarithm inequality") {
  const auto r = exp_limit_check(1.0, 1e6);
  CHECK(r.target == doctest::Approx(std::exp(1.0)));
  CHECK(r.gap < 1.5e-6);
  CHECK(exp_limit_check(-1.0, 1e3).gap < 2e-4);
  CHECK_THROWS(exp_limit_check(-2.0, 1.0));
  for (double x : {1e-6, 0.1, 0.5, 1.0, 2.0, 10.0, 1e6}) CHECK(log_inequality_check(x));
  CHECK_THROWS(log_inequality_check(0.0));
}

TEST_CASE("deterministic lower bound") {
  const auto cps = dyadic_checkpoints(20);
  const ProblemSpec spec(1.0, 0.7, 1.0, {2.0}, NoiseModel::point_mass({0.0}));
  const auto rep = deterministic_lb_check({spec, {0.0}, 0.0}, 0.05, cps);
  CHECK(rep.pass);
  CHECK(rep.tail_min > 0.0);
  CHECK(rep.tail_non_decreasing);

  const ProblemSpec integer(1.0, 2.0, 1.0, {2.0}, NoiseModel::point_mass({0.0}));
  CHECK_THROWS_WITH(deterministic_lb_check({integer, {0.0}, 0.0}, 0.05, cps),
                    doctest::Contains("hypothesis failed"));
  const ProblemSpec wrong_nu(1.0, 0.7, 0.8, {2.0}, NoiseModel::point_mass({0.0}));
  CHECK_THROWS_WITH(deterministic_lb_check({wrong_nu, {0.0}, 0.0}, 0.05, cps),
                    doctest::Contains("nu = 1"));
  const ProblemSpec at_target(1.0, 0.7, 1.0, {0.0}, NoiseModel::point_mass({0.0}));
  CHECK_THROWS_WITH(deterministic_lb_check({at_target, {0.0}, 0.0}, 0.05, cps),
                    doctest::Contains("hypothesis failed"));
}
