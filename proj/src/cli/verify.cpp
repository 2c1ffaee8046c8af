#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "sgdrates/cli/commands.hpp"
#include "sgdrates/exact_error.hpp"
#include "sgdrates/format.hpp"
#include "sgdrates/rate_analysis.hpp"

namespace sgdrates::cli {

namespace {

std::string sci(double x) {
  std::ostringstream s;
  s.precision(3);
  s << std::scientific << x;
  return s.str();
}

CheckResult check(std::string name, std::string statement, bool passed, std::string margin) {
  return {std::move(name), std::move(statement), passed, std::move(margin)};
}

Vector random_vector(std::mt19937_64& rng, std::size_t dim, double lo, double hi) {
  std::uniform_real_distribution<double> u(lo, hi);
  Vector v(dim);
  for (double& x : v) x = u(rng);
  return v;
}

ProblemSpec two_point_spec(double gamma_alpha, double nu, double xi, double offset = 1.0) {
  return ProblemSpec(1.0, gamma_alpha, nu, {xi}, NoiseModel::two_point({0.0}, {offset}));
}

CheckResult bias_variance(std::mt19937_64& rng) {
  double worst = 0.0;
  for (std::size_t dim : {1u, 2u, 5u}) {
    for (int trial = 0; trial < 20; ++trial) {
      std::vector<Vector> samples;
      for (int i = 0; i < 100; ++i) samples.push_back(random_vector(rng, dim, -10.0, 10.0));
      const Vector anchor = random_vector(rng, dim, -10.0, 10.0);
      const auto bv = bias_variance_check(samples, anchor);
      worst = std::max(worst, std::abs(bv.total - (bv.variance + bv.bias_sq)) / bv.total);
    }
  }
  return check("bias-variance", "E|Z-a|^2 = E|Z-EZ|^2 + |EZ-a|^2 on random sample sets (rel <= 1e-10)",
               worst <= 1e-10, "max rel error " + sci(worst) + " vs 1e-10");
}

CheckResult gradient_fd(std::mt19937_64& rng) {
  double worst = 0.0;
  const double h = 1e-5;
  for (std::size_t dim : {1u, 2u, 5u}) {
    const ProblemSpec spec(1.7, 1.0, 1.0, Vector(dim, 0.0), NoiseModel::point_mass(Vector(dim, 0.0)));
    for (int trial = 0; trial < 100; ++trial) {
      Vector theta = random_vector(rng, dim, -10.0, 10.0);
      const Vector x = random_vector(rng, dim, -10.0, 10.0);
      const Vector g = gradient_pathwise(theta, x, spec);
      double num = 0.0, den = 0.0;
      for (std::size_t i = 0; i < dim; ++i) {
        const double t = theta[i];
        theta[i] = t + h;
        const double up = pathwise_loss(theta, x, spec);
        theta[i] = t - h;
        const double down = pathwise_loss(theta, x, spec);
        theta[i] = t;
        const double fd = (up - down) / (2.0 * h);
        num += (fd - g[i]) * (fd - g[i]);
        den += g[i] * g[i];
      }
      if (den > 0.0) worst = std::max(worst, std::sqrt(num / den));
    }
  }
  return check("gradient-finite-difference",
               "grad_theta F = alpha(theta-x) matches central differences, step 1e-5 (rel <= 1e-6)",
               worst <= 1e-6, "max rel error " + sci(worst) + " vs 1e-6");
}

CheckResult objective_identities(std::mt19937_64& rng) {
  double worst = 0.0;
  bool min_ok = true;
  for (std::size_t dim : {1u, 3u}) {
    std::vector<Vector> pts;
    for (int i = 0; i < 4; ++i) pts.push_back(random_vector(rng, dim, -3.0, 3.0));
    const ProblemSpec spec(2.5, 1.0, 1.0, Vector(dim, 0.0),
                           NoiseModel::discrete(pts, {0.125, 0.375, 0.25, 0.25}));
    const double alpha = spec.alpha();
    const double f_min = objective_value(spec.mu(), spec);
    for (int trial = 0; trial < 50; ++trial) {
      const Vector theta = random_vector(rng, dim, -5.0, 5.0);
      const Vector grad = gradient_objective(theta, spec);
      const double dist2 = squared_distance(theta, spec.mu());
      double inner = 0.0, gnorm2 = 0.0;
      for (std::size_t i = 0; i < dim; ++i) {
        inner += (theta[i] - spec.mu()[i]) * grad[i];
        gnorm2 += grad[i] * grad[i];
      }
      worst = std::max(worst, std::abs(std::sqrt(gnorm2) - alpha * std::sqrt(dist2)) / (alpha * std::sqrt(dist2)));
      worst = std::max(worst, std::abs(inner - alpha * dist2) / (alpha * dist2));
      const double noise = gradient_noise_exact(theta, spec);
      worst = std::max(worst, std::abs(noise - alpha * alpha * spec.sigma2()) / (alpha * alpha * spec.sigma2()));
      if (!(objective_value(theta, spec) > f_min)) min_ok = false;
    }
  }
  return check("objective-identities",
               "|grad f| = alpha|theta-mu|, <theta-mu, grad f> = alpha|theta-mu|^2, "
               "E|grad F - grad f|^2 = alpha^2 sigma2, f > f(mu) off the minimizer (rel <= 1e-12)",
               worst <= 1e-12 && min_ok, "max rel error " + sci(worst) + " vs 1e-12");
}

CheckResult affine_recursion(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> num(-9, 9), den(1, 7);
  bool ok = true;
  for (int trial = 0; trial < 30; ++trial) {
    AffineRecursionSpec<Rational> rec;
    const std::size_t dim = 1 + trial % 3;
    for (std::size_t i = 0; i < dim; ++i) {
      Rational v(num(rng), den(rng));
      v.canonicalize();
      rec.start.push_back(v);
    }
    for (int k = 0; k < 12; ++k) {
      Rational a(num(rng), den(rng));
      a.canonicalize();
      rec.multipliers.push_back(a);
      std::vector<Rational> b;
      for (std::size_t i = 0; i < dim; ++i) {
        Rational v(num(rng), den(rng));
        v.canonicalize();
        b.push_back(v);
      }
      rec.offsets.push_back(b);
    }
    for (std::size_t n = 0; n <= 12; ++n)
      if (affine_recursion_closed_form(rec, n) != affine_recursion_iterate(rec, n)) ok = false;
  }
  return check("affine-recursion", "product-sum closed form equals iteration of e_n = a_n e_{n-1} + b_n (rational)",
               ok, ok ? "exact" : "mismatch");
}

CheckResult oracle_agreement(const RunConfig& config, std::mt19937_64& rng) {
  const StepFactorFn factor = config.fault_step_sign
                                  ? StepFactorFn([](std::uint64_t l, const ProblemSpec& s) { return 1.0 + step_size(l, s); })
                                  : StepFactorFn(step_factor);
  bool exact_ok = true;
  const std::uint64_t n_rat = config.mode == ArithmeticMode::Rational ? 1024 : 256;
  const std::vector<ProblemSpec> rational_specs = {
      two_point_spec(1.0, 1.0, 0.0),  two_point_spec(1.0, 2.0, 0.0), two_point_spec(2.5, 1.0, 1.0),
      two_point_spec(0.375, 1.0, -2.0), two_point_spec(3.0, 0.5, 0.5)};
  for (const auto& spec : rational_specs) {
    const auto rec = exact_mse_recursion_rational(spec, n_rat);
    const auto all = exact_mse_closed_form_all_rational(spec, n_rat);
    if (rec != all) exact_ok = false;
    for (std::uint64_t n : std::vector<std::uint64_t>{0, 1, 7, 64, n_rat})
      if (exact_mse_closed_form_rational(spec, n) != rec[n]) exact_ok = false;
  }
  // e_n = 1/n for gamma*alpha = nu = 1, xi = mu, sigma2 = 1
  const auto case_a = exact_mse_recursion_rational(two_point_spec(1.0, 1.0, 0.0), 64);
  for (std::uint64_t n = 1; n <= 64; ++n)
    if (case_a[n] != Rational(1, static_cast<unsigned long>(n))) exact_ok = false;

  double worst = 0.0;
  std::uniform_real_distribution<double> ga(0.05, 4.0), xi(-2.0, 2.0);
  const std::vector<double> nus = {0.3, 0.5, 1.0, 1.5, 2.0};
  const std::vector<std::uint64_t> cps = {1, 2, 3, 10, 100, 1000, 10000};
  for (int trial = 0; trial < 10; ++trial) {
    const ProblemSpec spec = two_point_spec(ga(rng), nus[static_cast<std::size_t>(trial) % nus.size()], xi(rng), 0.7);
    const auto curve = exact_mse_curve(spec, cps, factor);
    for (const auto& p : curve.points()) {
      const double closed = exact_mse_closed_form(spec, p.n);
      const double rel = std::abs(p.value - closed) / std::max(closed, 1e-300);
      if (!(rel <= worst)) worst = rel;  // NaN-propagating max
    }
  }
  const bool ok = exact_ok && worst <= 1e-9;
  return check("oracle-agreement",
               "recursion for e_n equals the product-sum closed form (rational: exact for n <= " +
                   std::to_string(n_rat) + "; float: rel <= 1e-9 for n <= 1e4)",
               ok, std::string(exact_ok ? "exact" : "rational mismatch") + "; float max rel error " + sci(worst));
}

CheckResult positivity() {
  double worst = std::numeric_limits<double>::infinity();
  bool ok = true;
  for (double ga : {0.1, 0.5, 1.0, 3.0, 7.5})
    for (double nu : {0.4, 1.0, 1.7}) {
      const ProblemSpec spec = two_point_spec(ga, nu, 0.0, 0.5);
      const auto curve = exact_mse_curve(spec, dyadic_checkpoints(16));
      for (const auto& p : curve.points()) {
        if (!(p.value > 0.0)) ok = false;
        const double s = step_size(p.n, spec);
        if (std::pow(static_cast<double>(p.n), nu) >= ga) {
          const double floor = spec.sigma2() * s * s;
          worst = std::min(worst, p.value / floor);
          if (p.value < floor) ok = false;
        }
      }
    }
  return check("mse-positivity", "sigma2 > 0 implies e_n > 0 and e_n >= sigma2 (gamma alpha/n^nu)^2 once n^nu >= gamma alpha",
               ok, "min e_n / last-term floor " + sci(worst));
}

CheckResult composition() {
  bool ok = true;
  for (double ga : {0.25, 0.75, 2.0}) {
    const ProblemSpec spec = two_point_spec(ga, 1.0, 1.5);
    const ProblemSpec no_bias = two_point_spec(ga, 1.0, 0.0);
    const ProblemSpec no_noise(1.0, ga, 1.0, {1.5}, NoiseModel::point_mass({0.0}));
    for (std::uint64_t n : std::vector<std::uint64_t>{1, 10, 100, 1000, 10000}) {
      const double e = exact_mse_closed_form(spec, n);
      if (e < exact_mse_closed_form(no_bias, n) || e < exact_mse_closed_form(no_noise, n)) ok = false;
    }
  }
  return check("error-composition", "e_n dominates both its variance term and its deterministic term (nu = 1)", ok,
               ok ? "identity-level" : "violated");
}

CheckResult lower_bound() {
  bool exact_ok = true;
  for (std::uint64_t n = 1; n <= 64; ++n)
    if (lower_bound_functional_rational(Rational(1), 1, n) != 1) exact_ok = false;
  double worst = std::numeric_limits<double>::infinity();
  for (double beta : {0.3, 1.0, 2.0})
    for (double nu : {0.5, 1.0}) {
      const double v = lower_bound_functional(beta, nu, 1000000);
      worst = std::min(worst, v / lower_bound_constant(beta, nu));
    }
  return check("lower-bound-functional",
               "n^nu sum_k [(beta/k^nu) prod (1-beta/l^nu)]^2 equals 1 for beta = nu = 1 and exceeds "
               "beta^2 exp(-2^nu beta)/4 at n = 1e6",
               exact_ok && worst >= 1.0,
               std::string(exact_ok ? "exact" : "mismatch") + "; min value/constant " + sci(worst));
}

CheckResult schedule() {
  double worst = 0.0;
  for (double beta : {0.6, 1.0, 2.0, 5.0}) {
    const auto d = schedule_diagnostic(beta, 1.0, 100000);
    worst = std::max(worst, std::abs(d.tail_estimate - (2.0 - 1.0 / beta)));
  }
  // For nu < 1 the approach to 2 is slow (D_l ~ 2 - beta l^-nu), so the
  // check is a loose floor plus growth between l = 1e3 and l = 1e5.
  double slow_min = std::numeric_limits<double>::infinity();
  bool growing = true;
  for (double nu : {0.25, 0.5, 0.75}) {
    const auto d = schedule_diagnostic(1.0, nu, 100000);
    slow_min = std::min(slow_min, d.tail_estimate);
    if (!(d.tail_estimate > d.values[1000 - 2].second)) growing = false;
  }
  const bool ok = worst <= 1e-3 && slow_min >= 2.0 - 0.1 && growing;
  return check("schedule-diagnostic",
               "D_l -> 2 - 1/beta for nu = 1 (within 1e-3 at l = 1e5); for nu < 1, D_l >= 2 - 0.1 at "
               "l = 1e5 and increasing from l = 1e3",
               ok,
               "nu=1 max deviation " + sci(worst) + "; nu<1 min tail " + sci(slow_min));
}

CheckResult exp_limit() {
  bool ok = true;
  for (double a : {-3.0, -1.0, 0.5, 2.0}) {
    double prev = std::numeric_limits<double>::infinity();
    for (int j = 4; j <= 20; ++j) {
      const double gap = exp_limit_check(a, std::ldexp(1.0, j)).gap;
      if (!(gap < prev)) ok = false;
      prev = gap;
    }
  }
  const double g1 = exp_limit_check(1.0, 1e6).gap;
  const double g2 = exp_limit_check(-2.0, 1e6).gap;
  ok = ok && g1 < 2e-6 && g2 < 1e-5;
  return check("exp-limit", "(1+a/n)^n -> e^a with gap decreasing along n = 2^j; gap(a=1, n=1e6) < 2e-6", ok,
               "gap(1,1e6) " + sci(g1) + ", gap(-2,1e6) " + sci(g2));
}

CheckResult log_inequality() {
  bool ok = true;
  double slack = std::numeric_limits<double>::infinity();
  for (int i = 0; i < 10000; ++i) {
    const double x = std::pow(10.0, -6.0 + 12.0 * i / 9999.0);
    if (!log_inequality_check(x)) ok = false;
    slack = std::min(slack, std::log(x) - (x - 1.0) / x);
  }
  return check("log-inequality", "log(x) >= (x-1)/x on 1e4 log-spaced x in [1e-6, 1e6]", ok,
               "min slack " + sci(slack));
}

CheckResult deterministic_lb() {
  const ProblemSpec spec(1.0, 0.5, 1.0, {1.0}, NoiseModel::point_mass({0.0}));
  const DeterministicGdSpec dspec{spec, {0.0}, 0.0};
  std::vector<std::uint64_t> cps;
  for (unsigned k = 10; k <= 20; ++k) cps.push_back(std::uint64_t{1} << k);
  const auto rep = deterministic_lb_check(dspec, 0.1, cps);
  return check("deterministic-gd-lower-bound",
               "q_n = |Theta_n - target| n^{gamma alpha + eps} positive and non-decreasing on [2^10, 2^20] "
               "(gamma alpha = 0.5, eps = 0.1)",
               rep.pass, "min q_n " + sci(rep.tail_min));
}

CheckResult very_fast() {
  bool ok = true;
  double worst = 0.0;
  const std::vector<std::uint64_t> cps = {1000, 10000, 100000, 1000000};
  for (double nu : {1.5, 2.0}) {
    const auto curve = exact_mse_curve(two_point_spec(1.0, nu, 1.0), cps);
    const double last = curve.back().value;
    if (!(last > 0.0)) ok = false;
    for (const auto& p : curve.points()) {
      if (p.value < 0.9 * last) ok = false;
      worst = std::max(worst, std::abs(p.value / last - 1.0));
    }
  }
  return check("very-fast-plateau", "nu > 1: e_n stays bounded and bounded away from 0 (e_n >= 0.9 e_{1e6} > 0)",
               ok, "max |e_n/e_1e6 - 1| " + sci(worst));
}

CheckResult objective_gap() {
  const ProblemSpec spec = two_point_spec(1.0, 1.0, 0.0);
  const auto curve = exact_mse_curve(spec, std::vector<std::uint64_t>{100});
  const double gap = objective_gap_from_mse(curve.back().value, spec);
  const bool ok = std::abs(gap - 0.005) <= 1e-15;
  return check("objective-gap", "E f(Theta_n) - f(mu) = (alpha/2) e_n; equals 0.005 at n = 100 for e_n = 1/n", ok,
               "abs error " + sci(std::abs(gap - 0.005)));
}

}  // namespace

std::vector<CheckResult> run_verification_suite(const RunConfig& config) {
  std::mt19937_64 rng(config.seed);
  std::vector<CheckResult> out;
  auto run = [&](const std::string& name, auto&& fn) {
    try {
      out.push_back(fn());
    } catch (const std::exception& e) {
      out.push_back(check(name, "check raised an error", false, e.what()));
    }
  };
  run("bias-variance", [&] { return bias_variance(rng); });
  run("gradient-finite-difference", [&] { return gradient_fd(rng); });
  run("objective-identities", [&] { return objective_identities(rng); });
  run("affine-recursion", [&] { return affine_recursion(rng); });
  run("oracle-agreement", [&] { return oracle_agreement(config, rng); });
  run("mse-positivity", [] { return positivity(); });
  run("error-composition", [] { return composition(); });
  run("lower-bound-functional", [] { return lower_bound(); });
  run("schedule-diagnostic", [] { return schedule(); });
  run("exp-limit", [] { return exp_limit(); });
  run("log-inequality", [] { return log_inequality(); });
  run("deterministic-gd-lower-bound", [] { return deterministic_lb(); });
  run("very-fast-plateau", [] { return very_fast(); });
  run("objective-gap", [] { return objective_gap(); });
  return out;
}

}  // namespace sgdrates::cli
