#include "sgdrates/rate_analysis.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace sgdrates {

std::string to_string(Regime regime) {
  switch (regime) {
    case Regime::SlowDecay: return "SlowDecay";
    case Regime::FastLargeStep: return "FastLargeStep";
    case Regime::FastSmallStep: return "FastSmallStep";
    case Regime::VeryFast: return "VeryFast";
  }
  return "Unknown";
}

std::string to_string(Verdict verdict) {
  switch (verdict) {
    case Verdict::Pass: return "PASS";
    case Verdict::Fail: return "FAIL";
    case Verdict::Boundary: return "BOUNDARY";
  }
  return "FAIL";
}

RateBand theoretical_rate_band(const ProblemSpec& spec, double epsilon) {
  if (!(epsilon > 0.0)) throw std::invalid_argument("epsilon must be positive");
  RateBand band;
  band.epsilon = epsilon;
  const double nu = spec.nu();
  if (nu < 1.0) {
    band.r0 = band.r1 = nu / 2.0;
    band.regime = Regime::SlowDecay;
  } else if (nu == 1.0) {
    const double ga = spec.step_product();
    band.r0 = std::min(0.5, ga + epsilon);
    band.r1 = std::min(0.5, ga - epsilon);
    band.regime = ga > 0.5 ? Regime::FastLargeStep : Regime::FastSmallStep;
  } else {
    band.r0 = band.r1 = 0.0;
    band.regime = Regime::VeryFast;
  }
  return band;
}

bool is_boundary_case(const ProblemSpec& spec) {
  return spec.nu() == 1.0 && std::abs(spec.step_product() - 0.5) <= 1e-12;
}

FitWindow default_window(const ErrorCurve& curve) {
  std::vector<std::uint64_t> ns;
  for (const auto& p : curve.points())
    if (p.n >= 2) ns.push_back(p.n);
  if (ns.size() < 5) throw std::invalid_argument("curve too short: fewer than 5 points with n >= 2");
  const std::size_t keep = std::max<std::size_t>(5, (ns.size() + 1) / 2);
  return {ns[ns.size() - keep], ns.back()};
}

RateEstimate fit_log_log_slope(const ErrorCurve& curve, FitWindow window) {
  if (window.n_min < 2) throw std::invalid_argument("fit window must start at n >= 2");
  std::vector<double> xs, ys;
  for (const auto& p : curve.points()) {
    if (p.n < window.n_min || p.n > window.n_max) continue;
    if (!(p.value > 0.0))
      throw std::invalid_argument("nonpositive value at n = " + std::to_string(p.n) +
                                  " in fit window (zero plateau: degenerate noise?)");
    xs.push_back(std::log(static_cast<double>(p.n)));
    ys.push_back(std::log(p.value));
  }
  if (xs.size() < 5) throw std::invalid_argument("fit window holds fewer than 5 curve points");

  const double count = static_cast<double>(xs.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= count;
  my /= count;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
  }
  RateEstimate est;
  est.slope = sxy / sxx;
  est.intercept = my - est.slope * mx;
  est.window = window;
  est.num_points = xs.size();
  double rss = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double r = ys[i] - (est.intercept + est.slope * xs[i]);
    rss += r * r;
  }
  est.rms_residual = std::sqrt(rss / count);
  return est;
}

RateEstimate fit_log_log_slope(const ErrorCurve& curve) {
  return fit_log_log_slope(curve, default_window(curve));
}

RegimeReport classify_regime(const ProblemSpec& spec, const ErrorCurve& curve, double epsilon) {
  if (curve.size() < 5) throw std::invalid_argument("curve too short: fewer than 5 points");
  const double span = static_cast<double>(curve.back().n) / static_cast<double>(curve[0].n);
  if (span < 1e4) throw std::invalid_argument("curve too short: checkpoints must span 4 decades");

  RegimeReport rep;
  rep.band = theoretical_rate_band(spec, epsilon);
  rep.estimate = fit_log_log_slope(curve);
  rep.fitted_mse_exponent = -rep.estimate.slope;
  const bool mc = curve.meaning() == CurveMeaning::MonteCarloMSE;

  if (rep.band.regime == Regime::VeryFast) {
    rep.tolerance = kVeryFastSlopeTolerance;
    rep.accept_low = -rep.tolerance;
    rep.accept_high = rep.tolerance;
    const bool flat = std::abs(rep.estimate.slope) <= rep.tolerance;
    const bool positive = spec.sigma2() == 0.0 || curve.back().value > 0.0;
    rep.verdict = flat && positive ? Verdict::Pass : Verdict::Fail;
    if (!positive) rep.note = "final error is zero although sigma2 > 0";
    return rep;
  }

  rep.tolerance = mc ? kMonteCarloSlopeTolerance : kExactSlopeTolerance;
  if (is_boundary_case(spec)) {
    rep.tolerance = kBoundaryTolerance;
    rep.note = "boundary, widened tolerance 0.15";
  }
  rep.accept_low = rep.band.mse_lower_exponent() - rep.tolerance;
  rep.accept_high = rep.band.mse_upper_exponent() + rep.tolerance;
  const bool inside =
      rep.fitted_mse_exponent >= rep.accept_low && rep.fitted_mse_exponent <= rep.accept_high;
  if (is_boundary_case(spec)) {
    rep.verdict = Verdict::Boundary;
    if (!inside) rep.note += "; fitted exponent outside widened band";
  } else {
    rep.verdict = inside ? Verdict::Pass : Verdict::Fail;
  }
  return rep;
}

ScheduleDiagnostic schedule_diagnostic(double beta, double nu, std::uint64_t l_max) {
  if (l_max < 2) throw std::invalid_argument("schedule diagnostic needs l_max >= 2");
  if (!(beta > 0.0) || !(nu > 0.0)) throw std::invalid_argument("beta and nu must be positive");
  auto rate = [&](std::uint64_t l) { return beta / std::pow(static_cast<double>(l), nu); };
  ScheduleDiagnostic diag;
  diag.values.reserve(l_max - 1);
  double prev = rate(1);
  for (std::uint64_t l = 2; l <= l_max; ++l) {
    const double cur = rate(l);
    diag.values.emplace_back(l, (cur - prev) / (cur * cur) + 2.0 * prev / cur - prev);
    prev = cur;
  }
  diag.tail_estimate = diag.values.back().second;
  return diag;
}

ExpLimit exp_limit_check(double a, double n) {
  if (!(n > 0.0)) throw std::invalid_argument("exp limit needs n > 0");
  if (!(1.0 + a / n > 0.0)) throw std::invalid_argument("exp limit needs 1 + a/n > 0");
  ExpLimit r;
  r.approx = std::exp(n * std::log1p(a / n));
  r.target = std::exp(a);
  r.gap = std::abs(r.approx - r.target);
  return r;
}

bool log_inequality_check(double x) {
  if (!(x > 0.0)) throw std::invalid_argument("log inequality needs x > 0");
  return std::log(x) >= (x - 1.0) / x - 1e-15;
}

DeterministicLbReport deterministic_lb_check(const DeterministicGdSpec& dspec, double epsilon,
                                             std::span<const std::uint64_t> checkpoints) {
  const auto& spec = dspec.spec;
  if (spec.nu() != 1.0) throw std::invalid_argument("hypothesis failed: nu = 1 required");
  if (dspec.step_product_is_integer())
    throw std::invalid_argument("hypothesis failed: γα ∈ ℕ (gamma*alpha must not be a positive integer)");
  if (squared_distance(spec.xi(), dspec.target) == 0.0)
    throw std::invalid_argument("hypothesis failed: ξ = ϑ (xi must differ from the target)");
  if (!(epsilon > 0.0)) throw std::invalid_argument("epsilon must be positive");

  const auto dist = deterministic_gd_distance(dspec, checkpoints);
  const double power = spec.step_product() + epsilon;
  DeterministicLbReport rep;
  rep.tail_non_decreasing = true;
  bool any_tail = false;
  double prev = 0.0;
  for (const auto& p : dist.points()) {
    const double q = p.value * std::pow(static_cast<double>(p.n), power);
    rep.scaled.emplace_back(p.n, q);
    if (p.n < 1024) continue;
    if (!any_tail) {
      rep.tail_min = q;
    } else {
      rep.tail_min = std::min(rep.tail_min, q);
      if (q < prev) rep.tail_non_decreasing = false;
    }
    any_tail = true;
    prev = q;
  }
  rep.pass = any_tail && rep.tail_min > 0.0 && rep.tail_non_decreasing;
  return rep;
}

}  // namespace sgdrates
