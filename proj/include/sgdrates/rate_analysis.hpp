#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "sgdrates/core_model.hpp"
#include "sgdrates/exact_error.hpp"

namespace sgdrates {

enum class Regime { SlowDecay, FastLargeStep, FastSmallStep, VeryFast };

std::string to_string(Regime regime);

/// Root-MSE exponents: c0 n^{-r0} <= RMSE <= c1 n^{-r1}. MSE exponents are
/// twice these.
struct RateBand {
  double epsilon = 0.0;
  double r0 = 0.0;
  double r1 = 0.0;
  Regime regime = Regime::SlowDecay;

  double mse_lower_exponent() const { return 2.0 * r1; }
  double mse_upper_exponent() const { return 2.0 * r0; }
};

RateBand theoretical_rate_band(const ProblemSpec& spec, double epsilon);

/// gamma * alpha == 1/2 with nu == 1, where the band degenerates.
bool is_boundary_case(const ProblemSpec& spec);

struct FitWindow {
  std::uint64_t n_min = 0;
  std::uint64_t n_max = 0;
};

struct RateEstimate {
  double slope = 0.0;
  double intercept = 0.0;
  FitWindow window;
  double rms_residual = 0.0;
  std::size_t num_points = 0;
};

/// Upper half of the curve's checkpoints (at least 5 points, n >= 2).
FitWindow default_window(const ErrorCurve& curve);

/// OLS of log(value) on log(n) over the points with n in the window.
RateEstimate fit_log_log_slope(const ErrorCurve& curve, FitWindow window);
RateEstimate fit_log_log_slope(const ErrorCurve& curve);

enum class Verdict { Pass, Fail, Boundary };

std::string to_string(Verdict verdict);

struct RegimeReport {
  RateBand band;
  RateEstimate estimate;
  double tolerance = 0.0;
  double fitted_mse_exponent = 0.0;
  /// Accepted interval for the fitted MSE exponent (or slope for VeryFast).
  double accept_low = 0.0;
  double accept_high = 0.0;
  Verdict verdict = Verdict::Fail;
  std::string note;
};

inline constexpr double kExactSlopeTolerance = 0.05;
inline constexpr double kMonteCarloSlopeTolerance = 0.1;
inline constexpr double kBoundaryTolerance = 0.15;
inline constexpr double kVeryFastSlopeTolerance = 0.02;
inline constexpr double kDefaultEpsilon = 0.05;

/// Fits the tail slope and compares it with the band. Requires checkpoints
/// spanning at least four decades.
RegimeReport classify_regime(const ProblemSpec& spec, const ErrorCurve& curve, double epsilon);

/// D_l = (g_l - g_{l-1}) / g_l^2 + 2 g_{l-1} / g_l - g_{l-1} for g_l = beta / l^nu.
struct ScheduleDiagnostic {
  std::vector<std::pair<std::uint64_t, double>> values;
  double tail_estimate = 0.0;
};

ScheduleDiagnostic schedule_diagnostic(double beta, double nu, std::uint64_t l_max);

struct ExpLimit {
  double approx = 0.0;
  double target = 0.0;
  double gap = 0.0;
};

/// ((1 + a/n)^n, e^a, |difference|). Requires 1 + a/n > 0.
ExpLimit exp_limit_check(double a, double n);

/// log(x) >= (x - 1)/x - 1e-15. Requires x > 0.
bool log_inequality_check(double x);

struct DeterministicLbReport {
  std::vector<std::pair<std::uint64_t, double>> scaled;  // (n, q_n)
  double tail_min = 0.0;
  bool tail_non_decreasing = false;
  bool pass = false;
};

/// q_n = |Theta_n - target| n^{gamma alpha + epsilon} for deterministic GD.
/// The tail is n >= 2^10. Throws std::invalid_argument naming the failed
/// hypothesis (nu = 1, gamma alpha not an integer, xi != target).
DeterministicLbReport deterministic_lb_check(const DeterministicGdSpec& dspec, double epsilon,
                                             std::span<const std::uint64_t> checkpoints);

}  // namespace sgdrates
