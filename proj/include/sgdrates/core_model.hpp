#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace sgdrates {

using Vector = std::vector<double>;

enum class NoiseKind { PointMass, TwoPoint, UniformBox, Gaussian, DiscreteEmpirical };

std::string to_string(NoiseKind kind);

/// Distribution of the i.i.d. data X_n. The mean and E|X - mean|^2 are known
/// in closed form for every kind and stored alongside the parameters.
class NoiseModel {
 public:
  /// X = at, almost surely.
  static NoiseModel point_mass(Vector at);
  /// X = mean + offset or mean - offset, each with probability 1/2.
  static NoiseModel two_point(Vector mean, Vector offset);
  /// X = mean + U, U uniform on [-half_width, half_width]^d.
  static NoiseModel uniform_box(Vector mean, double half_width);
  /// X = mean + N(0, scale * I).
  static NoiseModel gaussian(Vector mean, double scale);
  /// X = points[i] with probability weights[i]. Weights must be positive and
  /// sum to one within 1e-12.
  static NoiseModel discrete(std::vector<Vector> points, std::vector<double> weights);

  NoiseKind kind() const { return kind_; }
  std::size_t dimension() const { return mean_.size(); }
  const Vector& mean() const { return mean_; }
  double sigma2() const { return sigma2_; }
  bool degenerate() const { return sigma2_ == 0.0; }

  const Vector& offset() const { return offset_; }
  double half_width() const { return half_width_; }
  double scale() const { return scale_; }
  const std::vector<Vector>& points() const { return points_; }
  const std::vector<double>& weights() const { return weights_; }
  const std::vector<double>& cumulative_weights() const { return cumulative_; }

  /// Canonical text form, parseable by parse_noise().
  std::string describe() const;

 private:
  NoiseModel() = default;

  NoiseKind kind_ = NoiseKind::PointMass;
  Vector mean_;
  double sigma2_ = 0.0;
  Vector offset_;
  double half_width_ = 0.0;
  double scale_ = 0.0;
  std::vector<Vector> points_;
  std::vector<double> weights_;
  std::vector<double> cumulative_;
};

/// Parses `KIND[:key=v1,v2;key=...]` for a d-dimensional model. Scalar values
/// broadcast to all d coordinates. Throws std::invalid_argument.
NoiseModel parse_noise(const std::string& text, std::size_t dimension);

/// The quadratic stochastic optimization problem together with the SGD
/// schedule gamma / n^nu and the initial value xi.
class ProblemSpec {
 public:
  ProblemSpec(double alpha, double gamma, double nu, Vector xi, NoiseModel noise);

  std::size_t dimension() const { return xi_.size(); }
  double alpha() const { return alpha_; }
  double gamma() const { return gamma_; }
  double nu() const { return nu_; }
  const Vector& xi() const { return xi_; }
  const NoiseModel& noise() const { return noise_; }

  const Vector& mu() const { return noise_.mean(); }
  double sigma2() const { return noise_.sigma2(); }
  /// gamma * alpha, the quantity the rates depend on.
  double step_product() const { return gamma_ * alpha_; }
  /// |xi - mu|^2
  double initial_error() const;

 private:
  double alpha_;
  double gamma_;
  double nu_;
  Vector xi_;
  NoiseModel noise_;
};

enum class CurveMeaning { ExactMSE, MonteCarloMSE, DeterministicDistance, ObjectiveGap };

std::string to_string(CurveMeaning meaning);

struct CurvePoint {
  std::uint64_t n = 0;
  double value = 0.0;
  std::optional<double> std_error;
};

/// Sequence of (n, value) pairs with strictly increasing n. Standard errors
/// are carried iff the curve is a Monte-Carlo estimate.
class ErrorCurve {
 public:
  explicit ErrorCurve(CurveMeaning meaning) : meaning_(meaning) {}

  void push(std::uint64_t n, double value, std::optional<double> std_error = std::nullopt);

  CurveMeaning meaning() const { return meaning_; }
  const std::vector<CurvePoint>& points() const { return points_; }
  std::size_t size() const { return points_.size(); }
  bool empty() const { return points_.empty(); }
  const CurvePoint& operator[](std::size_t i) const { return points_[i]; }
  const CurvePoint& back() const { return points_.back(); }

 private:
  CurveMeaning meaning_;
  std::vector<CurvePoint> points_;
};

// Objective, loss and gradient of the quadratic problem.
double pathwise_loss(std::span<const double> theta, std::span<const double> x,
                     const ProblemSpec& spec);
double objective_value(std::span<const double> theta, const ProblemSpec& spec);
Vector gradient_pathwise(std::span<const double> theta, std::span<const double> x,
                         const ProblemSpec& spec);
/// grad f(theta) = alpha (theta - mu)
Vector gradient_objective(std::span<const double> theta, const ProblemSpec& spec);
Vector minimizer(const ProblemSpec& spec);
double objective_gap_from_mse(double mse, const ProblemSpec& spec);
/// Maps an MSE curve to the objective-gap curve E f(Theta_n) - f(mu).
ErrorCurve objective_gap_curve(const ErrorCurve& mse, const ProblemSpec& spec);

/// E|grad_theta F(theta, X) - grad f(theta)|^2 as an exact weighted sum.
/// Only defined for finitely supported noise (point mass, two-point,
/// discrete); throws otherwise.
double gradient_noise_exact(std::span<const double> theta, const ProblemSpec& spec);

struct BiasVariance {
  double total = 0.0;
  double variance = 0.0;
  double bias_sq = 0.0;
};

/// Empirical E|Z - anchor|^2, E|Z - mean(Z)|^2 and |mean(Z) - anchor|^2.
BiasVariance bias_variance_check(std::span<const Vector> samples, std::span<const double> anchor);

double squared_distance(std::span<const double> a, std::span<const double> b);

}  // namespace sgdrates
