#include "sgdrates/core_model.hpp"

#include <cmath>
#include <map>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "sgdrates/format.hpp"

namespace sgdrates {

namespace {

void require(bool ok, const std::string& what) {
  if (!ok) throw std::invalid_argument(what);
}

void require_finite(std::span<const double> v, const std::string& name) {
  for (double x : v) require(std::isfinite(x), name + " has a non-finite coordinate");
}

void require_same_dim(std::span<const double> a, std::span<const double> b) {
  require(a.size() == b.size(), "dimension mismatch: " + std::to_string(a.size()) + " vs " +
                                    std::to_string(b.size()));
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == sep) {
      out.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  out.push_back(cur);
  return out;
}

Vector parse_vector(const std::string& text, std::size_t dim, const std::string& name) {
  Vector v;
  for (const auto& tok : split(text, ',')) {
    std::size_t used = 0;
    double x = 0.0;
    try {
      x = std::stod(tok, &used);
    } catch (const std::exception&) {
      throw std::invalid_argument("noise parameter '" + name + "': bad number '" + tok + "'");
    }
    require(used == tok.size(), "noise parameter '" + name + "': bad number '" + tok + "'");
    v.push_back(x);
  }
  if (v.size() == 1 && dim > 1) v.assign(dim, v[0]);
  require(v.size() == dim, "noise parameter '" + name + "' needs " + std::to_string(dim) +
                               " coordinates, got " + std::to_string(v.size()));
  return v;
}

double parse_scalar(const std::string& text, const std::string& name) {
  return parse_vector(text, 1, name)[0];
}

std::string join(std::span<const double> v, char sep = ',') {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out.push_back(sep);
    out += format_double(v[i]);
  }
  return out;
}

}  // namespace

std::string to_string(NoiseKind kind) {
  switch (kind) {
    case NoiseKind::PointMass: return "point";
    case NoiseKind::TwoPoint: return "twopoint";
    case NoiseKind::UniformBox: return "uniform";
    case NoiseKind::Gaussian: return "gaussian";
    case NoiseKind::DiscreteEmpirical: return "discrete";
  }
  return "unknown";
}

NoiseModel NoiseModel::point_mass(Vector at) {
  require(!at.empty(), "noise dimension must be at least 1");
  require_finite(at, "point mass location");
  NoiseModel m;
  m.kind_ = NoiseKind::PointMass;
  m.mean_ = std::move(at);
  return m;
}

NoiseModel NoiseModel::two_point(Vector mean, Vector offset) {
  require(!mean.empty(), "noise dimension must be at least 1");
  require_same_dim(mean, offset);
  require_finite(mean, "two-point mean");
  require_finite(offset, "two-point offset");
  NoiseModel m;
  m.kind_ = NoiseKind::TwoPoint;
  m.sigma2_ = std::inner_product(offset.begin(), offset.end(), offset.begin(), 0.0);
  m.mean_ = std::move(mean);
  m.offset_ = std::move(offset);
  return m;
}

NoiseModel NoiseModel::uniform_box(Vector mean, double half_width) {
  require(!mean.empty(), "noise dimension must be at least 1");
  require_finite(mean, "uniform mean");
  require(std::isfinite(half_width) && half_width >= 0.0, "uniform half-width must be >= 0");
  NoiseModel m;
  m.kind_ = NoiseKind::UniformBox;
  m.sigma2_ = static_cast<double>(mean.size()) * half_width * half_width / 3.0;
  m.mean_ = std::move(mean);
  m.half_width_ = half_width;
  return m;
}

NoiseModel NoiseModel::gaussian(Vector mean, double scale) {
  require(!mean.empty(), "noise dimension must be at least 1");
  require_finite(mean, "gaussian mean");
  require(std::isfinite(scale) && scale >= 0.0, "gaussian covariance scale must be >= 0");
  NoiseModel m;
  m.kind_ = NoiseKind::Gaussian;
  m.sigma2_ = static_cast<double>(mean.size()) * scale;
  m.mean_ = std::move(mean);
  m.scale_ = scale;
  return m;
}

NoiseModel NoiseModel::discrete(std::vector<Vector> points, std::vector<double> weights) {
  require(!points.empty(), "discrete noise needs at least one support point");
  require(points.size() == weights.size(), "discrete noise: points and weights differ in length");
  const std::size_t dim = points.front().size();
  require(dim >= 1, "noise dimension must be at least 1");
  double total = 0.0;
  for (std::size_t i = 0; i < points.size(); ++i) {
    require(points[i].size() == dim, "discrete noise: support points differ in dimension");
    require_finite(points[i], "discrete support point");
    require(std::isfinite(weights[i]) && weights[i] > 0.0, "discrete noise weights must be positive");
    total += weights[i];
  }
  require(std::abs(total - 1.0) <= 1e-12, "discrete noise weights must sum to 1");

  NoiseModel m;
  m.kind_ = NoiseKind::DiscreteEmpirical;
  m.mean_.assign(dim, 0.0);
  for (std::size_t i = 0; i < points.size(); ++i)
    for (std::size_t j = 0; j < dim; ++j) m.mean_[j] += weights[i] * points[i][j];
  for (std::size_t i = 0; i < points.size(); ++i)
    m.sigma2_ += weights[i] * squared_distance(points[i], m.mean_);

  m.cumulative_.resize(weights.size());
  std::partial_sum(weights.begin(), weights.end(), m.cumulative_.begin());
  m.cumulative_.back() = 1.0;
  m.points_ = std::move(points);
  m.weights_ = std::move(weights);
  return m;
}

std::string NoiseModel::describe() const {
  switch (kind_) {
    case NoiseKind::PointMass: return "point:at=" + join(mean_);
    case NoiseKind::TwoPoint: return "twopoint:offset=" + join(offset_) + ";mean=" + join(mean_);
    case NoiseKind::UniformBox:
      return "uniform:half=" + format_double(half_width_) + ";mean=" + join(mean_);
    case NoiseKind::Gaussian:
      return "gaussian:scale=" + format_double(scale_) + ";mean=" + join(mean_);
    case NoiseKind::DiscreteEmpirical: {
      std::string pts;
      for (std::size_t i = 0; i < points_.size(); ++i) {
        if (i) pts.push_back('|');
        pts += join(points_[i]);
      }
      return "discrete:points=" + pts + ";weights=" + join(weights_);
    }
  }
  return {};
}

NoiseModel parse_noise(const std::string& text, std::size_t dimension) {
  require(dimension >= 1, "dimension must be at least 1");
  const auto colon = text.find(':');
  const std::string kind = text.substr(0, colon);
  std::map<std::string, std::string> params;
  if (colon != std::string::npos) {
    for (const auto& item : split(text.substr(colon + 1), ';')) {
      if (item.empty()) continue;
      const auto eq = item.find('=');
      require(eq != std::string::npos, "noise parameter '" + item + "' is not key=value");
      params[item.substr(0, eq)] = item.substr(eq + 1);
    }
  }
  auto take = [&](const std::string& key, const std::string& fallback) {
    auto it = params.find(key);
    if (it == params.end()) return fallback;
    std::string v = it->second;
    params.erase(it);
    return v;
  };
  auto finish = [&](NoiseModel m) {
    require(params.empty(), "unknown noise parameter '" +
                                (params.empty() ? std::string() : params.begin()->first) +
                                "' for kind " + kind);
    return m;
  };

  if (kind == "point" || kind == "pointmass") {
    return finish(NoiseModel::point_mass(parse_vector(take("at", "0"), dimension, "at")));
  }
  if (kind == "twopoint") {
    Vector offset = parse_vector(take("offset", "1"), dimension, "offset");
    Vector mean = parse_vector(take("mean", "0"), dimension, "mean");
    return finish(NoiseModel::two_point(std::move(mean), std::move(offset)));
  }
  if (kind == "uniform") {
    double half = parse_scalar(take("half", "1"), "half");
    Vector mean = parse_vector(take("mean", "0"), dimension, "mean");
    return finish(NoiseModel::uniform_box(std::move(mean), half));
  }
  if (kind == "gaussian") {
    double scale = parse_scalar(take("scale", "1"), "scale");
    Vector mean = parse_vector(take("mean", "0"), dimension, "mean");
    return finish(NoiseModel::gaussian(std::move(mean), scale));
  }
  if (kind == "discrete") {
    const std::string pts = take("points", "");
    require(!pts.empty(), "discrete noise needs points=");
    std::vector<Vector> points;
    for (const auto& p : split(pts, '|')) points.push_back(parse_vector(p, dimension, "points"));
    std::vector<double> weights;
    const std::string w = take("weights", "");
    if (w.empty()) {
      weights.assign(points.size(), 1.0 / static_cast<double>(points.size()));
    } else {
      weights = parse_vector(w, points.size(), "weights");
    }
    return finish(NoiseModel::discrete(std::move(points), std::move(weights)));
  }
  throw std::invalid_argument("unknown noise kind '" + kind + "'");
}

ProblemSpec::ProblemSpec(double alpha, double gamma, double nu, Vector xi, NoiseModel noise)
    : alpha_(alpha), gamma_(gamma), nu_(nu), xi_(std::move(xi)), noise_(std::move(noise)) {
  require(std::isfinite(alpha) && alpha > 0.0, "alpha must be positive");
  require(std::isfinite(gamma) && gamma > 0.0, "gamma must be positive");
  require(std::isfinite(nu) && nu > 0.0, "nu must be positive");
  require(!xi_.empty(), "dimension must be at least 1");
  require_finite(xi_, "xi");
  require(xi_.size() == noise_.dimension(),
          "xi has " + std::to_string(xi_.size()) + " coordinates but the noise model has dimension " +
              std::to_string(noise_.dimension()));
}

double ProblemSpec::initial_error() const { return squared_distance(xi_, mu()); }

std::string to_string(CurveMeaning meaning) {
  switch (meaning) {
    case CurveMeaning::ExactMSE: return "exact_mse";
    case CurveMeaning::MonteCarloMSE: return "monte_carlo_mse";
    case CurveMeaning::DeterministicDistance: return "deterministic_distance";
    case CurveMeaning::ObjectiveGap: return "objective_gap";
  }
  return "unknown";
}

void ErrorCurve::push(std::uint64_t n, double value, std::optional<double> std_error) {
  require(n >= 1, "curve index must be positive");
  require(points_.empty() || n > points_.back().n, "curve indices must be strictly increasing");
  require(std::isfinite(value) && value >= 0.0, "curve values must be finite and nonnegative");
  const bool mc = meaning_ == CurveMeaning::MonteCarloMSE;
  require(std_error.has_value() == mc, "standard errors belong to Monte-Carlo curves only");
  if (std_error) require(std::isfinite(*std_error) && *std_error >= 0.0, "standard error must be >= 0");
  points_.push_back({n, value, std_error});
}

double squared_distance(std::span<const double> a, std::span<const double> b) {
  require_same_dim(a, b);
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return s;
}

double pathwise_loss(std::span<const double> theta, std::span<const double> x,
                     const ProblemSpec& spec) {
  require_same_dim(theta, spec.xi());
  return 0.5 * spec.alpha() * squared_distance(theta, x);
}

double objective_value(std::span<const double> theta, const ProblemSpec& spec) {
  require_same_dim(theta, spec.xi());
  return 0.5 * spec.alpha() * squared_distance(theta, spec.mu()) + 0.5 * spec.alpha() * spec.sigma2();
}

Vector gradient_pathwise(std::span<const double> theta, std::span<const double> x,
                         const ProblemSpec& spec) {
  require_same_dim(theta, spec.xi());
  require_same_dim(theta, x);
  Vector g(theta.size());
  for (std::size_t i = 0; i < g.size(); ++i) g[i] = spec.alpha() * (theta[i] - x[i]);
  return g;
}

Vector gradient_objective(std::span<const double> theta, const ProblemSpec& spec) {
  return gradient_pathwise(theta, spec.mu(), spec);
}

Vector minimizer(const ProblemSpec& spec) { return spec.mu(); }

double objective_gap_from_mse(double mse, const ProblemSpec& spec) {
  require(std::isfinite(mse) && mse >= 0.0, "mse must be finite and nonnegative");
  return 0.5 * spec.alpha() * mse;
}

ErrorCurve objective_gap_curve(const ErrorCurve& mse, const ProblemSpec& spec) {
  require(mse.meaning() == CurveMeaning::ExactMSE || mse.meaning() == CurveMeaning::MonteCarloMSE,
          "objective gap needs an MSE curve");
  ErrorCurve gap(CurveMeaning::ObjectiveGap);
  for (const auto& p : mse.points()) gap.push(p.n, objective_gap_from_mse(p.value, spec));
  return gap;
}

double gradient_noise_exact(std::span<const double> theta, const ProblemSpec& spec) {
  const auto& noise = spec.noise();
  const Vector grad_f = gradient_objective(theta, spec);
  auto term = [&](std::span<const double> x) {
    return squared_distance(gradient_pathwise(theta, x, spec), grad_f);
  };
  switch (noise.kind()) {
    case NoiseKind::PointMass: return term(noise.mean());
    case NoiseKind::TwoPoint: {
      Vector plus = noise.mean(), minus = noise.mean();
      for (std::size_t i = 0; i < plus.size(); ++i) {
        plus[i] += noise.offset()[i];
        minus[i] -= noise.offset()[i];
      }
      return 0.5 * term(plus) + 0.5 * term(minus);
    }
    case NoiseKind::DiscreteEmpirical: {
      double s = 0.0;
      for (std::size_t i = 0; i < noise.points().size(); ++i)
        s += noise.weights()[i] * term(noise.points()[i]);
      return s;
    }
    default: break;
  }
  throw std::invalid_argument("exact gradient noise needs finitely supported noise");
}

BiasVariance bias_variance_check(std::span<const Vector> samples, std::span<const double> anchor) {
  require(!samples.empty(), "bias-variance check needs at least one sample");
  const std::size_t dim = anchor.size();
  Vector mean(dim, 0.0);
  for (const auto& z : samples) {
    require_same_dim(z, anchor);
    for (std::size_t i = 0; i < dim; ++i) mean[i] += z[i];
  }
  const double count = static_cast<double>(samples.size());
  for (double& m : mean) m /= count;

  BiasVariance r;
  for (const auto& z : samples) {
    r.total += squared_distance(z, anchor);
    r.variance += squared_distance(z, mean);
  }
  r.total /= count;
  r.variance /= count;
  r.bias_sq = squared_distance(mean, anchor);
  return r;
}

}  // namespace sgdrates
