#include "sgdrates/exact_error.hpp"

#include <mpfr.h>

#include <cmath>
#include <stdexcept>

namespace sgdrates {

Rational to_rational(double x) {
  if (!std::isfinite(x)) throw std::invalid_argument("cannot represent a non-finite value as a rational");
  Rational q;
  mpq_set_d(q.get_mpq_t(), x);
  return q;
}

double to_double(const Rational& q) {
  mpfr_t tmp;
  mpfr_init2(tmp, 53);
  mpfr_set_q(tmp, q.get_mpq_t(), MPFR_RNDN);
  const double d = mpfr_get_d(tmp, MPFR_RNDN);
  mpfr_clear(tmp);
  return d;
}

double step_size(std::uint64_t l, const ProblemSpec& spec) {
  const double ld = static_cast<double>(l);
  const double power = spec.nu() == 1.0 ? ld : std::pow(ld, spec.nu());
  return spec.step_product() / power;
}

double step_factor(std::uint64_t l, const ProblemSpec& spec) { return 1.0 - step_size(l, spec); }

std::vector<std::uint64_t> dyadic_checkpoints(unsigned k_max) {
  if (k_max > 62) throw std::invalid_argument("k_max must be at most 62");
  std::vector<std::uint64_t> out;
  for (unsigned k = 0; k <= k_max; ++k) out.push_back(std::uint64_t{1} << k);
  return out;
}

namespace {

void require_checkpoints(std::span<const std::uint64_t> checkpoints) {
  if (checkpoints.empty()) throw std::invalid_argument("checkpoints must be nonempty");
  for (std::size_t i = 0; i < checkpoints.size(); ++i) {
    if (checkpoints[i] < 1) throw std::invalid_argument("checkpoints must be positive");
    if (i && checkpoints[i] <= checkpoints[i - 1])
      throw std::invalid_argument("checkpoints must be strictly increasing");
  }
}

}  // namespace

ErrorCurve exact_mse_curve(const ProblemSpec& spec, std::span<const std::uint64_t> checkpoints,
                           const StepFactorFn& factor) {
  require_checkpoints(checkpoints);
  ErrorCurve curve(CurveMeaning::ExactMSE);
  const double sigma2 = spec.sigma2();
  double e = spec.initial_error();
  std::uint64_t n = 0;
  for (std::uint64_t target : checkpoints) {
    for (; n < target;) {
      ++n;
      const double f = factor(n, spec);
      const double s = step_size(n, spec);
      e = f * f * e + s * s * sigma2;
    }
    curve.push(target, e);
  }
  return curve;
}

double exact_mse_closed_form(const ProblemSpec& spec, std::uint64_t n) {
  return product_sum<double>(
      n, [&](std::uint64_t l) { return step_size(l, spec); }, spec.initial_error(), spec.sigma2());
}

RationalSchedule::RationalSchedule(const ProblemSpec& spec)
    : spec_(&spec), step_product_(to_rational(spec.gamma()) * to_rational(spec.alpha())) {
  const double nu = spec.nu();
  if (nu == std::floor(nu) && nu <= 16.0) integer_nu_ = static_cast<unsigned long>(nu);
}

Rational RationalSchedule::operator()(std::uint64_t l) const {
  if (integer_nu_ == 0) return to_rational(step_size(l, *spec_));
  mpz_class power;
  mpz_ui_pow_ui(power.get_mpz_t(), static_cast<unsigned long>(l), integer_nu_);
  Rational r = step_product_ / Rational(power);
  r.canonicalize();
  return r;
}

namespace {

Rational rational_initial_error(const ProblemSpec& spec) {
  Rational s = 0;
  for (std::size_t i = 0; i < spec.dimension(); ++i) {
    const Rational d = to_rational(spec.xi()[i]) - to_rational(spec.mu()[i]);
    s += d * d;
  }
  return s;
}

// sigma2 from the model parameters, exactly where the kind allows it.
Rational rational_sigma2(const NoiseModel& noise) {
  switch (noise.kind()) {
    case NoiseKind::PointMass: return 0;
    case NoiseKind::TwoPoint: {
      Rational s = 0;
      for (double o : noise.offset()) s += to_rational(o) * to_rational(o);
      return s;
    }
    case NoiseKind::UniformBox: {
      const Rational h = to_rational(noise.half_width());
      return Rational(static_cast<long>(noise.dimension())) * h * h / 3;
    }
    case NoiseKind::Gaussian:
      return Rational(static_cast<long>(noise.dimension())) * to_rational(noise.scale());
    case NoiseKind::DiscreteEmpirical: break;
  }
  return to_rational(noise.sigma2());
}

}  // namespace

std::vector<Rational> exact_mse_recursion_rational(const ProblemSpec& spec, std::uint64_t n_max) {
  const RationalSchedule step(spec);
  return mse_recursion<Rational>(n_max, step, rational_initial_error(spec),
                                 rational_sigma2(spec.noise()));
}

Rational exact_mse_closed_form_rational(const ProblemSpec& spec, std::uint64_t n) {
  const RationalSchedule step(spec);
  return product_sum<Rational>(n, step, rational_initial_error(spec), rational_sigma2(spec.noise()));
}

std::vector<Rational> exact_mse_closed_form_all_rational(const ProblemSpec& spec,
                                                         std::uint64_t n_max) {
  const RationalSchedule step(spec);
  return product_sum_prefix<Rational>(n_max, step, rational_initial_error(spec),
                                      rational_sigma2(spec.noise()));
}

ErrorCurve exact_mse_curve_rational(const ProblemSpec& spec,
                                    std::span<const std::uint64_t> checkpoints) {
  require_checkpoints(checkpoints);
  const auto e = exact_mse_recursion_rational(spec, checkpoints.back());
  ErrorCurve curve(CurveMeaning::ExactMSE);
  for (std::uint64_t n : checkpoints) curve.push(n, to_double(e[n]));
  return curve;
}

double lower_bound_functional(double beta, double nu, std::uint64_t n) {
  if (!(nu > 0.0 && nu <= 1.0)) throw std::invalid_argument("lower-bound functional needs 0 < nu <= 1");
  if (!(beta > 0.0)) throw std::invalid_argument("lower-bound functional needs beta > 0");
  if (n < 1) throw std::invalid_argument("lower-bound functional needs n >= 1");
  auto step = [&](std::uint64_t l) {
    const double ld = static_cast<double>(l);
    return beta / (nu == 1.0 ? ld : std::pow(ld, nu));
  };
  const double sum = product_sum<double>(n, step, 0.0, 1.0);
  const double nd = static_cast<double>(n);
  return (nu == 1.0 ? nd : std::pow(nd, nu)) * sum;
}

Rational lower_bound_functional_rational(const Rational& beta, unsigned long nu, std::uint64_t n) {
  if (nu != 1) throw std::invalid_argument("exact lower-bound functional needs nu = 1");
  if (beta <= 0) throw std::invalid_argument("lower-bound functional needs beta > 0");
  if (n < 1) throw std::invalid_argument("lower-bound functional needs n >= 1");
  auto step = [&](std::uint64_t l) {
    Rational r = beta / Rational(static_cast<unsigned long>(l));
    r.canonicalize();
    return r;
  };
  const Rational sum = product_sum<Rational>(n, step, Rational(0), Rational(1));
  return Rational(static_cast<unsigned long>(n)) * sum;
}

double lower_bound_constant(double beta, double nu) {
  return beta * beta * std::exp(-std::pow(2.0, nu) * beta) / 4.0;
}

bool DeterministicGdSpec::step_product_is_integer() const {
  const double p = spec.step_product();
  return p >= 1.0 && p == std::floor(p);
}

ErrorCurve deterministic_gd_distance(const DeterministicGdSpec& dspec,
                                     std::span<const std::uint64_t> checkpoints) {
  const auto& spec = dspec.spec;
  if (spec.nu() != 1.0) throw std::invalid_argument("deterministic GD distance needs nu = 1");
  if (dspec.target.size() != spec.dimension())
    throw std::invalid_argument("deterministic GD target has the wrong dimension");
  require_checkpoints(checkpoints);

  double dist = std::sqrt(squared_distance(spec.xi(), dspec.target));
  ErrorCurve curve(CurveMeaning::DeterministicDistance);
  std::uint64_t l = 0;
  for (std::uint64_t target : checkpoints) {
    for (; l < target;) {
      ++l;
      dist *= std::abs(step_factor(l, spec));
    }
    curve.push(target, dist);
  }
  return curve;
}

}  // namespace sgdrates
