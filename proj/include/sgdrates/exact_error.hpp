#pragma once

#include <gmpxx.h>

#include <cstdint>
#include <functional>
#include <span>
#include <stdexcept>
#include <vector>

#include "sgdrates/core_model.hpp"

namespace sgdrates {

using Rational = mpq_class;

/// Exact value of a double as a rational.
Rational to_rational(double x);
/// Correctly rounded (to nearest) conversion.
double to_double(const Rational& q);

/// Effective step gamma * alpha / l^nu multiplying (X_l - Theta_{l-1}).
double step_size(std::uint64_t l, const ProblemSpec& spec);
/// 1 - gamma * alpha / l^nu. Negative for small l when gamma * alpha > l^nu.
double step_factor(std::uint64_t l, const ProblemSpec& spec);

using StepFactorFn = std::function<double(std::uint64_t, const ProblemSpec&)>;

/// Dyadic checkpoints 2^0, ..., 2^k_max.
std::vector<std::uint64_t> dyadic_checkpoints(unsigned k_max);

/// e_n = E|Theta_n - mu|^2 by iterating
///   e_n = f_n^2 e_{n-1} + s_n^2 sigma2,  e_0 = |xi - mu|^2,
/// with f_n = factor(n, spec) and s_n = step_size(n, spec). `factor` exists
/// so the verification driver can inject a corrupted factor.
ErrorCurve exact_mse_curve(const ProblemSpec& spec, std::span<const std::uint64_t> checkpoints,
                           const StepFactorFn& factor = step_factor);

/// Product-sum form of e_n, evaluated right to left with a running suffix
/// product in O(n).
double exact_mse_closed_form(const ProblemSpec& spec, std::uint64_t n);

// ---------------------------------------------------------------------------
// Shared algorithms, generic over the scalar (double or Rational).
// `step(l)` returns s_l for l >= 1; the factor is 1 - s_l.

/// [prod_{l<=n} (1-s_l)]^2 e0 + sigma2 sum_{k<=n} [s_k prod_{k<l<=n} (1-s_l)]^2
template <class T, class StepFn>
T product_sum(std::uint64_t n, StepFn&& step, const T& e0, const T& sigma2) {
  T suffix = 1;
  T sum = 0;
  for (std::uint64_t k = n; k >= 1; --k) {
    const T s = step(k);
    const T term = s * suffix;
    sum += term * term;
    suffix *= T(1 - s);
  }
  return T(suffix * suffix * e0 + sigma2 * sum);
}

/// Recursion e_n = (1-s_n)^2 e_{n-1} + s_n^2 sigma2 for n = 1..n_max; returns
/// e_0..e_{n_max}.
template <class T, class StepFn>
std::vector<T> mse_recursion(std::uint64_t n_max, StepFn&& step, const T& e0, const T& sigma2) {
  std::vector<T> e;
  e.reserve(n_max + 1);
  e.push_back(e0);
  for (std::uint64_t n = 1; n <= n_max; ++n) {
    const T s = step(n);
    const T f = 1 - s;
    e.push_back(T(f * f * e.back() + s * s * sigma2));
  }
  return e;
}

/// Product-sum form for every n = 0..n_max in one pass:
///   e_n = P_n^2 [e0 + sigma2 sum_{k<=n} (s_k / P_k)^2],  P_n = prod_{l<=n} (1-s_l),
/// restarted after each vanishing factor (earlier terms are annihilated).
template <class T, class StepFn>
std::vector<T> product_sum_prefix(std::uint64_t n_max, StepFn&& step, const T& e0, const T& sigma2) {
  std::vector<T> e;
  e.reserve(n_max + 1);
  e.push_back(e0);
  T prefix = 1;
  T start = e0;  // e0 until the first vanishing factor, 0 afterwards
  T sum = 0;
  for (std::uint64_t n = 1; n <= n_max; ++n) {
    const T s = step(n);
    const T f = 1 - s;
    if (f == 0) {
      prefix = 1;
      start = 0;
      sum = s * s;
    } else {
      prefix *= f;
      const T r = s / prefix;
      sum += r * r;
    }
    e.push_back(T(prefix * prefix * (start + sigma2 * sum)));
  }
  return e;
}

// ---------------------------------------------------------------------------
// Rational mode.

/// s_l as an exact rational. For integer nu the value gamma*alpha/l^nu is
/// exact; otherwise it is the exact value of the double step_size(l, spec).
class RationalSchedule {
 public:
  explicit RationalSchedule(const ProblemSpec& spec);
  Rational operator()(std::uint64_t l) const;
  bool exact_powers() const { return integer_nu_ > 0; }

 private:
  const ProblemSpec* spec_;
  Rational step_product_;
  unsigned long integer_nu_ = 0;
};

/// e_0..e_{n_max} by exact recursion.
std::vector<Rational> exact_mse_recursion_rational(const ProblemSpec& spec, std::uint64_t n_max);
/// Suffix-product closed form at a single n.
Rational exact_mse_closed_form_rational(const ProblemSpec& spec, std::uint64_t n);
/// Prefix closed form at every n = 0..n_max.
std::vector<Rational> exact_mse_closed_form_all_rational(const ProblemSpec& spec,
                                                         std::uint64_t n_max);
/// Exact curve rounded to double at the checkpoints.
ErrorCurve exact_mse_curve_rational(const ProblemSpec& spec,
                                    std::span<const std::uint64_t> checkpoints);

// ---------------------------------------------------------------------------
// Generic affine recursion e_n = a_n e_{n-1} + b_n in R^d.

template <class T>
struct AffineRecursionSpec {
  std::vector<T> multipliers;           // a_1, a_2, ...
  std::vector<std::vector<T>> offsets;  // b_1, b_2, ...
  std::vector<T> start;                 // e_0
};

/// [prod_{l<=n} a_l] e_0 + sum_{k<=n} [prod_{k<l<=n} a_l] b_k
template <class T>
std::vector<T> affine_recursion_closed_form(const AffineRecursionSpec<T>& rec, std::size_t n) {
  if (rec.multipliers.size() < n || rec.offsets.size() < n)
    throw std::invalid_argument("affine recursion: sequences shorter than n");
  const std::size_t dim = rec.start.size();
  std::vector<T> out(dim, T(0));
  T suffix = 1;
  for (std::size_t k = n; k >= 1; --k) {
    const auto& b = rec.offsets[k - 1];
    if (b.size() != dim) throw std::invalid_argument("affine recursion: offset dimension mismatch");
    for (std::size_t i = 0; i < dim; ++i) out[i] += suffix * b[i];
    suffix *= rec.multipliers[k - 1];
  }
  for (std::size_t i = 0; i < dim; ++i) out[i] += suffix * rec.start[i];
  return out;
}

template <class T>
std::vector<T> affine_recursion_iterate(const AffineRecursionSpec<T>& rec, std::size_t n) {
  if (rec.multipliers.size() < n || rec.offsets.size() < n)
    throw std::invalid_argument("affine recursion: sequences shorter than n");
  std::vector<T> e = rec.start;
  for (std::size_t k = 1; k <= n; ++k) {
    const auto& b = rec.offsets[k - 1];
    if (b.size() != e.size()) throw std::invalid_argument("affine recursion: offset dimension mismatch");
    for (std::size_t i = 0; i < e.size(); ++i) e[i] = rec.multipliers[k - 1] * e[i] + b[i];
  }
  return e;
}

// ---------------------------------------------------------------------------
// Lower-bound functional n^nu sum_{k<=n} [(beta/k^nu) prod_{k<l<=n} (1-beta/l^nu)]^2.

double lower_bound_functional(double beta, double nu, std::uint64_t n);
/// Exact version for integer nu (0 < nu <= 1 means nu == 1 here).
Rational lower_bound_functional_rational(const Rational& beta, unsigned long nu, std::uint64_t n);
/// beta^2 exp(-2^nu beta) / 4
double lower_bound_constant(double beta, double nu);

// ---------------------------------------------------------------------------
// Deterministic gradient descent on f(theta) = alpha/2 |theta - target|^2 + offset.

struct DeterministicGdSpec {
  ProblemSpec spec;
  Vector target;
  double offset = 0.0;

  /// The lower bound for deterministic GD needs gamma * alpha not a positive integer.
  bool step_product_is_integer() const;
};

/// |Theta_n - target| = prod_{l<=n} |1 - gamma alpha / l| |xi - target| at the
/// checkpoints. Requires nu == 1.
ErrorCurve deterministic_gd_distance(const DeterministicGdSpec& dspec,
                                     std::span<const std::uint64_t> checkpoints);

}  // namespace sgdrates
