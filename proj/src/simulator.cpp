#include "sgdrates/simulator.hpp"

#include <omp.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <stdexcept>

namespace sgdrates {

namespace {

double standard_normal_pair(RandomStream& stream, double& second) {
  for (;;) {
    const double u = 2.0 * stream.next_uniform32() - 1.0;
    const double v = 2.0 * stream.next_uniform32() - 1.0;
    const double s = u * u + v * v;
    if (s > 0.0 && s < 1.0) {
      const double m = std::sqrt(-2.0 * std::log(s) / s);
      second = v * m;
      return u * m;
    }
  }
}

std::vector<double> learning_rates(const ProblemSpec& spec, std::uint64_t n_max) {
  std::vector<double> rates(n_max + 1, 0.0);
  for (std::uint64_t n = 1; n <= n_max; ++n) {
    const double nd = static_cast<double>(n);
    rates[n] = spec.gamma() / (spec.nu() == 1.0 ? nd : std::pow(nd, spec.nu()));
  }
  return rates;
}

void require_checkpoints(std::span<const std::uint64_t> checkpoints) {
  if (checkpoints.empty()) throw std::invalid_argument("checkpoints must be nonempty");
  for (std::size_t i = 0; i < checkpoints.size(); ++i) {
    if (checkpoints[i] < 1) throw std::invalid_argument("checkpoints must be positive");
    if (i && checkpoints[i] <= checkpoints[i - 1])
      throw std::invalid_argument("checkpoints must be strictly increasing");
  }
}

// Per-kind draws. Each writes one sample of X into out[0..dim).
struct PointDraw {
  const double* mean;
  std::size_t dim;
  void operator()(RandomStream&, double* out) const { std::copy(mean, mean + dim, out); }
};

// One random bit per draw, taken from the high end of each 32-bit word.
struct TwoPointDraw {
  const double* mean;
  const double* offset;
  std::size_t dim;
  std::uint32_t bits = 0;
  int left = 0;
  void operator()(RandomStream& stream, double* out) {
    if (left == 0) {
      bits = stream.next_u32();
      left = 32;
    }
    const double sign = static_cast<double>(static_cast<int>(bits >> 30 & 2u) - 1);
    bits <<= 1;
    --left;
    for (std::size_t i = 0; i < dim; ++i) out[i] = mean[i] + sign * offset[i];
  }
};

struct UniformDraw {
  const double* mean;
  double half;
  std::size_t dim;
  void operator()(RandomStream& stream, double* out) const {
    for (std::size_t i = 0; i < dim; ++i) out[i] = mean[i] + half * (2.0 * stream.next_uniform32() - 1.0);
  }
};

// Normals come in polar pairs; the second of a pair feeds the next coordinate,
// carrying over to the next draw when d is odd.
struct GaussianDraw {
  const double* mean;
  double sd;
  std::size_t dim;
  double spare = 0.0;
  bool has_spare = false;
  void operator()(RandomStream& stream, double* out) {
    for (std::size_t i = 0; i < dim; ++i) {
      double z;
      if (has_spare) {
        z = spare;
        has_spare = false;
      } else {
        z = standard_normal_pair(stream, spare);
        has_spare = true;
      }
      out[i] = mean[i] + sd * z;
    }
  }
};

struct DiscreteDraw {
  const NoiseModel* model;
  void operator()(RandomStream& stream, double* out) const {
    const auto& cdf = model->cumulative_weights();
    const double u = stream.next_uniform32();
    std::size_t idx = 0;
    if (cdf.size() <= 16) {
      // count of cdf[j] <= u, i.e. upper_bound without branches
      for (std::size_t j = 0; j + 1 < cdf.size(); ++j) idx += cdf[j] <= u;
    } else {
      auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
      idx = std::min<std::size_t>(static_cast<std::size_t>(it - cdf.begin()), cdf.size() - 1);
    }
    const auto& pt = model->points()[idx];
    std::copy(pt.begin(), pt.end(), out);
  }
};

// Calls fn with the draw functor for the model's kind.
template <class Fn>
decltype(auto) with_draw(const NoiseModel& model, Fn&& fn) {
  const double* mean = model.mean().data();
  const std::size_t dim = model.dimension();
  switch (model.kind()) {
    case NoiseKind::PointMass: return fn(PointDraw{mean, dim});
    case NoiseKind::TwoPoint: return fn(TwoPointDraw{mean, model.offset().data(), dim});
    case NoiseKind::UniformBox: return fn(UniformDraw{mean, model.half_width(), dim});
    case NoiseKind::Gaussian: return fn(GaussianDraw{mean, std::sqrt(model.scale()), dim});
    case NoiseKind::DiscreteEmpirical: break;
  }
  return fn(DiscreteDraw{&model});
}

template <class Draw, class Visit>
void run_path_with(Draw draw, const ProblemSpec& spec, std::span<const double> rates, std::uint64_t seed,
                   std::span<const std::uint64_t> checkpoints, Visit& visit) {
  const std::size_t dim = spec.dimension();
  const double alpha = spec.alpha();
  Vector theta = spec.xi();
  Vector x(dim);
  double* t = theta.data();
  double* xp = x.data();
  RandomStream stream(seed);
  std::uint64_t n = 0;
  for (std::size_t c = 0; c < checkpoints.size(); ++c) {
    const std::uint64_t stop = checkpoints[c];
    if (dim == 1) {
      double t0 = t[0];
      for (; n < stop;) {
        ++n;
        draw(stream, xp);
        t0 -= rates[n] * (alpha * (t0 - xp[0]));
      }
      t[0] = t0;
    } else {
      for (; n < stop;) {
        ++n;
        draw(stream, xp);
        const double rate = rates[n];
        for (std::size_t i = 0; i < dim; ++i) t[i] -= rate * (alpha * (t[i] - xp[i]));
      }
    }
    visit(c, std::span<const double>(theta));
  }
}

// Runs one path and calls visit(checkpoint_index, theta) at each checkpoint.
template <class Visit>
void run_path(const ProblemSpec& spec, std::span<const double> rates, std::uint64_t seed,
              std::span<const std::uint64_t> checkpoints, Visit&& visit) {
  with_draw(spec.noise(), [&](auto draw) { run_path_with(draw, spec, rates, seed, checkpoints, visit); });
}

McEstimate reduce(const SimulationPlan& plan, const std::vector<double>& sq) {
  const std::size_t m = plan.checkpoints().size();
  const std::uint64_t paths = plan.num_paths();
  McEstimate est;
  est.num_paths = paths;
  for (std::size_t c = 0; c < m; ++c) {
    double sum = 0.0;
    for (std::uint64_t p = 0; p < paths; ++p) sum += sq[p * m + c];
    const double mean = sum / static_cast<double>(paths);
    double ss = 0.0;
    for (std::uint64_t p = 0; p < paths; ++p) {
      const double d = sq[p * m + c] - mean;
      ss += d * d;
    }
    const double var = ss / static_cast<double>(paths - 1);
    est.sample_variance.push_back(var);
    est.curve.push(plan.checkpoints()[c], mean, std::sqrt(var / static_cast<double>(paths)));
  }
  return est;
}

void path_kernel(const SimulationPlan& plan, std::span<const double> rates, std::uint64_t p,
                 std::span<double> row) {
  const auto& mu = plan.spec().mu();
  run_path(plan.spec(), rates, derive_path_seed(plan.base_seed(), p), plan.checkpoints(),
           [&](std::size_t c, std::span<const double> theta) { row[c] = squared_distance(theta, mu); });
}

// Up to kBatch one-dimensional paths stepped in lockstep. Each path does the
// same arithmetic as run_path; interleaving only hides the latency of the
// per-path update chain.
constexpr std::size_t kBatch = 8;

template <class Draw>
void run_batch_1d(const Draw& proto, const SimulationPlan& plan, std::span<const double> rates,
                  std::uint64_t first, std::size_t count, std::span<double> rows) {
  const ProblemSpec& spec = plan.spec();
  const auto& cps = plan.checkpoints();
  const std::size_t m = cps.size();
  const double alpha = spec.alpha();
  const double mu = spec.mu()[0];
  std::vector<RandomStream> streams;
  streams.reserve(count);
  std::array<Draw, kBatch> draws;
  std::array<double, kBatch> t, x;
  for (std::size_t k = 0; k < count; ++k) {
    streams.emplace_back(derive_path_seed(plan.base_seed(), first + k));
    draws[k] = proto;
    t[k] = spec.xi()[0];
  }
  std::uint64_t n = 0;
  for (std::size_t c = 0; c < m; ++c) {
    for (; n < cps[c];) {
      ++n;
      const double rate = rates[n];
      if (count == kBatch) {
#pragma GCC unroll 8
        for (std::size_t k = 0; k < kBatch; ++k) draws[k](streams[k], &x[k]);
#pragma GCC unroll 8
        for (std::size_t k = 0; k < kBatch; ++k) t[k] -= rate * (alpha * (t[k] - x[k]));
      } else {
        for (std::size_t k = 0; k < count; ++k) {
          draws[k](streams[k], &x[k]);
          t[k] -= rate * (alpha * (t[k] - x[k]));
        }
      }
    }
    for (std::size_t k = 0; k < count; ++k) {
      const double d = t[k] - mu;
      rows[k * m + c] = 0.0 + d * d;
    }
  }
}

// Paths [first, first + count) into rows (count x checkpoints).
void path_block_kernel(const SimulationPlan& plan, std::span<const double> rates, std::uint64_t first,
                       std::size_t count, std::span<double> rows) {
  if (plan.spec().dimension() == 1) {
    with_draw(plan.spec().noise(), [&](auto draw) { run_batch_1d(draw, plan, rates, first, count, rows); });
    return;
  }
  const std::size_t m = plan.checkpoints().size();
  for (std::size_t k = 0; k < count; ++k) path_kernel(plan, rates, first + k, rows.subspan(k * m, m));
}

}  // namespace

void sample_noise(const NoiseModel& model, RandomStream& stream, std::span<double> out) {
  with_draw(model, [&](auto draw) { draw(stream, out.data()); });
}

Vector sample_noise(const NoiseModel& model, RandomStream& stream) {
  Vector out(model.dimension());
  sample_noise(model, stream, out);
  return out;
}

std::vector<Vector> simulate_path(const ProblemSpec& spec, std::uint64_t path_seed,
                                  std::span<const std::uint64_t> checkpoints) {
  require_checkpoints(checkpoints);
  const auto rates = learning_rates(spec, checkpoints.back());
  std::vector<Vector> out;
  out.reserve(checkpoints.size());
  run_path(spec, rates, path_seed, checkpoints, [&](std::size_t, std::span<const double> theta) {
    out.emplace_back(theta.begin(), theta.end());
  });
  return out;
}

SimulationPlan::SimulationPlan(ProblemSpec spec, std::vector<std::uint64_t> checkpoints,
                               std::uint64_t num_paths, std::uint64_t base_seed)
    : spec_(std::move(spec)),
      checkpoints_(std::move(checkpoints)),
      num_paths_(num_paths),
      base_seed_(base_seed) {
  require_checkpoints(checkpoints_);
  if (num_paths_ < 2) throw std::invalid_argument("num_paths must be at least 2");
}

McEstimate mc_mse_estimate_serial(const SimulationPlan& plan) {
  const std::size_t m = plan.checkpoints().size();
  const auto rates = learning_rates(plan.spec(), plan.checkpoints().back());
  std::vector<double> sq(plan.num_paths() * m);
  for (std::uint64_t p = 0; p < plan.num_paths(); ++p)
    path_kernel(plan, rates, p, std::span<double>(sq).subspan(p * m, m));
  return reduce(plan, sq);
}

McEstimate mc_mse_estimate(const SimulationPlan& plan, int threads) {
  const std::size_t m = plan.checkpoints().size();
  const auto rates = learning_rates(plan.spec(), plan.checkpoints().back());
  std::vector<double> sq(plan.num_paths() * m);
  const int team = threads > 0 ? threads : omp_get_max_threads();
  const auto blocks = static_cast<std::int64_t>((plan.num_paths() + kBatch - 1) / kBatch);
#pragma omp parallel for schedule(dynamic, 8) num_threads(team)
  for (std::int64_t b = 0; b < blocks; ++b) {
    const std::uint64_t first = static_cast<std::uint64_t>(b) * kBatch;
    const auto count = static_cast<std::size_t>(std::min<std::uint64_t>(kBatch, plan.num_paths() - first));
    path_block_kernel(plan, rates, first, count, std::span<double>(sq).subspan(first * m, count * m));
  }
  return reduce(plan, sq);
}

}  // namespace sgdrates
