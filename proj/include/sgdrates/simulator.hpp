#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "sgdrates/core_model.hpp"
#include "sgdrates/rng.hpp"

namespace sgdrates {

/// Recorded in output metadata so the sampled byte stream is identifiable.
inline constexpr const char* kGaussianMethod = "marsaglia-polar";

/// One draw of X into `out` (length d). Paths draw two-point noise one bit
/// at a time, so a sequence of these calls is not a path's noise sequence.
void sample_noise(const NoiseModel& model, RandomStream& stream, std::span<double> out);
Vector sample_noise(const NoiseModel& model, RandomStream& stream);

/// Theta_0 = xi, Theta_n = Theta_{n-1} - (gamma/n^nu) alpha (Theta_{n-1} - X_n),
/// with X_n drawn from a stream keyed by `path_seed`. Returns Theta at each
/// checkpoint.
std::vector<Vector> simulate_path(const ProblemSpec& spec, std::uint64_t path_seed,
                                  std::span<const std::uint64_t> checkpoints);

class SimulationPlan {
 public:
  SimulationPlan(ProblemSpec spec, std::vector<std::uint64_t> checkpoints, std::uint64_t num_paths,
                 std::uint64_t base_seed);

  const ProblemSpec& spec() const { return spec_; }
  const std::vector<std::uint64_t>& checkpoints() const { return checkpoints_; }
  std::uint64_t num_paths() const { return num_paths_; }
  std::uint64_t base_seed() const { return base_seed_; }

 private:
  ProblemSpec spec_;
  std::vector<std::uint64_t> checkpoints_;
  std::uint64_t num_paths_;
  std::uint64_t base_seed_;
};

struct McEstimate {
  ErrorCurve curve{CurveMeaning::MonteCarloMSE};
  std::vector<double> sample_variance;  // of |Theta_n - mu|^2, per checkpoint
  std::uint64_t num_paths = 0;
};

/// Mean of |Theta_n - mu|^2 over independent paths; path i is keyed by
/// derive_path_seed(base_seed, i). Paths run under OpenMP (`threads` = 0 uses
/// the OpenMP default); the reduction runs in path order, so the result is
/// bit-identical for every thread count.
McEstimate mc_mse_estimate(const SimulationPlan& plan, int threads = 0);

/// Single-threaded reference for mc_mse_estimate.
McEstimate mc_mse_estimate_serial(const SimulationPlan& plan);

}  // namespace sgdrates
