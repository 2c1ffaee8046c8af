#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "sgdrates/core_model.hpp"

namespace sgdrates::cli {

/// Invalid configuration; maps to exit code 2.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class ArithmeticMode { Float, Rational };
enum class CurveSource { Exact, MonteCarlo };

/// Flat `key = value` settings. Later layers override earlier ones.
using Settings = std::map<std::string, std::string>;

/// Reads a config file: one `key = value` per line, `#` starts a comment,
/// blank lines ignored. Dashes in keys are normalized to underscores.
Settings read_config_file(const std::string& path);

/// Rational mode is limited to checkpoints <= 2^14.
inline constexpr std::uint64_t kRationalMaxCheckpoint = std::uint64_t{1} << 14;

struct RunConfig {
  double alpha = 1.0;
  double gamma = 1.0;
  double nu = 1.0;
  std::size_t dim = 1;
  Vector xi;  // empty: all ones
  std::string noise = "twopoint";
  unsigned k_max = 20;
  std::vector<std::uint64_t> checkpoints;  // explicit list overrides k_max
  std::uint64_t paths = 10000;
  std::uint64_t seed = 42;
  double epsilon = 0.05;
  ArithmeticMode mode = ArithmeticMode::Float;
  CurveSource source = CurveSource::Exact;
  std::string out = ".";
  int jobs = 1;
  std::vector<double> sweep_gamma;
  std::vector<double> sweep_nu;
  std::vector<std::string> sweep_noise;
  bool sweep_grid_given_empty = false;
  bool fault_step_sign = false;

  /// Builds a config from settings; unknown keys and bad values throw
  /// ConfigError. The seed falls back to $SGDRATES_SEED, then 42.
  static RunConfig from_settings(const Settings& settings);

  ProblemSpec problem() const;
  ProblemSpec problem(double gamma_value, double nu_value, const std::string& noise_text) const;
  std::vector<std::uint64_t> resolved_checkpoints() const;
  /// Result-affecting fields, in a fixed order, for provenance headers.
  std::vector<std::pair<std::string, std::string>> resolved() const;
};

std::string to_string(ArithmeticMode mode);
std::string to_string(CurveSource source);

}  // namespace sgdrates::cli
