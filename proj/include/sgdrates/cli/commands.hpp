#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "sgdrates/cli/config.hpp"

namespace sgdrates::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitCheckFailed = 1;
inline constexpr int kExitConfigError = 2;

/// exact_curve.csv: `n,mse`
int cmd_exact(const RunConfig& config, std::ostream& log);
/// mc_curve.csv: `n,mse,stderr,num_paths`, plus mc_curve.meta
int cmd_simulate(const RunConfig& config, std::ostream& log);
/// rates.csv: `gamma,nu,alpha,regime,r0,r1,fitted_mse_exponent,verdict`
int cmd_rates(const RunConfig& config, std::ostream& log);
/// verify_report.txt; exit 0 iff every check passes.
int cmd_verify(const RunConfig& config, std::ostream& log);
/// sweep.csv plus plotdata/<spec>.csv
int cmd_sweep(const RunConfig& config, std::ostream& log);

/// Dispatches by name; ConfigError becomes exit code 2.
int run_command(const std::string& name, const Settings& settings, std::ostream& log,
                std::ostream& err);

struct CheckResult {
  std::string name;       // stable identifier, e.g. "oracle-agreement"
  std::string statement;  // the property being checked
  bool passed = false;
  std::string margin;     // "exact", or a measured slack
};

/// The full verification suite used by `verify`.
std::vector<CheckResult> run_verification_suite(const RunConfig& config);

}  // namespace sgdrates::cli
