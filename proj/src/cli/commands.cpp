#include "sgdrates/cli/commands.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <tuple>

#include "sgdrates/exact_error.hpp"
#include "sgdrates/format.hpp"
#include "sgdrates/rate_analysis.hpp"
#include "sgdrates/simulator.hpp"

#ifndef SGDRATES_VERSION
#define SGDRATES_VERSION "0.1.0"
#endif

namespace fs = std::filesystem;

namespace sgdrates::cli {

namespace {

fs::path prepare_out_dir(const RunConfig& config) {
  fs::path dir(config.out);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw ConfigError("output directory '" + config.out + "' is not writable");
  return dir;
}

std::string provenance(const std::string& command, const RunConfig& config) {
  std::string out = "# sgdrates " + command + "\n";
  for (const auto& [k, v] : config.resolved()) out += "# " + k + " = " + v + "\n";
  return out;
}

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw ConfigError("cannot write '" + path.string() + "'");
  f << content;
  if (!f) throw ConfigError("failed writing '" + path.string() + "'");
}

ErrorCurve exact_curve_for(const ProblemSpec& spec, const RunConfig& config) {
  const auto cps = config.resolved_checkpoints();
  if (config.mode == ArithmeticMode::Rational) return exact_mse_curve_rational(spec, cps);
  return exact_mse_curve(spec, cps);
}

ErrorCurve curve_for(const ProblemSpec& spec, const RunConfig& config, int threads) {
  if (config.source == CurveSource::Exact) return exact_curve_for(spec, config);
  const SimulationPlan plan(spec, config.resolved_checkpoints(), config.paths, config.seed);
  return mc_mse_estimate(plan, threads).curve;
}

std::string curve_csv(const ErrorCurve& curve) {
  std::string out = "n,mse\n";
  for (const auto& p : curve.points()) out += std::to_string(p.n) + "," + format_double(p.value) + "\n";
  return out;
}

struct RateRow {
  double gamma = 0.0;
  double nu = 0.0;
  std::size_t noise_index = 0;
  std::string noise_kind;
  std::string line;  // without noise column
  bool error = false;
  bool fail = false;
};

RateRow rate_row(const RunConfig& config, double gamma, double nu, std::size_t noise_index,
                 const std::string& noise, int threads, const fs::path* plot_dir) {
  RateRow row;
  row.gamma = gamma;
  row.nu = nu;
  row.noise_index = noise_index;
  const std::string head = format_double(gamma) + "," + format_double(nu) + "," + format_double(config.alpha);
  try {
    const ProblemSpec spec = config.problem(gamma, nu, noise);
    row.noise_kind = to_string(spec.noise().kind());
    const ErrorCurve curve = curve_for(spec, config, threads);
    if (plot_dir) {
      RunConfig point = config;
      point.gamma = gamma;
      point.nu = nu;
      point.noise = noise;
      const std::string name = "gamma" + format_double(gamma) + "_nu" + format_double(nu) + "_noise" +
                               std::to_string(noise_index) + ".csv";
      write_file(*plot_dir / name, provenance("sweep", point) + curve_csv(curve));
    }
    const RegimeReport rep = classify_regime(spec, curve, config.epsilon);
    row.fail = rep.verdict == Verdict::Fail;
    row.line = head + "," + to_string(rep.band.regime) + "," + format_double(rep.band.r0) + "," +
               format_double(rep.band.r1) + "," + format_double(rep.fitted_mse_exponent) + "," +
               to_string(rep.verdict);
  } catch (const std::exception& e) {
    row.error = true;
    if (row.noise_kind.empty()) row.noise_kind = "invalid";
    row.line = head + ",,,,,ERROR";
  }
  return row;
}

const char* kRatesHeader = "gamma,nu,alpha,regime,r0,r1,fitted_mse_exponent,verdict";

}  // namespace

int cmd_exact(const RunConfig& config, std::ostream& log) {
  const fs::path dir = prepare_out_dir(config);
  const ErrorCurve curve = exact_curve_for(config.problem(), config);
  write_file(dir / "exact_curve.csv", provenance("exact", config) + curve_csv(curve));
  log << "wrote " << (dir / "exact_curve.csv").string() << " (" << curve.size() << " rows, "
      << to_string(config.mode) << " mode)\n";
  return kExitOk;
}

int cmd_simulate(const RunConfig& config, std::ostream& log) {
  const fs::path dir = prepare_out_dir(config);
  const SimulationPlan plan(config.problem(), config.resolved_checkpoints(), config.paths, config.seed);
  const McEstimate est = mc_mse_estimate(plan, config.jobs);

  std::string csv = provenance("simulate", config) + "n,mse,stderr,num_paths\n";
  for (const auto& p : est.curve.points()) {
    csv += std::to_string(p.n) + "," + format_double(p.value) + "," + format_double(*p.std_error) + "," +
           std::to_string(est.num_paths) + "\n";
  }
  write_file(dir / "mc_curve.csv", csv);

  std::string meta = provenance("simulate", config);
  meta += "seed = " + std::to_string(config.seed) + "\n";
  meta += std::string("rng = ") + Philox4x32::name + "\n";
  meta += "path_seed = splitmix64(seed ^ splitmix64(path_index))\n";
  meta += std::string("gaussian_method = ") + kGaussianMethod + "\n";
  meta += std::string("version = ") + SGDRATES_VERSION + "\n";
  write_file(dir / "mc_curve.meta", meta);
  log << "wrote " << (dir / "mc_curve.csv").string() << " (" << est.curve.size() << " rows, "
      << est.num_paths << " paths)\n";
  return kExitOk;
}

int cmd_rates(const RunConfig& config, std::ostream& log) {
  const fs::path dir = prepare_out_dir(config);
  const ProblemSpec spec = config.problem();
  const ErrorCurve curve = curve_for(spec, config, config.jobs);
  RegimeReport rep;
  try {
    rep = classify_regime(spec, curve, config.epsilon);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  std::string csv = provenance("rates", config) + kRatesHeader + "\n";
  csv += format_double(config.gamma) + "," + format_double(config.nu) + "," + format_double(config.alpha) +
         "," + to_string(rep.band.regime) + "," + format_double(rep.band.r0) + "," +
         format_double(rep.band.r1) + "," + format_double(rep.fitted_mse_exponent) + "," +
         to_string(rep.verdict) + "\n";
  write_file(dir / "rates.csv", csv);
  log << to_string(rep.band.regime) << ": fitted MSE exponent " << rep.fitted_mse_exponent << " over n in ["
      << rep.estimate.window.n_min << ", " << rep.estimate.window.n_max << "], accepted ["
      << rep.accept_low << ", " << rep.accept_high << "] -> " << to_string(rep.verdict);
  if (!rep.note.empty()) log << " (" << rep.note << ")";
  log << "\n";
  return rep.verdict == Verdict::Fail ? kExitCheckFailed : kExitOk;
}

int cmd_sweep(const RunConfig& config, std::ostream& log) {
  if (config.sweep_grid_given_empty) throw ConfigError("sweep grid is empty");
  const std::vector<double> gammas = config.sweep_gamma.empty() ? std::vector<double>{config.gamma}
                                                                 : config.sweep_gamma;
  const std::vector<double> nus = config.sweep_nu.empty() ? std::vector<double>{config.nu} : config.sweep_nu;
  const std::vector<std::string> noises =
      config.sweep_noise.empty() ? std::vector<std::string>{config.noise} : config.sweep_noise;

  const fs::path dir = prepare_out_dir(config);
  const fs::path plot_dir = dir / "plotdata";
  std::error_code ec;
  fs::create_directories(plot_dir, ec);
  if (ec) throw ConfigError("cannot create '" + plot_dir.string() + "'");

  struct Point {
    double gamma;
    double nu;
    std::size_t noise;
  };
  std::vector<Point> grid;
  for (double g : gammas)
    for (double n : nus)
      for (std::size_t k = 0; k < noises.size(); ++k) grid.push_back({g, n, k});

  std::vector<RateRow> rows(grid.size());
  const auto count = static_cast<std::int64_t>(grid.size());
#pragma omp parallel for schedule(dynamic, 1) num_threads(config.jobs)
  for (std::int64_t i = 0; i < count; ++i) {
    const Point& p = grid[static_cast<std::size_t>(i)];
    rows[static_cast<std::size_t>(i)] = rate_row(config, p.gamma, p.nu, p.noise, noises[p.noise], 1, &plot_dir);
  }

  std::stable_sort(rows.begin(), rows.end(), [](const RateRow& a, const RateRow& b) {
    return std::tie(a.gamma, a.nu, a.noise_index) < std::tie(b.gamma, b.nu, b.noise_index);
  });

  std::string csv = provenance("sweep", config) + kRatesHeader + ",noise_kind\n";
  std::size_t errors = 0, fails = 0;
  for (const auto& r : rows) {
    csv += r.line + "," + r.noise_kind + "\n";
    errors += r.error;
    fails += r.fail;
  }
  write_file(dir / "sweep.csv", csv);
  log << "wrote " << (dir / "sweep.csv").string() << " (" << rows.size() << " rows, " << fails
      << " FAIL, " << errors << " ERROR)\n";
  return errors ? kExitCheckFailed : kExitOk;
}

int cmd_verify(const RunConfig& config, std::ostream& log) {
  const fs::path dir = prepare_out_dir(config);
  const auto results = run_verification_suite(config);
  std::string report = provenance("verify", config);
  std::vector<std::string> failed;
  for (const auto& r : results) {
    report += std::string(r.passed ? "PASS" : "FAIL") + "  " + r.name + "\n    " + r.statement +
              "\n    margin: " + r.margin + "\n";
    if (!r.passed) failed.push_back(r.name);
  }
  report += failed.empty() ? "all checks passed\n" : "failed checks: " + std::to_string(failed.size()) + "\n";
  write_file(dir / "verify_report.txt", report);
  for (const auto& r : results) log << (r.passed ? "PASS " : "FAIL ") << r.name << " (margin: " << r.margin << ")\n";
  if (!failed.empty()) {
    std::string names;
    for (const auto& n : failed) names += (names.empty() ? "" : ", ") + n;
    log << "verification failed: " << names << "\n";
    return kExitCheckFailed;
  }
  return kExitOk;
}

int run_command(const std::string& name, const Settings& settings, std::ostream& log,
                std::ostream& err) {
  try {
    const RunConfig config = RunConfig::from_settings(settings);
    if (name == "exact") return cmd_exact(config, log);
    if (name == "simulate") return cmd_simulate(config, log);
    if (name == "rates") return cmd_rates(config, log);
    if (name == "verify") return cmd_verify(config, log);
    if (name == "sweep") return cmd_sweep(config, log);
    throw ConfigError("unknown command '" + name + "'");
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << "\n";
    return kExitConfigError;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << "\n";
    return kExitConfigError;
  }
}

}  // namespace sgdrates::cli
