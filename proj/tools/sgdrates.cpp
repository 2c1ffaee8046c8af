// sgdrates: exact and Monte-Carlo mean-square errors of SGD on the quadratic
// problem, rate fitting, and the numerical verification suite.

#include <iostream>
#include <map>
#include <string>

#include "CLI11.hpp"
#include "sgdrates/cli/commands.hpp"

int main(int argc, char** argv) {
  using namespace sgdrates::cli;

  CLI::App app{"SGD convergence-rate reproduction on the quadratic problem"};
  app.require_subcommand(1);

  std::string config_path;
  std::map<std::string, std::string> flags;
  const std::vector<std::pair<std::string, std::string>> options = {
      {"alpha", "curvature alpha > 0"},
      {"gamma", "step scale gamma > 0"},
      {"nu", "step exponent nu > 0 (steps gamma/n^nu)"},
      {"dim", "dimension d"},
      {"xi", "initial value, comma-separated (scalar broadcasts)"},
      {"noise", "KIND[:key=v;...]: point, twopoint, uniform, gaussian, discrete"},
      {"k-max", "dyadic checkpoints 2^0..2^K"},
      {"checkpoints", "explicit comma-separated checkpoints (overrides --k-max)"},
      {"paths", "Monte-Carlo paths"},
      {"seed", "base seed (fallback: $SGDRATES_SEED)"},
      {"epsilon", "epsilon of the rate band"},
      {"mode", "rational | float"},
      {"source", "curve source for rates/sweep: exact | mc"},
      {"out", "output directory"},
      {"jobs", "parallel jobs"},
      {"sweep-gamma", "sweep grid over gamma, comma-separated"},
      {"sweep-nu", "sweep grid over nu, comma-separated"},
      {"sweep-noise", "sweep grid over noise models, space-separated"},
      {"fault-step-sign", "test hook: corrupt the recursion's step factor sign"},
  };

  const std::vector<std::pair<std::string, std::string>> commands = {
      {"exact", "exact MSE curve -> exact_curve.csv"},
      {"simulate", "Monte-Carlo MSE curve -> mc_curve.csv"},
      {"rates", "theoretical band vs fitted exponent -> rates.csv"},
      {"verify", "run the verification suite -> verify_report.txt"},
      {"sweep", "rates over a parameter grid -> sweep.csv, plotdata/"},
  };
  for (const auto& [name, help] : commands) {
    CLI::App* sub = app.add_subcommand(name, help);
    sub->add_option("--config", config_path, "flat key = value config file");
    for (const auto& [opt, ohelp] : options) {
      std::string key = opt;
      for (char& c : key)
        if (c == '-') c = '_';
      sub->add_option_function<std::string>("--" + opt, [&flags, key](const std::string& v) { flags[key] = v; },
                                            ohelp);
    }
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfigError;
  }

  Settings settings;
  if (!config_path.empty()) {
    try {
      settings = read_config_file(config_path);
    } catch (const ConfigError& e) {
      std::cerr << "error: " << e.what() << "\n";
      return kExitConfigError;
    }
  }
  for (const auto& [k, v] : flags) settings[k] = v;

  const std::string command = app.get_subcommands().front()->get_name();
  try {
    return run_command(command, settings, std::cout, std::cerr);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitCheckFailed;
  }
}
