#include "sgdrates/cli/config.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "sgdrates/exact_error.hpp"
#include "sgdrates/format.hpp"

namespace sgdrates::cli {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::string normalize_key(std::string key) {
  std::replace(key.begin(), key.end(), '-', '_');
  return key;
}

double to_real(const std::string& key, const std::string& v) {
  std::size_t used = 0;
  double x = 0.0;
  try {
    x = std::stod(v, &used);
  } catch (const std::exception&) {
    throw ConfigError(key + ": expected a number, got '" + v + "'");
  }
  if (used != v.size()) throw ConfigError(key + ": expected a number, got '" + v + "'");
  return x;
}

std::uint64_t to_unsigned(const std::string& key, const std::string& v) {
  if (v.empty() || v.find_first_not_of("0123456789") != std::string::npos)
    throw ConfigError(key + ": expected a nonnegative integer, got '" + v + "'");
  try {
    return std::stoull(v);
  } catch (const std::exception&) {
    throw ConfigError(key + ": integer out of range '" + v + "'");
  }
}

std::vector<std::string> split_list(const std::string& v, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream in(v);
  while (std::getline(in, cur, sep)) {
    cur = trim(cur);
    if (!cur.empty()) out.push_back(cur);
  }
  return out;
}

std::vector<double> to_reals(const std::string& key, const std::string& v) {
  std::vector<double> out;
  for (const auto& tok : split_list(v, ',')) out.push_back(to_real(key, tok));
  return out;
}

bool to_bool(const std::string& key, const std::string& v) {
  if (v == "1" || v == "true" || v == "yes" || v == "on") return true;
  if (v == "0" || v == "false" || v == "no" || v == "off") return false;
  throw ConfigError(key + ": expected a boolean, got '" + v + "'");
}

std::string join_reals(const std::vector<double>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out.push_back(',');
    out += format_double(v[i]);
  }
  return out;
}

}  // namespace

std::string to_string(ArithmeticMode mode) {
  return mode == ArithmeticMode::Rational ? "rational" : "float";
}

std::string to_string(CurveSource source) { return source == CurveSource::MonteCarlo ? "mc" : "exact"; }

Settings read_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file '" + path + "'");
  Settings s;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError(path + ":" + std::to_string(lineno) + ": expected 'key = value'");
    s[normalize_key(trim(line.substr(0, eq)))] = trim(line.substr(eq + 1));
  }
  return s;
}

RunConfig RunConfig::from_settings(const Settings& settings) {
  RunConfig c;
  bool seed_given = false;
  std::string xi_text;
  for (const auto& [raw_key, v] : settings) {
    const std::string key = normalize_key(raw_key);
    if (key == "alpha") c.alpha = to_real(key, v);
    else if (key == "gamma") c.gamma = to_real(key, v);
    else if (key == "nu") c.nu = to_real(key, v);
    else if (key == "dim") c.dim = to_unsigned(key, v);
    else if (key == "xi") xi_text = v;
    else if (key == "noise") c.noise = v;
    else if (key == "k_max") c.k_max = static_cast<unsigned>(to_unsigned(key, v));
    else if (key == "checkpoints") {
      c.checkpoints.clear();
      for (const auto& tok : split_list(v, ',')) c.checkpoints.push_back(to_unsigned(key, tok));
    } else if (key == "paths") c.paths = to_unsigned(key, v);
    else if (key == "seed") {
      c.seed = to_unsigned(key, v);
      seed_given = true;
    } else if (key == "epsilon") c.epsilon = to_real(key, v);
    else if (key == "mode") {
      if (v == "float") c.mode = ArithmeticMode::Float;
      else if (v == "rational") c.mode = ArithmeticMode::Rational;
      else throw ConfigError("mode: expected rational or float, got '" + v + "'");
    } else if (key == "source") {
      if (v == "exact") c.source = CurveSource::Exact;
      else if (v == "mc") c.source = CurveSource::MonteCarlo;
      else throw ConfigError("source: expected exact or mc, got '" + v + "'");
    } else if (key == "out") c.out = v;
    else if (key == "jobs") c.jobs = static_cast<int>(to_unsigned(key, v));
    else if (key == "sweep_gamma") {
      c.sweep_gamma = to_reals(key, v);
      if (c.sweep_gamma.empty()) c.sweep_grid_given_empty = true;
    } else if (key == "sweep_nu") {
      c.sweep_nu = to_reals(key, v);
      if (c.sweep_nu.empty()) c.sweep_grid_given_empty = true;
    } else if (key == "sweep_noise") {
      c.sweep_noise = split_list(v, ' ');
      if (c.sweep_noise.empty()) c.sweep_grid_given_empty = true;
    } else if (key == "fault_step_sign") c.fault_step_sign = to_bool(key, v);
    else throw ConfigError("unknown config key '" + key + "'");
  }

  if (!seed_given) {
    if (const char* env = std::getenv("SGDRATES_SEED"); env && *env) c.seed = to_unsigned("SGDRATES_SEED", env);
  }
  if (c.dim < 1) throw ConfigError("dim must be at least 1");
  if (!xi_text.empty()) {
    c.xi = to_reals("xi", xi_text);
    if (c.xi.size() == 1 && c.dim > 1) c.xi.assign(c.dim, c.xi[0]);
  }
  if (c.k_max > 40) throw ConfigError("k_max must be at most 40");
  if (c.jobs < 1) throw ConfigError("jobs must be at least 1");
  if (c.paths < 2) throw ConfigError("paths must be at least 2");
  if (!(c.epsilon > 0.0)) throw ConfigError("epsilon must be positive");

  try {
    (void)c.problem();
    const auto cps = c.resolved_checkpoints();
    for (std::size_t i = 0; i < cps.size(); ++i) {
      if (cps[i] < 1) throw ConfigError("checkpoints must be positive");
      if (i && cps[i] <= cps[i - 1]) throw ConfigError("checkpoints must be strictly increasing");
    }
    if (c.mode == ArithmeticMode::Rational && cps.back() > kRationalMaxCheckpoint)
      throw ConfigError("rational mode needs every checkpoint <= 2^14 (got " +
                        std::to_string(cps.back()) + ")");
    for (const auto& n : c.sweep_noise) (void)parse_noise(n, c.dim);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  return c;
}

ProblemSpec RunConfig::problem() const { return problem(gamma, nu, noise); }

ProblemSpec RunConfig::problem(double gamma_value, double nu_value, const std::string& noise_text) const {
  Vector x = xi.empty() ? Vector(dim, 1.0) : xi;
  return ProblemSpec(alpha, gamma_value, nu_value, std::move(x), parse_noise(noise_text, dim));
}

std::vector<std::uint64_t> RunConfig::resolved_checkpoints() const {
  if (!checkpoints.empty()) return checkpoints;
  return dyadic_checkpoints(k_max);
}

std::vector<std::pair<std::string, std::string>> RunConfig::resolved() const {
  std::vector<std::pair<std::string, std::string>> r;
  const ProblemSpec spec = problem();
  std::string xi_text;
  for (std::size_t i = 0; i < spec.xi().size(); ++i) {
    if (i) xi_text.push_back(',');
    xi_text += format_double(spec.xi()[i]);
  }
  std::string cps;
  for (std::size_t i = 0; i < checkpoints.size(); ++i) {
    if (i) cps.push_back(',');
    cps += std::to_string(checkpoints[i]);
  }
  std::string noises;
  for (std::size_t i = 0; i < sweep_noise.size(); ++i) {
    if (i) noises.push_back(' ');
    noises += sweep_noise[i];
  }
  r.emplace_back("alpha", format_double(alpha));
  r.emplace_back("gamma", format_double(gamma));
  r.emplace_back("nu", format_double(nu));
  r.emplace_back("dim", std::to_string(dim));
  r.emplace_back("xi", xi_text);
  r.emplace_back("noise", spec.noise().describe());
  r.emplace_back("k_max", std::to_string(k_max));
  r.emplace_back("checkpoints", cps);
  r.emplace_back("paths", std::to_string(paths));
  r.emplace_back("seed", std::to_string(seed));
  r.emplace_back("epsilon", format_double(epsilon));
  r.emplace_back("mode", to_string(mode));
  r.emplace_back("source", to_string(source));
  r.emplace_back("sweep_gamma", join_reals(sweep_gamma));
  r.emplace_back("sweep_nu", join_reals(sweep_nu));
  r.emplace_back("sweep_noise", noises);
  return r;
}

}  // namespace sgdrates::cli
