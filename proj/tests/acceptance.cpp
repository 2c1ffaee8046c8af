// Acceptance run: one PASS/FAIL line per criterion, exit 1 if any fails.

#include <sys/wait.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "sgdrates/exact_error.hpp"
#include "sgdrates/rate_analysis.hpp"
#include "sgdrates/simulator.hpp"
#include "test_util.hpp"

using namespace sgdrates;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;
};

class Timer {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

std::string fmt(const char* f, double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, x);
  return buf;
}

ProblemSpec two_point(double gamma_alpha, double nu, double xi, double offset = 1.0) {
  return ProblemSpec(1.0, gamma_alpha, nu, {xi}, NoiseModel::two_point({0.0}, {offset}));
}

void note(Outcome& out, bool ok, const std::string& what) {
  if (!ok) out.pass = false;
  if (!out.detail.empty()) out.detail += "; ";
  out.detail += what;
}

void time_limit(Outcome& out, const Timer& t, double limit) {
  note(out, t.seconds() < limit, fmt("%.2fs", t.seconds()) + fmt(" (limit %.0fs)", limit));
}

// Slow decay, nu < 1: fitted MSE exponent within 0.05 of nu.
Outcome slow_decay() {
  Outcome out;
  Timer t;
  const auto cps = dyadic_checkpoints(22);
  for (double nu : {0.25, 0.5, 0.75}) {
    const auto spec = two_point(1.0, nu, 1.0);
    const auto rep = classify_regime(spec, exact_mse_curve(spec, cps), kDefaultEpsilon);
    note(out, std::abs(rep.fitted_mse_exponent - nu) <= 0.05 && rep.verdict == Verdict::Pass,
         fmt("nu=%g", nu) + fmt(" fit %.4f", rep.fitted_mse_exponent));
  }
  time_limit(out, t, 10.0);
  return out;
}

// nu = 1, gamma alpha > 1/2: fitted MSE exponent within 0.05 of 1.
Outcome fast_large_step() {
  Outcome out;
  Timer t;
  const auto cps = dyadic_checkpoints(22);
  for (double ga : {0.75, 1.0, 2.0, 5.0}) {
    const auto spec = two_point(ga, 1.0, 1.0);
    const auto rep = classify_regime(spec, exact_mse_curve(spec, cps), kDefaultEpsilon);
    note(out, std::abs(rep.fitted_mse_exponent - 1.0) <= 0.05 && rep.verdict == Verdict::Pass,
         fmt("ga=%g", ga) + fmt(" fit %.4f", rep.fitted_mse_exponent));
  }
  time_limit(out, t, 5.0);
  return out;
}

// nu = 1, gamma alpha < 1/2: fitted MSE exponent within 0.07 of 2 gamma alpha
// and inside the eps = 0.05 band, started at and away from the minimizer.
Outcome fast_small_step() {
  Outcome out;
  Timer t;
  const auto cps = dyadic_checkpoints(22);
  for (double ga : {0.1, 0.25, 0.4})
    for (double xi : {0.0, 1.0}) {
      const auto spec = two_point(ga, 1.0, xi);
      const auto rep = classify_regime(spec, exact_mse_curve(spec, cps), kDefaultEpsilon);
      const double fit = rep.fitted_mse_exponent;
      const bool in_band = fit >= rep.band.mse_lower_exponent() && fit <= rep.band.mse_upper_exponent();
      note(out, std::abs(fit - 2.0 * ga) <= 0.07 && in_band,
           fmt("ga=%g", ga) + fmt(" xi=%g", xi) + fmt(" fit %.4f", fit));
    }
  time_limit(out, t, 5.0);
  return out;
}

// nu > 1 with noise: e_1e6 > 0, tail slope within 0.02 of 0, and
// e_2n / e_n in [0.999, 1.001] for every n in [1e5, 5e5].
Outcome very_fast() {
  Outcome out;
  Timer t;
  std::vector<std::uint64_t> fit_cps = dyadic_checkpoints(19);
  fit_cps.push_back(1000000);
  std::vector<std::uint64_t> all(1000000);
  for (std::uint64_t n = 1; n <= all.size(); ++n) all[n - 1] = n;
  for (double nu : {1.5, 2.0})
    for (double ga : {0.1, 0.25}) {
      const auto spec = two_point(ga, nu, 1.0);
      const auto rep = classify_regime(spec, exact_mse_curve(spec, fit_cps), kDefaultEpsilon);
      const auto curve = exact_mse_curve(spec, all);
      double lo = 2.0, hi = 0.0;
      for (std::uint64_t n = 100000; n <= 500000; ++n) {
        const double r = curve[2 * n - 1].value / curve[n - 1].value;
        lo = std::min(lo, r);
        hi = std::max(hi, r);
      }
      const double last = curve.back().value;
      note(out, last > 0.0 && std::abs(rep.estimate.slope) <= 0.02 && lo >= 0.999 && hi <= 1.001,
           fmt("nu=%g", nu) + fmt(" ga=%g", ga) + fmt(" e=%.3g", last) + fmt(" slope %.4f", rep.estimate.slope) +
               fmt(" ratio [%.6f", lo) + fmt(", %.6f]", hi));
    }
  time_limit(out, t, 5.0);
  return out;
}

// Recursion vs closed form: exact in rational mode for all n <= 2^12 on 20
// random specs; within 1e-9 relative in float mode up to n = 1e6.
Outcome oracle_agreement() {
  Outcome out;
  Timer t;
  std::mt19937_64 rng(20240501);
  std::uniform_int_distribution<int> eighths(1, 48), sixteenths(-32, 32), offs(1, 16);
  const std::vector<double> nus = {1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 2, 2, 2, 2, 2, 2, 0.5, 1.5};
  int exact_ok = 0;
  for (double nu : nus) {
    const double ga = eighths(rng) / 8.0;
    const double xi = sixteenths(rng) / 16.0;
    const double offset = offs(rng) / 8.0;
    const auto spec = two_point(ga, nu, xi, offset);
    if (exact_mse_recursion_rational(spec, 4096) == exact_mse_closed_form_all_rational(spec, 4096)) ++exact_ok;
  }
  note(out, exact_ok == static_cast<int>(nus.size()),
       std::to_string(exact_ok) + "/" + std::to_string(nus.size()) + fmt(" rational specs exact (%.1fs)", t.seconds()));

  std::uniform_real_distribution<double> ga(0.05, 6.0), xi(-3.0, 3.0), nu(0.25, 2.5), lg(0.0, 6.0);
  std::vector<std::uint64_t> cps;
  for (double x = 0.0; x <= 6.0 + 1e-9; x += 0.1) {
    const auto n = static_cast<std::uint64_t>(std::llround(std::pow(10.0, x)));
    if (cps.empty() || n > cps.back()) cps.push_back(n);
  }
  double worst = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    const auto spec = two_point(ga(rng), trial % 5 == 0 ? 1.0 : nu(rng), xi(rng), 0.5);
    const auto curve = exact_mse_curve(spec, cps);
    for (const auto& p : curve.points()) {
      const double closed = exact_mse_closed_form(spec, p.n);
      const double rel = std::abs(p.value - closed) / closed;
      if (!(rel <= worst)) worst = rel;
    }
  }
  note(out, worst <= 1e-9, fmt("float max rel %.2e over 20 specs, n <= 1e6", worst));
  return out;
}

// Monte-Carlo vs exact: within 3 stderr at >= 95% of pairs, 4 stderr at all.
Outcome monte_carlo() {
  Outcome out;
  Timer t;
  const std::vector<std::uint64_t> cps = {10, 100, 1000, 10000};
  const std::vector<ProblemSpec> specs = {
      two_point(1.0, 1.0, 0.0),
      two_point(2.0, 1.0, 1.0),
      ProblemSpec(1.0, 0.25, 1.0, {2.0}, NoiseModel::uniform_box({0.0}, 1.0)),
      two_point(1.0, 0.5, 1.0),
      ProblemSpec(1.0, 0.5, 0.75, {1.0}, NoiseModel::gaussian({0.5}, 0.5)),
      two_point(1.0, 2.0, 1.0),
      ProblemSpec(1.0, 5.0, 1.0, {0.5}, NoiseModel::uniform_box({0.0}, 0.5)),
      ProblemSpec(2.0, 0.4, 1.0, {3.0}, NoiseModel::discrete({{0.0}, {1.0}, {-2.0}}, {0.5, 0.25, 0.25})),
  };
  int pairs = 0, within3 = 0, within4 = 0;
  double worst = 0.0;
  for (std::size_t i = 0; i < specs.size(); ++i) {
    const auto exact = exact_mse_curve(specs[i], cps);
    const auto est = mc_mse_estimate(SimulationPlan(specs[i], cps, 100000, 1000 + i));
    for (std::size_t j = 0; j < cps.size(); ++j) {
      const double z = std::abs(est.curve[j].value - exact[j].value) / *est.curve[j].std_error;
      worst = std::max(worst, z);
      ++pairs;
      within3 += z <= 3.0;
      within4 += z <= 4.0;
    }
  }
  note(out, within3 >= 0.95 * pairs && within4 == pairs,
       std::to_string(within3) + "/" + std::to_string(pairs) + " within 3 se, " + std::to_string(within4) + "/" +
           std::to_string(pairs) + " within 4 se, max " + fmt("%.2f se", worst));
  time_limit(out, t, 120.0);
  return out;
}

// Property checks of the supporting identities and inequalities.
Outcome property_suite() {
  Outcome out;
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-10.0, 10.0);
  auto rand_vec = [&](std::size_t d) {
    Vector v(d);
    for (double& x : v) x = u(rng);
    return v;
  };

  double bv = 0.0;
  for (std::size_t d : {1u, 3u, 8u})
    for (int trial = 0; trial < 50; ++trial) {
      std::vector<Vector> samples;
      for (int i = 0; i < 200; ++i) samples.push_back(rand_vec(d));
      const auto r = bias_variance_check(samples, rand_vec(d));
      bv = std::max(bv, std::abs(r.total - (r.variance + r.bias_sq)) / r.total);
    }
  note(out, bv <= 1e-10, fmt("bias-variance rel %.1e", bv));

  double fd = 0.0;
  const double h = 1e-5;
  for (std::size_t d : {1u, 4u}) {
    const ProblemSpec spec(1.3, 1.0, 1.0, Vector(d, 0.0), NoiseModel::point_mass(Vector(d, 0.0)));
    for (int trial = 0; trial < 200; ++trial) {
      Vector theta = rand_vec(d);
      const Vector x = rand_vec(d);
      const Vector g = gradient_pathwise(theta, x, spec);
      for (std::size_t i = 0; i < d; ++i) {
        const double keep = theta[i];
        theta[i] = keep + h;
        const double up = pathwise_loss(theta, x, spec);
        theta[i] = keep - h;
        const double down = pathwise_loss(theta, x, spec);
        theta[i] = keep;
        const double num = (up - down) / (2.0 * h);
        if (std::abs(g[i]) > 1e-3) fd = std::max(fd, std::abs(num - g[i]) / std::abs(g[i]));
      }
    }
  }
  note(out, fd <= 1e-6, fmt("gradient fd rel %.1e", fd));

  std::uniform_int_distribution<int> num(-9, 9), den(1, 9);
  auto rat = [&] {
    Rational r(num(rng), den(rng));
    r.canonicalize();
    return r;
  };
  bool affine = true;
  for (int trial = 0; trial < 40; ++trial) {
    AffineRecursionSpec<Rational> rec;
    const std::size_t d = 1 + trial % 3;
    for (std::size_t i = 0; i < d; ++i) rec.start.push_back(rat());
    for (int k = 0; k < 16; ++k) {
      rec.multipliers.push_back(rat());
      std::vector<Rational> b;
      for (std::size_t i = 0; i < d; ++i) b.push_back(rat());
      rec.offsets.push_back(b);
    }
    for (std::size_t n = 0; n <= 16; ++n)
      if (affine_recursion_closed_form(rec, n) != affine_recursion_iterate(rec, n)) affine = false;
  }
  note(out, affine, affine ? "affine recursion exact" : "affine recursion mismatch");

  bool logs = true;
  for (int i = 0; i < 10000; ++i) logs &= log_inequality_check(std::pow(10.0, -6.0 + 12.0 * i / 9999.0));
  note(out, logs, logs ? "log inequality holds" : "log inequality violated");

  double exp_ratio = 0.0, exp_at = 0.0;
  for (int i = 0; i <= 600; ++i) {
    const double a = -3.0 + i / 100.0;
    const double r = exp_limit_check(a, 1e6).gap / (2e-6 * std::exp(std::abs(a)));
    if (r > exp_ratio) {
      exp_ratio = r;
      exp_at = a;
    }
  }
  note(out, exp_ratio < 1.0,
       fmt("exp limit worst gap/bound %.2f", exp_ratio) + fmt(" at a=%g", exp_at) +
           (exp_ratio < 1.0 ? "" : " (gap ~ e^a a^2/(2n) exceeds the bound for a > 2)"));

  double sched = 0.0;
  for (double beta : {0.6, 1.0, 2.0, 5.0})
    sched = std::max(sched, std::abs(schedule_diagnostic(beta, 1.0, 100000).tail_estimate - (2.0 - 1.0 / beta)));
  note(out, sched <= 1e-3, fmt("schedule tail dev %.1e", sched));

  bool lbf_exact = true;
  for (std::uint64_t n = 1; n <= 128; ++n) lbf_exact &= lower_bound_functional_rational(Rational(1), 1, n) == 1;
  double lbf = std::numeric_limits<double>::infinity();
  for (double beta : {0.3, 1.0, 2.0})
    for (double nu : {0.5, 1.0})
      lbf = std::min(lbf, lower_bound_functional(beta, nu, 1000000) / lower_bound_constant(beta, nu));
  note(out, lbf_exact && lbf >= 1.0, std::string(lbf_exact ? "lbf(1,1,n)=1 exact" : "lbf(1,1,n) mismatch") +
                                         fmt(", min value/const %.3f", lbf));

  std::vector<std::uint64_t> cps;
  for (unsigned k = 10; k <= 20; ++k) cps.push_back(std::uint64_t{1} << k);
  const ProblemSpec gd(1.0, 0.5, 1.0, {1.0}, NoiseModel::point_mass({0.0}));
  const auto lb = deterministic_lb_check({gd, {0.0}, 0.0}, 0.1, cps);
  note(out, lb.pass, fmt("deterministic q_n min %.3g", lb.tail_min) + (lb.tail_non_decreasing ? ", non-decreasing" : ", decreasing"));
  return out;
}

int run_cli(const std::string& args) {
  const int status = std::system((std::string(SGDRATES_BIN) + " " + args + " >/dev/null 2>&1").c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

// Byte-identical reruns of simulate, and sweep.csv independent of --jobs.
Outcome determinism() {
  Outcome out;
  using sgdrates::testing::slurp;
  using sgdrates::testing::TempDir;
  TempDir a("acc_a"), b("acc_b"), c("acc_c");
  const std::string sim = "simulate --gamma 0.7 --nu 0.8 --noise gaussian:scale=0.5 --dim 2 --k-max 12 --paths 5000 --seed 9";
  bool ok = run_cli(sim + " --out " + a.str()) == 0 && run_cli(sim + " --out " + b.str()) == 0 &&
            run_cli(sim + " --jobs 4 --out " + c.str()) == 0;
  const auto first = slurp(a.path() / "mc_curve.csv");
  const bool sim_same = ok && !first.empty() && first == slurp(b.path() / "mc_curve.csv") &&
                        first == slurp(c.path() / "mc_curve.csv");
  note(out, sim_same, sim_same ? "simulate reruns identical" : "simulate reruns differ");

  const std::string sweep =
      "sweep --sweep-gamma 0.25,0.5,1,2 --sweep-nu 0.5,1,2 --sweep-noise 'twopoint uniform:half=0.5' "
      "--source mc --paths 500 --k-max 14";
  ok = run_cli(sweep + " --jobs 1 --out " + a.str()) == 0 && run_cli(sweep + " --jobs 3 --out " + b.str()) == 0 &&
       run_cli(sweep + " --jobs 8 --out " + c.str()) == 0;
  const auto s1 = slurp(a.path() / "sweep.csv");
  const bool sweep_same = ok && !s1.empty() && s1 == slurp(b.path() / "sweep.csv") && s1 == slurp(c.path() / "sweep.csv");
  note(out, sweep_same, sweep_same ? "sweep.csv identical for jobs 1, 3, 8" : "sweep.csv differs across jobs");
  return out;
}

}  // namespace

// Optional arguments select criteria by number, e.g. `acceptance 6 8`.
int main(int argc, char** argv) {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"slow-decay rate", slow_decay},
      {"fast decay, large step", fast_large_step},
      {"fast decay, small step", fast_small_step},
      {"very fast decay plateau", very_fast},
      {"recursion vs closed form", oracle_agreement},
      {"monte-carlo vs exact", monte_carlo},
      {"property suite", property_suite},
      {"determinism", determinism},
  };
  std::vector<bool> selected(criteria.size(), argc == 1);
  for (int a = 1; a < argc; ++a) {
    const int k = std::atoi(argv[a]);
    if (k >= 1 && k <= static_cast<int>(criteria.size())) selected[k - 1] = true;
  }
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    if (!selected[i]) continue;
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("error: ") + e.what()};
    }
    failed += !o.pass;
    std::printf("criterion %zu %s: %s - %s\n", i + 1, o.pass ? "PASS" : "FAIL", criteria[i].first.c_str(),
                o.detail.c_str());
    std::fflush(stdout);
  }
  return failed ? 1 : 0;
}
