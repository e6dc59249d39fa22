#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "rou/characteristic.hpp"
#include "rou/delay_kernel.hpp"
#include "rou/fundamental.hpp"
#include "rou/scenario.hpp"
#include "rou/sde_sim.hpp"
#include "rou/spectral_models.hpp"
#include "rou/stationary.hpp"

using namespace rou;
using nlohmann::json;

namespace {

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

std::ofstream open_out(const std::string& out_dir, const std::string& name) {
  std::string path = out_dir.empty() ? name : out_dir + "/" + name;
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot write " + path);
  std::cout << "writing " << path << "\n";
  return f;
}

struct LagRange {
  double lo = 0.0, step = 0.0, hi = 0.0;
};

LagRange parse_lags(const std::string& s) {
  LagRange lr;
  char c1 = 0, c2 = 0;
  std::istringstream is(s);
  if (!(is >> lr.lo >> c1 >> lr.step >> c2 >> lr.hi) || c1 != ':' ||
      c2 != ':' || lr.step <= 0.0 || lr.hi < lr.lo)
    throw CLI::ValidationError("--lags", "expected lo:step:hi, e.g. -1:0.01:5");
  return lr;
}

/// Fundamental tables long enough for a covariance run out to lag_max;
/// grows the horizon until the auto-picked truncation fits.
std::vector<FundamentalRow> fundamental_for_covariance(
    const Scenario& sc, double dt, double lag_max, CovarianceTable& table,
    double lag_min) {
  std::vector<double> f;
  for (const auto& m : sc.system.modes) f.push_back(m.f);
  double horizon = lag_max + std::max(10.0 * sc.kernel.r(), 5.0);
  for (int attempt = 0; attempt < 8; ++attempt) {
    std::vector<FundamentalRow> g;
    for (const auto& m : sc.system.modes)
      g.push_back(solve_fundamental(m, sc.kernel, horizon, dt));
    try {
      table = covariance(g, f, lag_min, lag_max);
      return g;
    } catch (const std::invalid_argument&) {
      horizon *= 2.0;  // tables shorter than T_trunc + lag; retry longer
    }
  }
  throw std::runtime_error("covariance horizon did not converge");
}

int cmd_stability(const Scenario& sc) {
  const DelayKernel& k = sc.kernel;
  std::cout << "scenario: " << sc.name << "\n";

  std::string dist_verdict = "not applicable (alpha != 0)";
  if (k.alpha() == 0.0) {
    Verdict dist = distributed_stability_check(
        k, sc.system.modes.empty() ? 1.0 : -sc.system.modes[0].mu);
    dist_verdict = (dist.stable ? std::string("stable, margin ")
                                : std::string("not conclusive, margin ")) +
                   fmt(dist.margin);
  }
  std::cout << "distributed criterion (alpha=0, ||beta||_1 < 1): "
            << dist_verdict << "\n";

  bool a1_is_A = true;
  for (const auto& m : sc.system.modes)
    if (std::abs(m.m1 - m.mu) > 1e-12 * std::max(1.0, std::abs(m.mu)))
      a1_is_A = false;
  std::cout << "discrete criterion (A1 = alpha*A, |alpha| < 1): "
            << (k.beta().type == BetaKernel::Type::Zero && a1_is_A
                    ? (discrete_stability_check(k.alpha()) ? "stable" : "not conclusive")
                    : "not applicable")
            << "\n";

  if (k.beta().type == BetaKernel::Type::Exponential) {
    double thr = example52_threshold(k.beta().b, k.r());
    std::cout << "exponential-kernel threshold |a| < " << fmt(thr) << ": "
              << (std::abs(k.beta().a) < thr ? "stable" : "not conclusive")
              << "\n";
  }

  if (!sc.system.modes.empty() && k.beta().type == BetaKernel::Type::Zero) {
    const ModeEntry& m0 = sc.system.modes[0];
    if (m0.mu < 0.0 && m0.m1 > 0.0 && std::abs(m0.m1 - m0.mu) > 1e-12) {
      // A1 = (-A)^delta: recover delta from the first mode.
      double delta = std::log(m0.m1) / std::log(-m0.mu);
      if (delta >= 0.0 && delta < 1.0) {
        Verdict fr = fractional_stability_check(k.alpha(), delta, m0.mu);
        std::cout << "fractional criterion (2|alpha| < |lambda1|^(1-delta), delta="
                  << fmt(delta) << "): "
                  << (fr.stable ? "stable" : "not conclusive") << ", margin "
                  << fmt(fr.margin) << "\n";
      }
    }
  }

  AbscissaReport ab = spectral_abscissa(sc.system, k);
  std::cout << "spectral abscissa: " << fmt(ab.abscissa)
            << " (modes: " << fmt(ab.mode_abscissa);
  if (std::isfinite(ab.gamma0_abscissa))
    std::cout << ", n-zeros: " << fmt(ab.gamma0_abscissa);
  std::cout << ", worst mode index " << ab.worst_mode << ")\n";
  std::cout << "verdict: " << (ab.abscissa < 0.0 ? "stable" : "unstable")
            << "\n";
  return 0;
}

int cmd_roots(const Scenario& sc, const std::string& out_dir,
              const std::string& out, const std::string& window,
              double im_cap) {
  double re_lo = -20.0, re_hi = 1.0;
  {
    char c = 0;
    std::istringstream is(window);
    if (!(is >> re_lo >> c >> re_hi) || c != ',' || re_hi <= re_lo)
      throw CLI::ValidationError("--re-window", "expected lo,hi");
  }
  std::vector<double> spectrum;
  for (const auto& m : sc.system.modes) spectrum.push_back(m.mu);

  auto f = open_out(out_dir, out);
  f << "mode_index,re,im,residual,gamma_label\n";
  for (const auto& m : sc.system.modes) {
    CharProblem p{sc.kernel, m};
    RootReport rep = rightmost_root(p, re_lo, re_hi, im_cap);
    if (!rep.complete)
      std::cerr << "mode " << m.eig_index << ": " << rep.message << "\n";
    for (size_t i = 0; i < rep.roots.size(); ++i) {
      GammaLabel gl = gamma_classify(sc.kernel, rep.roots[i], spectrum);
      f << m.eig_index << ',' << fmt(rep.roots[i].real()) << ','
        << fmt(rep.roots[i].imag()) << ',' << fmt(rep.residuals[i]) << ','
        << to_string(gl) << "\n";
    }
  }
  return 0;
}

int cmd_fundamental(const Scenario& sc, const std::string& out_dir,
                    const std::string& out, double T, double dt) {
  auto f = open_out(out_dir, out);
  f << "t,mode_index,g\n";
  for (const auto& m : sc.system.modes) {
    FundamentalRow g = solve_fundamental(m, sc.kernel, T, dt);
    for (size_t i = 0; i < g.g.size(); ++i)
      f << fmt(double(i) * dt) << ',' << m.eig_index << ',' << fmt(g.g[i])
        << "\n";
  }
  return 0;
}

int cmd_covariance(const Scenario& sc, const std::string& out_dir,
                   const std::string& out, const std::string& lags) {
  LagRange lr = parse_lags(lags);
  double dt = lr.step;
  long q = std::lround(sc.kernel.r() / dt);
  if (q < 1 || std::abs(double(q) * dt - sc.kernel.r()) > 1e-9 * sc.kernel.r())
    throw CLI::ValidationError("--lags", "step must divide the delay r");

  CovarianceTable K;
  fundamental_for_covariance(sc, dt, lr.hi, K, lr.lo);

  auto f = open_out(out_dir, out);
  f << "k,j,t,K,tail_bound\n";
  for (int k = 0; k < K.n_modes; ++k)
    for (int j = 0; j < K.n_modes; ++j)
      for (int i = 0; i < K.n_lags(); ++i)
        f << (k + 1) << ',' << (j + 1) << ',' << fmt(K.lag_min + i * K.dt)
          << ',' << fmt(K.entries[size_t(k)][size_t(j)][size_t(i)]) << ','
          << fmt(K.tail_bound[size_t(k)][size_t(j)]) << "\n";
  return 0;
}

int cmd_simulate(const Scenario& sc, const std::string& out_dir,
                 const std::string& out, int threads) {
  SimConfig cfg;
  cfg.dt = sc.run.dt;
  cfg.T = sc.run.T;
  cfg.n_paths = sc.run.paths;
  cfg.seed = sc.run.seed;
  cfg.burn_in = sc.run.burn_in;
  cfg.stationary_init = sc.run.stationary_init;

  // Record on a coarse grid of at most 51 grid-aligned times.
  long n = std::lround(cfg.T / cfg.dt);
  long stride = std::max(1L, n / 50);
  std::vector<double> times;
  for (long i = 0; i <= n; i += stride) times.push_back(double(i) * cfg.dt);

  EnsembleStats ens = simulate_ensemble(sc.system, sc.kernel, cfg, times, threads);
  if (ens.n_overflowed > 0)
    std::cerr << ens.n_overflowed << " paths overflowed and were flagged\n";

  auto f = open_out(out_dir, out);
  f << "t,mode_index,mean,second_moment,se_second_moment\n";
  double np = double(ens.samples.size());
  for (size_t ti = 0; ti < times.size(); ++ti) {
    for (size_t m = 0; m < sc.system.modes.size(); ++m) {
      double s1 = 0, s2 = 0, s4 = 0;
      for (const auto& path : ens.samples) {
        double y = path[ti][m];
        s1 += y;
        s2 += y * y;
        s4 += y * y * y * y;
      }
      double mean = s1 / np, m2 = s2 / np;
      double var_m2 = std::max(0.0, s4 / np - m2 * m2);
      f << fmt(times[ti]) << ',' << sc.system.modes[m].eig_index << ','
        << fmt(mean) << ',' << fmt(m2) << ',' << fmt(std::sqrt(var_m2 / np))
        << "\n";
    }
  }
  return 0;
}

struct CheckList {
  json checks = json::array();
  bool all_pass = true;

  void info(const std::string& name, const json& value) {
    checks.push_back({{"name", name}, {"status", "info"}, {"value", value}});
  }
  void pass_fail(const std::string& name, bool ok, double value,
                 double threshold) {
    checks.push_back({{"name", name},
                      {"status", ok ? "pass" : "fail"},
                      {"value", value},
                      {"threshold", threshold}});
    if (!ok) all_pass = false;
  }
  void skip(const std::string& name, const std::string& reason) {
    checks.push_back(
        {{"name", name}, {"status", "skip"}, {"reason", reason}});
  }
};

int cmd_verify(const Scenario& sc, const std::string& out_dir, int threads) {
  const DelayKernel& k = sc.kernel;
  CheckList cl;
  json report;
  report["scenario"] = sc.name;
  report["seed"] = sc.run.seed;

  // Stage 1: stability and roots.
  AbscissaReport ab = spectral_abscissa(sc.system, k);
  report["spectral_abscissa"] = {
      {"abscissa", ab.abscissa},
      {"mode_abscissa", ab.mode_abscissa},
      {"worst_mode", ab.worst_mode},
  };
  if (std::isfinite(ab.gamma0_abscissa))
    report["spectral_abscissa"]["n_zero_abscissa"] = ab.gamma0_abscissa;
  bool stable = ab.abscissa < 0.0;
  cl.info("stability.verdict", stable ? "stable" : "unstable");

  // Criterion/abscissa consistency where a sufficient criterion applies.
  bool a1_is_A = !sc.system.modes.empty();
  for (const auto& m : sc.system.modes)
    if (std::abs(m.m1 - m.mu) > 1e-12 * std::max(1.0, std::abs(m.mu)))
      a1_is_A = false;
  if (k.alpha() == 0.0) {
    Verdict d = distributed_stability_check(k, 1.0);
    if (d.stable)
      cl.pass_fail("stability.distributed_criterion_consistent",
                   stable, ab.abscissa, 0.0);
    else
      cl.info("stability.distributed_criterion", "not conclusive");
  }
  if (k.beta().type == BetaKernel::Type::Zero && a1_is_A) {
    if (discrete_stability_check(k.alpha()))
      cl.pass_fail("stability.discrete_criterion_consistent", stable,
                   ab.abscissa, 0.0);
    else
      cl.info("stability.discrete_criterion", "not conclusive");
  }

  // Stage 2: fundamental solutions and their integral-form residuals.
  double dt = sc.run.dt;
  double horizon = std::max(10.0 * k.r(), 5.0);
  std::vector<FundamentalRow> g;
  double max_res = 0.0;
  for (const auto& m : sc.system.modes) {
    g.push_back(solve_fundamental(m, k, horizon, dt));
    double g_scale = 1.0;
    for (double v : g.back().g) g_scale = std::max(g_scale, std::abs(v));
    // Relative residual; for unstable scenarios g grows exponentially and
    // the quadrature error grows with it.
    max_res = std::max(max_res, verify_integral_form(g.back(), m, k) / g_scale);
  }
  // Trapezoid integral form is second order; threshold scales with dt^2
  // and the drift magnitude.
  double drift_scale = 0.0;
  for (const auto& m : sc.system.modes)
    drift_scale = std::max(drift_scale, std::abs(m.mu) +
                                            std::abs(k.alpha() * m.m1) +
                                            std::abs(m.m2) * k.beta_l1_norm());
  double res_tol = 0.05 * dt * dt * drift_scale * drift_scale;
  cl.pass_fail("fundamental.integral_form_residual", max_res <= res_tol,
               max_res, res_tol);

  // Stage 3: stationary covariance and its delay ODE residual.
  bool have_cov = false;
  CovarianceTable K;
  if (!stable) {
    cl.skip("covariance", "skipped: no stationary solution");
  } else {
    try {
      fundamental_for_covariance(sc, dt, 2.0 * k.r(), K, -k.r());
      have_cov = true;
      double max_ode = 0.0;
      for (size_t kk = 0; kk < sc.system.modes.size(); ++kk)
        for (size_t jj = 0; jj < sc.system.modes.size(); ++jj)
          max_ode = std::max(
              max_ode, covariance_ode_residual(K, k, sc.system.modes[kk],
                                               int(kk), int(jj)));
      double k_scale = 1e-12;
      for (int i = 0; i < K.n_modes; ++i)
        k_scale = std::max(k_scale, std::abs(K.at(i, i, 0.0)));
      double ode_tol =
          std::max(2.0 * dt * dt * drift_scale * drift_scale * k_scale, 1e-12);
      cl.pass_fail("covariance.ode_residual", max_ode <= ode_tol, max_ode,
                   ode_tol);
      double tail = 0.0;
      for (const auto& row : K.tail_bound)
        for (double v : row) tail = std::max(tail, v);
      cl.pass_fail("covariance.tail_bound", tail < 1e-6 * std::max(k_scale, 1e-12),
                   tail, 1e-6 * std::max(k_scale, 1e-12));
    } catch (const std::runtime_error& e) {
      cl.skip("covariance", std::string("skipped: ") + e.what());
    }
  }

  // Stage 4: Monte Carlo agreement and stationarity.
  int forced = -1;
  for (size_t m = 0; m < sc.system.modes.size(); ++m)
    if (sc.system.modes[m].f != 0.0 && forced < 0) forced = int(m);
  if (!have_cov) {
    cl.skip("monte_carlo", !stable ? "skipped: no stationary solution"
                                   : "skipped: covariance stage unavailable");
  } else if (forced < 0) {
    cl.skip("monte_carlo", "skipped: no forced mode");
  } else try {
    SimConfig cfg;
    cfg.dt = dt;
    cfg.T = 2.0 * k.r() + 10.0 * dt;
    cfg.n_paths = std::max(sc.run.paths, 1000);
    cfg.seed = sc.run.seed;
    cfg.burn_in = sc.run.burn_in;
    cfg.stationary_init = true;
    std::vector<double> rec = {0.0, 0.5 * k.r(), k.r(), 2.0 * k.r()};
    for (double& t : rec) t = dt * std::lround(t / dt);
    EnsembleStats ens =
        simulate_ensemble(sc.system, k, cfg, rec, threads);
    report["paths"] = cfg.n_paths;

    std::vector<PairSpec> pairs = {
        {forced, forced, 0.0, 0.0},
        {forced, forced, 0.0, rec[2]},
    };
    auto est = mc_covariance(ens, pairs);
    double z0 = (est[0].cov - K.at(forced, forced, 0.0)) / est[0].se;
    double zr = (est[1].cov - K.at(forced, forced, rec[2])) / est[1].se;
    cl.pass_fail("monte_carlo.K0_zscore", std::abs(z0) < 4.0, z0, 4.0);
    cl.pass_fail("monte_carlo.Kr_zscore", std::abs(zr) < 4.0, zr, 4.0);

    auto zs = stationarity_test(ens, std::span(pairs.data(), 1), rec[2]);
    cl.pass_fail("monte_carlo.stationarity_zscore", std::abs(zs[0]) < 4.0,
                 zs[0], 4.0);
  } catch (const std::runtime_error& e) {
    cl.pass_fail(std::string("monte_carlo (") + e.what() + ")", false, 0.0,
                 0.0);
  }

  report["checks"] = cl.checks;
  report["all_passed"] = cl.all_pass;

  auto f = open_out(out_dir, "verify_report.json");
  f << report.dump(2) << "\n";
  std::cout << report.dump(2) << "\n";
  return cl.all_pass ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Spectral tools for linear delay evolution equations with additive noise"};
  app.require_subcommand(1);

  std::string scenario_path, out_dir = ".";
  std::uint64_t seed = 0;
  bool seed_set = false;
  int threads = 1;
  app.add_option("--scenario", scenario_path, "Scenario JSON file")
      ->required();
  auto* seed_opt = app.add_option("--seed", seed, "Override the scenario seed");
  app.add_option("--out-dir", out_dir, "Directory for output files");
  app.add_option("--threads", threads, "Worker threads for ensembles");

  auto* c_stab = app.add_subcommand("stability", "Per-criterion stability verdicts");

  auto* c_roots = app.add_subcommand("roots", "Characteristic roots per mode");
  std::string window = "-20,1", roots_out = "roots.csv";
  double im_cap = 50.0;
  c_roots->add_option("--re-window", window, "Real-part window lo,hi");
  c_roots->add_option("--im-cap", im_cap, "Imaginary-part cap");
  c_roots->add_option("--out", roots_out, "Output CSV");

  auto* c_fund = app.add_subcommand("fundamental", "Fundamental solutions g_k");
  double f_T = 10.0, f_dt = 0.005;
  std::string fund_out = "g.csv";
  c_fund->add_option("--T", f_T, "Horizon");
  c_fund->add_option("--dt", f_dt, "Grid step (must divide r)");
  c_fund->add_option("--out", fund_out, "Output CSV");

  auto* c_cov = app.add_subcommand("covariance", "Stationary covariance table");
  std::string lags = "-1:0.01:5", cov_out = "K.csv";
  c_cov->add_option("--lags", lags, "Lag grid lo:step:hi");
  c_cov->add_option("--out", cov_out, "Output CSV");

  auto* c_sim = app.add_subcommand("simulate", "Euler-Maruyama ensemble");
  int paths = 0;
  double s_dt = 0.0, s_T = 0.0;
  bool stationary_start = false;
  std::string sim_out = "stats.csv";
  c_sim->add_option("--paths", paths, "Number of paths");
  c_sim->add_option("--dt", s_dt, "Grid step (must divide r)");
  c_sim->add_option("--T", s_T, "Horizon");
  c_sim->add_flag("--stationary-start", stationary_start,
                  "Burn in each path to the stationary law");
  c_sim->add_option("--out", sim_out, "Output CSV");

  auto* c_verify = app.add_subcommand(
      "verify", "Full cross-check pipeline (roots, g, K, Monte Carlo)");

  CLI11_PARSE(app, argc, argv);
  seed_set = seed_opt->count() > 0;

  try {
    Scenario sc = load_scenario(scenario_path);
    if (seed_set) sc.run.seed = seed;
    if (c_sim->parsed()) {
      if (paths > 0) sc.run.paths = paths;
      if (s_dt > 0.0) sc.run.dt = s_dt;
      if (s_T > 0.0) sc.run.T = s_T;
      if (stationary_start) sc.run.stationary_init = true;
    }
    if (c_stab->parsed()) return cmd_stability(sc);
    if (c_roots->parsed())
      return cmd_roots(sc, out_dir, roots_out, window, im_cap);
    if (c_fund->parsed()) return cmd_fundamental(sc, out_dir, fund_out, f_T, f_dt);
    if (c_cov->parsed()) return cmd_covariance(sc, out_dir, cov_out, lags);
    if (c_sim->parsed()) return cmd_simulate(sc, out_dir, sim_out, threads);
    if (c_verify->parsed()) return cmd_verify(sc, out_dir, threads);
  } catch (const ScenarioError& e) {
    std::cerr << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
  return 0;
}
