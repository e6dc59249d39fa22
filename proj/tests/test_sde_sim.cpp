#include <cmath>
#include <numbers>
#include <vector>

#include "doctest.h"
#include "rou/sde_sim.hpp"

using namespace rou;

namespace {

ModeSystem ou_system(double f = 1.0) {
  ModeSystem sys;
  sys.modes = {{-1.0, 0.0, 0.0, f, 1}};
  return sys;
}

DelayKernel unit_kernel() { return DelayKernel(1.0, 0.0, BetaKernel::zero()); }

}  // namespace

TEST_CASE("per-path RNG streams are reproducible and distinct") {
  PathRng a(42, 7), b(42, 7), c(42, 8), d(43, 7);
  bool all_equal_c = true, all_equal_d = true;
  double sum = 0.0, sum2 = 0.0;
  const int n = 100000;
  for (int i = 0; i < n; ++i) {
    double x = a.normal();
    CHECK(x == b.normal());
    double xc = c.normal(), xd = d.normal();
    all_equal_c = all_equal_c && x == xc;
    all_equal_d = all_equal_d && x == xd;
    sum += x;
    sum2 += x * x;
  }
  CHECK(!all_equal_c);
  CHECK(!all_equal_d);
  CHECK(std::abs(sum / n) < 0.02);
  CHECK(std::abs(sum2 / n - 1.0) < 0.02);
}

TEST_CASE("zero forcing and zero data stay at zero") {
  ModeSystem sys = ou_system(0.0);
  DelayKernel k = unit_kernel();
  SimConfig cfg{0.01, 2.0, 1, 5, 0.0, false};
  auto path = simulate_path(sys, k, cfg, zero_init(sys, k, cfg.dt), 0);
  for (double v : path.y[0]) CHECK(v == 0.0);
  CHECK(!path.overflowed);
  CHECK(path.dB.size() == 200);
}

TEST_CASE("one step of the scheme is exact") {
  ModeSystem sys = ou_system();
  DelayKernel k = unit_kernel();
  SimConfig cfg{0.01, 0.5, 1, 11, 0.0, false};
  auto path = simulate_path(sys, k, cfg, zero_init(sys, k, cfg.dt), 3);
  // From zero data: y_1 = f * dB_0, y_2 = y_1 + mu*y_1*dt + f*dB_1.
  CHECK(path.y[0][1] == doctest::Approx(path.dB[0]).epsilon(1e-14));
  CHECK(path.y[0][2] ==
        doctest::Approx(path.y[0][1] * (1.0 - 0.01) + path.dB[1]).epsilon(1e-14));
}

TEST_CASE("paths are deterministic given (seed, path index)") {
  ModeSystem sys = ou_system();
  DelayKernel k = unit_kernel();
  SimConfig cfg{0.01, 1.0, 1, 99, 0.0, false};
  auto p1 = simulate_path(sys, k, cfg, zero_init(sys, k, cfg.dt), 4);
  auto p2 = simulate_path(sys, k, cfg, zero_init(sys, k, cfg.dt), 4);
  CHECK(p1.y[0] == p2.y[0]);
  auto p3 = simulate_path(sys, k, cfg, zero_init(sys, k, cfg.dt), 5);
  CHECK(p1.y[0] != p3.y[0]);
}

TEST_CASE("identical modes driven by the shared noise coincide") {
  ModeSystem sys;
  sys.modes = {{-2.0, -2.0, 0.0, 0.7, 1}, {-2.0, -2.0, 0.0, 0.7, 2}};
  DelayKernel k(0.5, 0.3, BetaKernel::zero());
  SimConfig cfg{0.005, 2.0, 1, 17, 0.0, false};
  auto path = simulate_path(sys, k, cfg, zero_init(sys, k, cfg.dt), 0);
  for (size_t i = 0; i < path.y[0].size(); ++i)
    CHECK(path.y[0][i] == path.y[1][i]);
}

TEST_CASE("ensembles are independent of the thread count") {
  ModeSystem sys = ou_system();
  DelayKernel k = unit_kernel();
  SimConfig cfg{0.01, 2.0, 64, 23, 0.0, false};
  auto e1 = simulate_ensemble(sys, k, cfg, {0.5, 1.0, 2.0}, 1);
  auto e4 = simulate_ensemble(sys, k, cfg, {0.5, 1.0, 2.0}, 4);
  REQUIRE(e1.samples.size() == e4.samples.size());
  for (size_t p = 0; p < e1.samples.size(); ++p)
    CHECK(e1.samples[p] == e4.samples[p]);
}

TEST_CASE("overflowing paths are flagged and held finite") {
  ModeSystem sys;
  sys.modes = {{40.0, 0.0, 0.0, 1.0, 1}};  // strongly growing mode
  DelayKernel k = unit_kernel();
  SimConfig cfg{0.01, 10.0, 2, 3, 0.0, false};
  auto path = simulate_path(sys, k, cfg, zero_init(sys, k, cfg.dt), 0);
  CHECK(path.overflowed);
  for (double v : path.y[0]) CHECK(std::isfinite(v));
  auto ens = simulate_ensemble(sys, k, cfg, {10.0}, 2);
  CHECK(ens.n_overflowed == 2);
}

TEST_CASE("stationary start draws the stationary variance") {
  ModeSystem sys = ou_system();
  DelayKernel k = unit_kernel();
  SimConfig cfg{0.01, 1.0, 1, 2024, 0.0, true};
  cfg.burn_in = default_burn_in(sys, k, cfg.dt);
  CHECK(cfg.burn_in >= 2.0);
  const int n = 10000;
  double s2 = 0.0;
  for (int p = 0; p < n; ++p) {
    auto init = stationary_start(sys, k, cfg, p);
    s2 += init.phi0[0] * init.phi0[0];
  }
  double var = s2 / n;
  double se = std::sqrt(2.0) * 0.5 / std::sqrt(double(n));
  CHECK(std::abs(var - 0.5) < 3.0 * se + 0.01);  // + O(dt) scheme bias
}

TEST_CASE("doubling the burn-in does not move the law") {
  ModeSystem sys = ou_system();
  DelayKernel k = unit_kernel();
  SimConfig cfg{0.01, 0.5, 2000, 5150, 0.0, true};
  cfg.burn_in = default_burn_in(sys, k, cfg.dt);
  auto ens1 = simulate_ensemble(sys, k, cfg, {0.0}, 4);
  SimConfig cfg2 = cfg;
  cfg2.burn_in = 2.0 * cfg.burn_in;
  cfg2.seed = 777;  // independent draws
  auto ens2 = simulate_ensemble(sys, k, cfg2, {0.0}, 4);
  std::vector<PairSpec> pairs{{0, 0, 0.0, 0.0}};
  auto a = mc_covariance(ens1, pairs);
  auto b = mc_covariance(ens2, pairs);
  double z = (a[0].cov - b[0].cov) / std::hypot(a[0].se, b[0].se);
  CHECK(std::abs(z) < 3.5);
}

TEST_CASE("unstable scenarios cannot be burned in") {
  ModeSystem sys;
  sys.modes = {{0.5, 0.0, 0.0, 1.0, 1}};
  DelayKernel k = unit_kernel();
  CHECK_THROWS_AS(default_burn_in(sys, k, 0.01), std::runtime_error);
}

TEST_CASE("Monte Carlo covariance matches the stationary law") {
  ModeSystem sys = ou_system();
  DelayKernel k = unit_kernel();
  SimConfig cfg{0.005, 2.0, 5000, 31, 0.0, true};
  auto ens = simulate_ensemble(sys, k, cfg, {0.0, 1.0}, 4);
  std::vector<PairSpec> pairs{{0, 0, 0.0, 0.0}, {0, 0, 0.0, 1.0}};
  auto est = mc_covariance(ens, pairs);
  REQUIRE(est.size() == 2);
  CHECK(std::abs(est[0].cov - 0.5) < 4.0 * est[0].se + 0.01);
  CHECK(std::abs(est[1].cov - 0.5 * std::exp(-1.0)) < 4.0 * est[1].se + 0.01);
  CHECK(est[0].se > 0.0);
  CHECK(std::abs(est[0].mean1) < 5.0 * est[0].se + 0.05);
}

TEST_CASE("covariance estimation needs enough paths") {
  ModeSystem sys = ou_system();
  DelayKernel k = unit_kernel();
  SimConfig cfg{0.01, 1.0, 10, 1, 0.0, false};
  auto ens = simulate_ensemble(sys, k, cfg, {0.5}, 1);
  std::vector<PairSpec> pairs{{0, 0, 0.5, 0.5}};
  CHECK_THROWS_AS(mc_covariance(ens, pairs), std::invalid_argument);
}

TEST_CASE("stationarity test: zero shift is exactly zero, cold starts fail") {
  ModeSystem sys = ou_system();
  DelayKernel k = unit_kernel();
  std::vector<PairSpec> base{{0, 0, 0.0, 0.0}};

  SimConfig warm{0.01, 2.0, 2000, 64, 0.0, true};
  auto ens = simulate_ensemble(sys, k, warm, {0.0, 1.0}, 4);
  auto z0 = stationarity_test(ens, base, 0.0);
  REQUIRE(z0.size() == 1);
  CHECK(z0[0] == doctest::Approx(0.0));
  auto z1 = stationarity_test(ens, base, 1.0);
  CHECK(std::abs(z1[0]) < 4.0);

  // From zero initial data the variance at 0 is 0 but at t = 1 it is not.
  SimConfig cold{0.01, 2.0, 2000, 64, 0.0, false};
  auto ens_cold = simulate_ensemble(sys, k, cold, {0.0, 1.0}, 4);
  auto zc = stationarity_test(ens_cold, base, 1.0);
  CHECK(std::abs(zc[0]) > 3.0);
}

TEST_CASE("stepped paths follow the variation-of-constants form") {
  ModeSystem sys;
  sys.modes = {{-1.0, -1.0, 0.0, 1.0, 1}};
  DelayKernel k(0.1, 0.5, BetaKernel::zero());
  std::vector<double> dts{0.1 / 50, 0.1 / 100, 0.1 / 200};

  auto pts = pathwise_voc_check(sys, k, 0.5, dts, 40, 2718);
  REQUIRE(pts.size() == dts.size());
  for (auto p : pts) CHECK(p.err > 0.0);
  CHECK(voc_slope(pts) > 0.7);  // strong order ~1 for additive noise

  ModeSystem det = sys;
  det.modes[0].f = 0.0;
  auto dpts = pathwise_voc_check(det, k, 0.5, dts, 1, 2718);
  CHECK(voc_slope(dpts) > 1.7);  // deterministic comparison is O(dt^2)
}

TEST_CASE("record times must sit on the grid") {
  ModeSystem sys = ou_system();
  DelayKernel k = unit_kernel();
  SimConfig cfg{0.01, 1.0, 2, 1, 0.0, false};
  CHECK_THROWS_AS(simulate_ensemble(sys, k, cfg, {0.505001}, 1),
                  std::invalid_argument);
  CHECK_THROWS_AS(simulate_path(sys, k, SimConfig{0.3, 1.0, 1, 1, 0.0, false},
                                zero_init(sys, k, 0.01), 0),
                  std::invalid_argument);  // dt does not divide r
}
