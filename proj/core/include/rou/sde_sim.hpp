#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "rou/delay_kernel.hpp"
#include "rou/fundamental.hpp"
#include "rou/spectral_models.hpp"

namespace rou {

struct SimConfig {
  double dt = 0.0;            // must divide r
  double T = 0.0;             // horizon after t = 0
  int n_paths = 1;
  std::uint64_t seed = 0;
  double burn_in = 0.0;       // stationary start: length of the pre-roll
  bool stationary_init = false;
};

/// Deterministic per-path Gaussian stream: (seed, path index) fully
/// determines the increments, independent of threading.
class PathRng {
 public:
  PathRng(std::uint64_t master_seed, std::uint64_t path_index);
  double normal();

 private:
  std::uint64_t s_;
  bool have_spare_ = false;
  double spare_ = 0.0;
  std::uint64_t next_u64();
};

/// Initial data: per-mode history segments plus the state at t = 0.
struct InitState {
  std::vector<Segment> phi1;  // one segment per mode
  std::vector<double> phi0;
};

InitState zero_init(const ModeSystem& sys, const DelayKernel& k, double dt);

/// Full Euler-Maruyama trajectory of one path (one shared Brownian
/// increment per step across all modes).
struct FullPath {
  double dt = 0.0;
  std::vector<std::vector<double>> y;  // [mode][time index 0..N]
  std::vector<double> dB;              // increments over [0, T), size N
  bool overflowed = false;
};

FullPath simulate_path(const ModeSystem& sys, const DelayKernel& k,
                       const SimConfig& cfg, const InitState& init,
                       int path_index);

/// One stationary-law draw of the initial data, produced by a burn-in of
/// length cfg.burn_in from zero initial data (truncated two-sided
/// convolution). Throws for unstable scenarios (checked via decay fits).
InitState stationary_start(const ModeSystem& sys, const DelayKernel& k,
                           const SimConfig& cfg, int path_index);

/// Burn-in horizon making the fitted transient M e^{-nu T_b} < 1e-4 relative.
double default_burn_in(const ModeSystem& sys, const DelayKernel& k, double dt);

/// Ensemble run recording per-mode values at the given times (>= 0).
/// With cfg.stationary_init each path pre-rolls its own burn-in.
struct EnsembleStats {
  std::vector<double> record_times;
  // samples[path][record][mode]
  std::vector<std::vector<std::vector<double>>> samples;
  int n_overflowed = 0;
};

EnsembleStats simulate_ensemble(const ModeSystem& sys, const DelayKernel& k,
                                const SimConfig& cfg,
                                std::vector<double> record_times,
                                int threads = 1);

struct PairSpec {
  int k1 = 0, k2 = 0;
  double t1 = 0.0, t2 = 0.0;
};

struct PairEstimate {
  PairSpec spec;
  double cov = 0.0;
  double se = 0.0;   // jackknife standard error
  double mean1 = 0.0, mean2 = 0.0;
};

/// Empirical lag covariances across paths with jackknife standard errors.
/// Throws when fewer than 30 paths are available.
std::vector<PairEstimate> mc_covariance(const EnsembleStats& ens,
                                        std::span<const PairSpec> pairs);

/// Stationarity z-scores: compares Cov(t1,t2) against Cov(t1+s,t2+s)
/// with the pooled standard error.
std::vector<double> stationarity_test(const EnsembleStats& ens,
                                      std::span<const PairSpec> base_pairs,
                                      double shift);

/// Pathwise variation-of-constants check: for each dt in the ladder,
/// compares the stepped trajectory against the discrete convolution
///   G(t) phi0 + history response + sum_j g(t - s_j) f dB_j
/// built from the same increments, and reports the max-over-t RMS error.
/// With all f_k = 0 the trajectory side is the deterministic RK4
/// method-of-steps solve (the stochastic stepper is Euler-Maruyama).
struct VocPoint {
  double dt;
  double err;
};

std::vector<VocPoint> pathwise_voc_check(const ModeSystem& sys,
                                         const DelayKernel& k, double T,
                                         std::span<const double> dts,
                                         int n_paths, std::uint64_t seed);

/// Least-squares slope of log(err) against log(dt).
double voc_slope(std::span<const VocPoint> points);

}  // namespace rou
