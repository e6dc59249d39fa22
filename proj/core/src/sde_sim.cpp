#include "rou/sde_sim.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <thread>

namespace rou {

namespace {

constexpr double kOverflowLimit = 1e12;

std::uint64_t splitmix64(std::uint64_t& x) {
  x += 0x9e3779b97f4a7c15ULL;
  std::uint64_t z = x;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

long checked_q(double r, double dt) {
  long q = std::lround(r / dt);
  if (q < 1 || std::abs(double(q) * dt - r) > 1e-9 * r)
    throw std::invalid_argument("sde_sim: dt must divide r");
  return q;
}

}  // namespace

PathRng::PathRng(std::uint64_t master_seed, std::uint64_t path_index) {
  std::uint64_t x = master_seed;
  std::uint64_t a = splitmix64(x);
  x = path_index ^ 0x5851f42d4c957f2dULL;
  std::uint64_t b = splitmix64(x);
  s_ = a ^ (b + 0x9e3779b97f4a7c15ULL);
}

std::uint64_t PathRng::next_u64() { return splitmix64(s_); }

double PathRng::normal() {
  if (have_spare_) {
    have_spare_ = false;
    return spare_;
  }
  // Box-Muller on explicitly constructed uniforms (platform independent).
  double u1 = (double(next_u64() >> 11) + 1.0) * 0x1p-53;  // (0, 1]
  double u2 = double(next_u64() >> 11) * 0x1p-53;          // [0, 1)
  double rad = std::sqrt(-2.0 * std::log(u1));
  double ang = 2.0 * 3.14159265358979323846 * u2;
  spare_ = rad * std::sin(ang);
  have_spare_ = true;
  return rad * std::cos(ang);
}

InitState zero_init(const ModeSystem& sys, const DelayKernel& k, double dt) {
  long q = checked_q(k.r(), dt);
  InitState init;
  init.phi1.assign(sys.modes.size(),
                   Segment{std::vector<double>(size_t(q + 1), 0.0), dt});
  init.phi0.assign(sys.modes.size(), 0.0);
  return init;
}

namespace {

// Euler-Maruyama stepper over all modes with a shared Brownian increment
// and a circular history buffer per mode.
class EmStepper {
 public:
  EmStepper(const ModeSystem& sys, const DelayKernel& k, double dt)
      : sys_(sys), dt_(dt), q_(checked_q(k.r(), dt)),
        alpha_(k.alpha()) {
    if (k.beta().type != BetaKernel::Type::Zero) {
      bw_.resize(size_t(q_ + 1));
      for (long j = 0; j <= q_; ++j) {
        double w = (j == 0 || j == q_) ? 0.5 : 1.0;
        bw_[size_t(j)] = w * dt * k.beta_at(-k.r() + double(j) * dt);
      }
    }
    buf_.assign(sys.modes.size(), std::vector<double>(size_t(q_ + 1), 0.0));
  }

  void reset(const InitState& init) {
    if (init.phi1.size() != sys_.modes.size())
      throw std::invalid_argument("EmStepper: init size mismatch");
    for (size_t m = 0; m < buf_.size(); ++m) {
      if (long(init.phi1[m].values.size()) != q_ + 1)
        throw std::invalid_argument("EmStepper: init segment grid mismatch");
      buf_[m] = init.phi1[m].values;
      buf_[m][size_t(q_)] = init.phi0[m];
    }
    pos_ = q_;
    overflowed_ = false;
  }

  void step(double dB) {
    long next = (pos_ + 1) % (q_ + 1);
    for (size_t m = 0; m < buf_.size(); ++m) {
      const auto& mode = sys_.modes[m];
      auto& b = buf_[m];
      double cur = b[size_t(pos_)];
      double delayed = b[size_t(next)];  // oldest slot holds y(t - r)
      double drift = mode.mu * cur + alpha_ * mode.m1 * delayed;
      if (!bw_.empty() && mode.m2 != 0.0) {
        double acc = 0.0;
        for (long j = 0; j <= q_; ++j)
          acc += bw_[size_t(j)] * b[size_t((next + j) % (q_ + 1))];
        drift += mode.m2 * acc;
      }
      double y = cur + dt_ * drift + mode.f * dB;
      if (!std::isfinite(y) || std::abs(y) > kOverflowLimit) {
        overflowed_ = true;
        y = cur;  // hold; the path is flagged, not crashed
      }
      scratch_[m] = y;
    }
    for (size_t m = 0; m < buf_.size(); ++m) buf_[m][size_t(next)] = scratch_[m];
    pos_ = next;
  }

  void prepare() { scratch_.assign(buf_.size(), 0.0); }

  double value(size_t mode) const { return buf_[mode][size_t(pos_)]; }
  bool overflowed() const { return overflowed_; }

  /// Current history window as segments (t - r .. t) plus current values.
  InitState snapshot(double dt) const {
    InitState out;
    out.phi1.resize(buf_.size());
    out.phi0.resize(buf_.size());
    for (size_t m = 0; m < buf_.size(); ++m) {
      out.phi1[m].step = dt;
      out.phi1[m].values.resize(size_t(q_ + 1));
      for (long j = 0; j <= q_; ++j)
        out.phi1[m].values[size_t(j)] =
            buf_[m][size_t((pos_ + 1 + j) % (q_ + 1))];
      out.phi0[m] = value(m);
    }
    return out;
  }

 private:
  const ModeSystem& sys_;
  double dt_;
  long q_;
  double alpha_;
  std::vector<double> bw_;
  std::vector<std::vector<double>> buf_;
  std::vector<double> scratch_;
  long pos_ = 0;
  bool overflowed_ = false;
};

}  // namespace

FullPath simulate_path(const ModeSystem& sys, const DelayKernel& k,
                       const SimConfig& cfg, const InitState& init,
                       int path_index) {
  const long n = std::lround(cfg.T / cfg.dt);
  if (n < 1) throw std::invalid_argument("simulate_path: T must be > 0");
  EmStepper st(sys, k, cfg.dt);
  st.prepare();
  st.reset(init);
  PathRng rng(cfg.seed, std::uint64_t(path_index));

  FullPath out;
  out.dt = cfg.dt;
  out.y.assign(sys.modes.size(), std::vector<double>(size_t(n + 1)));
  out.dB.resize(size_t(n));
  const double sq = std::sqrt(cfg.dt);
  for (size_t m = 0; m < sys.modes.size(); ++m) out.y[m][0] = st.value(m);
  for (long i = 0; i < n; ++i) {
    double dB = sq * rng.normal();
    out.dB[size_t(i)] = dB;
    st.step(dB);
    for (size_t m = 0; m < sys.modes.size(); ++m)
      out.y[m][size_t(i + 1)] = st.value(m);
  }
  out.overflowed = st.overflowed();
  return out;
}

double default_burn_in(const ModeSystem& sys, const DelayKernel& k, double dt) {
  double tb = 2.0 * k.r();
  for (const auto& mode : sys.modes) {
    double T = std::max(10.0 * k.r(), 200.0 * dt);
    FundamentalRow g = solve_fundamental(mode, k, T, dt);
    DecayFit fit = fit_decay(g);
    if (!(fit.nu > 0.0))
      throw std::runtime_error("default_burn_in: unstable scenario");
    tb = std::max(tb, std::log(1e4 * std::max(fit.M, 1.0)) / fit.nu);
  }
  return dt * std::ceil(tb / dt);
}

InitState stationary_start(const ModeSystem& sys, const DelayKernel& k,
                           const SimConfig& cfg, int path_index) {
  double tb = cfg.burn_in > 0.0 ? cfg.burn_in
                                : default_burn_in(sys, k, cfg.dt);
  const long n = std::lround(tb / cfg.dt);
  EmStepper st(sys, k, cfg.dt);
  st.prepare();
  st.reset(zero_init(sys, k, cfg.dt));
  PathRng rng(cfg.seed, std::uint64_t(path_index));
  const double sq = std::sqrt(cfg.dt);
  for (long i = 0; i < n; ++i) st.step(sq * rng.normal());
  if (st.overflowed())
    throw std::runtime_error("stationary_start: overflow during burn-in");
  return st.snapshot(cfg.dt);
}

EnsembleStats simulate_ensemble(const ModeSystem& sys, const DelayKernel& k,
                                const SimConfig& cfg,
                                std::vector<double> record_times,
                                int threads) {
  std::sort(record_times.begin(), record_times.end());
  std::vector<long> record_idx;
  for (double t : record_times) {
    long i = std::lround(t / cfg.dt);
    if (i < 0 || std::abs(double(i) * cfg.dt - t) > 1e-9 * (1.0 + t))
      throw std::invalid_argument(
          "simulate_ensemble: record time not on the grid");
    record_idx.push_back(i);
  }
  const long n = record_idx.empty() ? 0 : record_idx.back();
  double tb = 0.0;
  if (cfg.stationary_init)
    tb = cfg.burn_in > 0.0 ? cfg.burn_in : default_burn_in(sys, k, cfg.dt);
  const long n_burn = std::lround(tb / cfg.dt);

  EnsembleStats out;
  out.record_times = record_times;
  out.samples.assign(size_t(cfg.n_paths), {});
  std::vector<char> over(size_t(cfg.n_paths), 0);

  auto worker = [&](int p_lo, int p_hi) {
    EmStepper st(sys, k, cfg.dt);
    st.prepare();
    const double sq = std::sqrt(cfg.dt);
    for (int p = p_lo; p < p_hi; ++p) {
      st.reset(zero_init(sys, k, cfg.dt));
      PathRng rng(cfg.seed, std::uint64_t(p));
      for (long i = 0; i < n_burn; ++i) st.step(sq * rng.normal());

      auto& rec = out.samples[size_t(p)];
      rec.assign(record_times.size(), std::vector<double>(sys.modes.size()));
      size_t next_rec = 0;
      auto capture = [&](long i) {
        while (next_rec < record_idx.size() && record_idx[next_rec] == i) {
          for (size_t m = 0; m < sys.modes.size(); ++m)
            rec[next_rec][m] = st.value(m);
          ++next_rec;
        }
      };
      capture(0);
      for (long i = 1; i <= n; ++i) {
        st.step(sq * rng.normal());
        capture(i);
      }
      over[size_t(p)] = st.overflowed() ? 1 : 0;
    }
  };

  threads = std::max(1, threads);
  if (threads == 1 || cfg.n_paths < 2 * threads) {
    worker(0, cfg.n_paths);
  } else {
    std::vector<std::thread> pool;
    int chunk = (cfg.n_paths + threads - 1) / threads;
    for (int t = 0; t < threads; ++t) {
      int lo = t * chunk, hi = std::min(cfg.n_paths, lo + chunk);
      if (lo >= hi) break;
      pool.emplace_back(worker, lo, hi);
    }
    for (auto& th : pool) th.join();
  }
  for (char c : over) out.n_overflowed += int(c);
  return out;
}

namespace {

size_t record_index(const EnsembleStats& ens, double t) {
  for (size_t i = 0; i < ens.record_times.size(); ++i)
    if (std::abs(ens.record_times[i] - t) < 1e-9 * (1.0 + std::abs(t)))
      return i;
  throw std::invalid_argument("mc_covariance: time not among record times");
}

PairEstimate estimate_pair(const EnsembleStats& ens, const PairSpec& spec) {
  const size_t i1 = record_index(ens, spec.t1);
  const size_t i2 = record_index(ens, spec.t2);
  const size_t n = ens.samples.size();
  std::vector<double> x(n), y(n);
  for (size_t p = 0; p < n; ++p) {
    x[p] = ens.samples[p][i1][size_t(spec.k1)];
    y[p] = ens.samples[p][i2][size_t(spec.k2)];
  }
  double sx = 0, sy = 0, sxy = 0;
  for (size_t p = 0; p < n; ++p) {
    sx += x[p];
    sy += y[p];
    sxy += x[p] * y[p];
  }
  double nn = double(n);
  PairEstimate est;
  est.spec = spec;
  est.mean1 = sx / nn;
  est.mean2 = sy / nn;
  est.cov = sxy / nn - est.mean1 * est.mean2;

  // Jackknife over paths.
  double nm1 = nn - 1.0;
  std::vector<double> loo(n);
  double acc = 0.0;
  for (size_t p = 0; p < n; ++p) {
    double mx = (sx - x[p]) / nm1, my = (sy - y[p]) / nm1;
    loo[p] = (sxy - x[p] * y[p]) / nm1 - mx * my;
    acc += loo[p];
  }
  double mean_loo = acc / nn;
  double var = 0.0;
  for (double v : loo) var += (v - mean_loo) * (v - mean_loo);
  est.se = std::sqrt(nm1 / nn * var);
  return est;
}

}  // namespace

std::vector<PairEstimate> mc_covariance(const EnsembleStats& ens,
                                        std::span<const PairSpec> pairs) {
  if (ens.samples.size() < 30)
    throw std::invalid_argument("mc_covariance: need at least 30 paths");
  std::vector<PairEstimate> out;
  out.reserve(pairs.size());
  for (const auto& p : pairs) out.push_back(estimate_pair(ens, p));
  return out;
}

std::vector<double> stationarity_test(const EnsembleStats& ens,
                                      std::span<const PairSpec> base_pairs,
                                      double shift) {
  std::vector<double> z;
  z.reserve(base_pairs.size());
  for (const auto& p : base_pairs) {
    PairEstimate a = estimate_pair(ens, p);
    PairSpec shifted = p;
    shifted.t1 += shift;
    shifted.t2 += shift;
    PairEstimate b = estimate_pair(ens, shifted);
    double se = std::hypot(a.se, b.se);
    z.push_back(se > 0.0 ? (a.cov - b.cov) / se : 0.0);
  }
  return z;
}

std::vector<VocPoint> pathwise_voc_check(const ModeSystem& sys,
                                         const DelayKernel& k, double T,
                                         std::span<const double> dts,
                                         int n_paths, std::uint64_t seed) {
  bool deterministic = true;
  for (const auto& m : sys.modes)
    if (m.f != 0.0) deterministic = false;

  std::vector<VocPoint> out;
  for (double dt : dts) {
    const long q = checked_q(k.r(), dt);
    const long n = std::lround(T / dt);

    // Smooth fixed initial history, phi0 = phi1(0).
    InitState init;
    init.phi1.resize(sys.modes.size());
    init.phi0.resize(sys.modes.size());
    for (size_t m = 0; m < sys.modes.size(); ++m) {
      init.phi1[m].step = dt;
      init.phi1[m].values.resize(size_t(q + 1));
      for (long j = 0; j <= q; ++j) {
        double th = -k.r() + double(j) * dt;
        init.phi1[m].values[size_t(j)] =
            (std::cos(2.0 * th) + 0.3 * th) / double(1 + m);
      }
      init.phi0[m] = init.phi1[m].values.back();
    }

    // Convolution building blocks per mode.
    std::vector<FundamentalRow> g;
    std::vector<std::vector<double>> hist_resp;
    for (size_t m = 0; m < sys.modes.size(); ++m) {
      g.push_back(solve_fundamental(sys.modes[m], k, T, dt));
      Segment s_phi = structure_apply(k, sys.modes[m], init.phi1[m]);
      hist_resp.push_back(history_response(g.back(), s_phi));
    }

    double err;
    if (deterministic) {
      err = 0.0;
      for (size_t m = 0; m < sys.modes.size(); ++m) {
        std::vector<double> y =
            solve_with_history(sys.modes[m], k, init.phi1[m], init.phi0[m], T, dt);
        for (long i = 0; i <= n; ++i) {
          double conv = g[m].g[size_t(i)] * init.phi0[m] + hist_resp[m][size_t(i)];
          err = std::max(err, std::abs(y[size_t(i)] - conv));
        }
      }
    } else {
      double sum_sq = 0.0;
      SimConfig cfg;
      cfg.dt = dt;
      cfg.T = T;
      cfg.seed = seed;
      for (int p = 0; p < n_paths; ++p) {
        FullPath path = simulate_path(sys, k, cfg, init, p);
        double path_err = 0.0;
        for (size_t m = 0; m < sys.modes.size(); ++m) {
          const auto& gm = g[m].g;
          for (long i = 1; i <= n; ++i) {
            double conv =
                gm[size_t(i)] * init.phi0[m] + hist_resp[m][size_t(i)];
            double stoch = 0.0;
            for (long j = 0; j < i; ++j)
              stoch += gm[size_t(i - j)] * path.dB[size_t(j)];
            conv += sys.modes[m].f * stoch;
            path_err = std::max(path_err,
                                std::abs(path.y[m][size_t(i)] - conv));
          }
        }
        sum_sq += path_err * path_err;
      }
      err = std::sqrt(sum_sq / double(n_paths));
    }
    out.push_back({dt, err});
  }
  return out;
}

double voc_slope(std::span<const VocPoint> points) {
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (const auto& p : points) {
    double x = std::log(p.dt), y = std::log(std::max(p.err, 1e-300));
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  double n = double(points.size());
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

}  // namespace rou
