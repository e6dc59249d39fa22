#include "rou/fundamental.hpp"

#include <cmath>
#include <stdexcept>

#include "rou/characteristic.hpp"

namespace rou {

namespace {

long checked_delay_steps(double r, double dt) {
  long q = std::lround(r / dt);
  if (q < 1 || std::abs(double(q) * dt - r) > 1e-9 * r)
    throw std::invalid_argument("dt must divide the delay horizon r");
  return q;
}

// Trajectory plus initial history on the common grid, with dense
// evaluation at half-steps via cubic Hermite. All query times are
// multiples of dt/2 by construction of the RK4 stages.
struct State {
  const std::vector<double>& hist;   // q+1 values on [-r, 0], left limits
  std::vector<double>& y;            // values at t_i = i*dt, i >= 0
  std::vector<double>& dy;           // right-derivatives at grid points
  std::vector<double> hist_d;        // finite-difference derivative of hist
  long q;
  double dt;

  State(const std::vector<double>& h, std::vector<double>& yv,
        std::vector<double>& dv, long q_, double dt_)
      : hist(h), y(yv), dy(dv), q(q_), dt(dt_) {
    hist_d.resize(hist.size());
    const size_t n = hist.size();
    if (n >= 2) {
      hist_d[0] = (hist[1] - hist[0]) / dt;
      hist_d[n - 1] = (hist[n - 1] - hist[n - 2]) / dt;
      for (size_t i = 1; i + 1 < n; ++i)
        hist_d[i] = (hist[i + 1] - hist[i - 1]) / (2.0 * dt);
    }
  }

  // Value at half-index h2 (time = h2 * dt / 2). from_left selects the
  // left limit at the t = 0 jump between history and trajectory.
  double at_half(long h2, bool from_left) const {
    if (h2 % 2 == 0) {
      long i = h2 / 2;
      if (i > 0) return y[size_t(i)];
      if (i == 0) return from_left ? hist[size_t(q)] : y[0];
      long hi = i + q;  // history index
      return hi >= 0 ? hist[size_t(hi)] : 0.0;
    }
    // Midpoint of cell [i, i+1]: Hermite H(1/2) = (y0+y1)/2 + dt*(d0-d1)/8.
    long i = (h2 - 1) / 2;
    double y0, y1, d0, d1;
    if (i >= 0) {
      y0 = y[size_t(i)];
      y1 = y[size_t(i + 1)];
      d0 = dy[size_t(i)];
      d1 = dy[size_t(i + 1)];
    } else {
      long hi = i + q;
      if (hi + 1 < 0) return 0.0;
      if (hi < 0) return 0.5 * hist[0];  // cell straddling -r; history is 0 before
      y0 = hist[size_t(hi)];
      y1 = hist[size_t(hi + 1)];
      d0 = hist_d[size_t(hi)];
      d1 = hist_d[size_t(hi + 1)];
    }
    return 0.5 * (y0 + y1) + dt * (d0 - d1) / 8.0;
  }
};

// Shared RK4 method-of-steps core. hist holds the initial segment
// (left limits at 0), y0 the state at t = 0.
void integrate(const ModeEntry& mode, const DelayKernel& k,
               const std::vector<double>& hist, double y0, long n_steps,
               double dt, std::vector<double>& y, std::vector<double>& dy) {
  const long q = checked_delay_steps(k.r(), dt);
  if (long(hist.size()) != q + 1)
    throw std::invalid_argument("history segment grid does not match dt, r");

  y.assign(size_t(n_steps + 1), 0.0);
  dy.assign(size_t(n_steps + 1), 0.0);
  y[0] = y0;
  State st{hist, y, dy, q, dt};

  const bool has_discrete = k.alpha() != 0.0 && mode.m1 != 0.0;
  const bool has_distributed =
      mode.m2 != 0.0 && k.beta().type != BetaKernel::Type::Zero;

  // Quadrature weights beta(theta_j) * dt with trapezoid end weights.
  std::vector<double> bw;
  if (has_distributed) {
    bw.resize(size_t(q + 1));
    for (long j = 0; j <= q; ++j) {
      double w = (j == 0 || j == q) ? 0.5 : 1.0;
      bw[size_t(j)] = w * dt * k.beta_at(-k.r() + double(j) * dt);
    }
  }

  // rhs at time t = s2*dt/2 where the state value there is val.
  auto rhs = [&](long s2, double val, bool end_of_step) {
    double out = mode.mu * val;
    if (has_discrete)
      out += k.alpha() * mode.m1 * st.at_half(s2 - 2 * q, end_of_step);
    if (has_distributed) {
      double acc = 0.0;
      for (long j = 0; j < q; ++j) {
        long h2 = s2 - 2 * q + 2 * j;
        double v;
        if (h2 == 0) {
          // Quadrature node sitting on the t = 0 jump: the two adjacent
          // trapezoid cells see the left and right limits, so the node
          // carries their mean.
          v = 0.5 * (st.at_half(0, true) + st.at_half(0, false));
        } else {
          v = st.at_half(h2, false);
        }
        acc += bw[size_t(j)] * v;
      }
      acc += bw[size_t(q)] * val;  // theta = 0 endpoint is the stage value
      out += mode.m2 * acc;
    }
    return out;
  };

  for (long i = 0; i < n_steps; ++i) {
    const long s2 = 2 * i;  // half-index of t_i
    double x = y[size_t(i)];
    double k1 = rhs(s2, x, false);
    dy[size_t(i)] = k1;
    double k2 = rhs(s2 + 1, x + 0.5 * dt * k1, false);
    double k3 = rhs(s2 + 1, x + 0.5 * dt * k2, false);
    double k4 = rhs(s2 + 2, x + dt * k3, true);
    y[size_t(i + 1)] = x + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  }
  dy[size_t(n_steps)] = rhs(2 * n_steps, y[size_t(n_steps)], false);
}

}  // namespace

double FundamentalRow::at(double t) const {
  if (t < 0.0) return 0.0;
  double pos = t / dt;
  long i = long(pos);
  if (i >= long(g.size()) - 1) return g.back();
  double u = pos - double(i);
  double h00 = (1.0 + 2.0 * u) * (1.0 - u) * (1.0 - u);
  double h10 = u * (1.0 - u) * (1.0 - u);
  double h01 = u * u * (3.0 - 2.0 * u);
  double h11 = u * u * (u - 1.0);
  return h00 * g[size_t(i)] + h10 * dt * dg[size_t(i)] + h01 * g[size_t(i + 1)] +
         h11 * dt * dg[size_t(i + 1)];
}

FundamentalRow solve_fundamental(const ModeEntry& mode, const DelayKernel& k,
                                 double T, double dt) {
  if (T < k.r())
    throw std::invalid_argument("solve_fundamental: need T >= r");
  const long q = checked_delay_steps(k.r(), dt);
  const long n = std::lround(T / dt);
  FundamentalRow row;
  row.dt = dt;
  std::vector<double> hist(size_t(q + 1), 0.0);
  integrate(mode, k, hist, 1.0, n, dt, row.g, row.dg);
  return row;
}

std::vector<double> solve_with_history(const ModeEntry& mode,
                                       const DelayKernel& k,
                                       const Segment& phi1, double phi0,
                                       double T, double dt) {
  const long n = std::lround(T / dt);
  std::vector<double> y, dy;
  integrate(mode, k, phi1.values, phi0, n, dt, y, dy);
  return y;
}

double verify_integral_form(const FundamentalRow& row, const ModeEntry& mode,
                            const DelayKernel& k) {
  const double dt = row.dt;
  const long n = long(row.g.size()) - 1;
  const long q = checked_delay_steps(k.r(), dt);

  auto g_at = [&](long i) { return i < 0 ? 0.0 : row.g[size_t(i)]; };
  // For quadrature nodes landing on the t = 0 jump of g, the midpoint of
  // the two limits keeps the distributed integral second order.
  auto g_mid = [&](long i) { return i == 0 ? 0.5 : g_at(i); };

  // h(s) = alpha*m1*g(s-r) + m2 * integral beta(theta) g(s+theta) dtheta.
  // The discrete term jumps at s = r; keep both one-sided values so each
  // trapezoid cell uses the limits from its own side.
  std::vector<double> h_lo(size_t(n + 1)), h_hi(size_t(n + 1));
  for (long i = 0; i <= n; ++i) {
    double dist = 0.0;
    if (mode.m2 != 0.0 && k.beta().type != BetaKernel::Type::Zero) {
      double acc = 0.0;
      for (long j = 0; j <= q; ++j) {
        double w = (j == 0 || j == q) ? 0.5 : 1.0;
        acc += w * k.beta_at(-k.r() + double(j) * dt) * g_mid(i - q + j);
      }
      dist = mode.m2 * acc * dt;
    }
    double del_hi = k.alpha() * mode.m1 * g_at(i - q);
    double del_lo = i == q ? 0.0 : del_hi;  // g((s-r)^-) = 0 at s = r
    h_hi[size_t(i)] = del_hi + dist;
    h_lo[size_t(i)] = del_lo + dist;
  }

  // I(t) = integral_0^t e^{mu (t-s)} h(s) ds, accumulated recursively.
  double max_res = 0.0;
  double e = std::exp(mode.mu * dt);
  double I = 0.0;
  for (long i = 0; i <= n; ++i) {
    if (i > 0)
      I = e * I + 0.5 * dt * (e * h_hi[size_t(i - 1)] + h_lo[size_t(i)]);
    double res =
        row.g[size_t(i)] - std::exp(mode.mu * double(i) * dt) - I;
    max_res = std::max(max_res, std::abs(res));
  }
  return max_res;
}

Segment structure_apply(const DelayKernel& k, const ModeEntry& mode,
                        const Segment& phi1) {
  const double dt = phi1.step;
  const long q = checked_delay_steps(k.r(), dt);
  if (long(phi1.values.size()) != q + 1)
    throw std::invalid_argument("structure_apply: segment grid mismatch");

  Segment out;
  out.step = dt;
  out.values.resize(size_t(q + 1));
  for (long i = 0; i <= q; ++i) {
    // theta_i = -r + i*dt; phi(-r - theta_i) = phi at index q - i.
    double v = k.alpha() * mode.m1 * phi1.values[size_t(q - i)];
    if (mode.m2 != 0.0 && k.beta().type != BetaKernel::Type::Zero) {
      // integral_{-r}^{theta_i} beta(tau) phi(tau - theta_i) dtau:
      // tau_j - theta_i = (j - i) dt, phi index q + j - i.
      double acc = 0.0;
      for (long j = 0; j <= i; ++j) {
        double w = (j == 0 || j == i) ? 0.5 : 1.0;
        acc += w * k.beta_at(-k.r() + double(j) * dt) *
               phi1.values[size_t(q + j - i)];
      }
      if (i > 0) v += mode.m2 * acc * dt;
    }
    out.values[size_t(i)] = v;
  }
  return out;
}

std::vector<double> history_response(const FundamentalRow& row,
                                     const Segment& s_phi) {
  const double dt = row.dt;
  if (std::abs(s_phi.step - dt) > 1e-12 * dt)
    throw std::invalid_argument("history_response: grid mismatch");
  const long q = long(s_phi.values.size()) - 1;
  const long n = long(row.g.size()) - 1;

  std::vector<double> out(size_t(n + 1));
  for (long i = 0; i <= n; ++i) {
    double acc = 0.0;
    for (long j = 0; j <= q; ++j) {
      long gi = i - q + j;
      if (gi < 0) continue;
      double w = (j == 0 || j == q) ? 0.5 : 1.0;
      double gv = row.g[size_t(gi)];
      // The jump of g at 0 lands on a quadrature node when gi == 0. At an
      // interior node both one-sided limits (0 and g(0+)) contribute; at the
      // theta = 0 endpoint only the left limit 0 is inside the range.
      if (gi == 0) gv = (j == q) ? 0.0 : (j > 0 ? 0.5 * gv : gv);
      acc += w * gv * s_phi.values[size_t(j)];
    }
    out[size_t(i)] = acc * dt;
  }
  return out;
}

std::pair<std::complex<double>, CSegment> resolvent_apply(
    std::complex<double> lambda, const ModeEntry& mode, const DelayKernel& k,
    std::complex<double> psi0, const CSegment& psi1) {
  using C = std::complex<double>;
  const double dt = psi1.step;
  const long q = checked_delay_steps(k.r(), dt);
  if (long(psi1.values.size()) != q + 1)
    throw std::invalid_argument("resolvent_apply: segment grid mismatch");

  CharProblem p{k, mode};
  C delta = char_value(p, lambda);
  if (std::abs(delta) < 1e-8 * (1.0 + std::abs(lambda)))
    throw std::runtime_error("resolvent_apply: lambda in spectrum");

  // J(theta) = integral_theta^0 e^{lambda(theta - tau)} psi1(tau) dtau,
  // accumulated backward from theta = 0.
  std::vector<C> J(size_t(q + 1));
  C e = std::exp(-lambda * dt);
  J[size_t(q)] = 0.0;
  for (long i = q - 1; i >= 0; --i) {
    J[size_t(i)] = e * J[size_t(i + 1)] +
                   0.5 * dt * (psi1.values[size_t(i)] +
                               e * psi1.values[size_t(i + 1)]);
  }

  // A1-term: alpha*m1 * integral e^{lambda(-r-tau)} psi1(tau) dtau.
  C a_term = 0.0;
  for (long i = 0; i <= q; ++i) {
    double w = (i == 0 || i == q) ? 0.5 : 1.0;
    double tau = -k.r() + double(i) * dt;
    a_term += w * std::exp(lambda * (-k.r() - tau)) * psi1.values[size_t(i)];
  }
  a_term *= k.alpha() * mode.m1 * dt;

  // A2-term: m2 * integral beta(theta) J(theta) dtheta.
  C b_term = 0.0;
  if (mode.m2 != 0.0 && k.beta().type != BetaKernel::Type::Zero) {
    for (long i = 0; i <= q; ++i) {
      double w = (i == 0 || i == q) ? 0.5 : 1.0;
      b_term += w * k.beta_at(-k.r() + double(i) * dt) * J[size_t(i)];
    }
    b_term *= mode.m2 * dt;
  }

  C phi0 = (a_term + b_term + psi0) / delta;
  CSegment phi1;
  phi1.step = dt;
  phi1.values.resize(size_t(q + 1));
  for (long i = 0; i <= q; ++i) {
    double theta = -k.r() + double(i) * dt;
    phi1.values[size_t(i)] = std::exp(lambda * theta) * phi0 + J[size_t(i)];
  }
  return {phi0, phi1};
}

DecayFit fit_decay(const FundamentalRow& row) {
  const long n = long(row.g.size()) - 1;
  const long i0 = n / 2;
  double gmax = 0.0;
  for (long i = i0; i <= n; ++i)
    gmax = std::max(gmax, std::abs(row.g[size_t(i)]));
  if (gmax <= 0.0) return {0.0, 1e9};  // identically zero tail

  // Fit the envelope through local maxima of |g| (plain points when the
  // tail is monotone and peaks are scarce).
  std::vector<std::pair<double, double>> pts;
  for (long i = std::max<long>(i0, 1); i < n; ++i) {
    double a = std::abs(row.g[size_t(i)]);
    if (a >= std::abs(row.g[size_t(i - 1)]) &&
        a >= std::abs(row.g[size_t(i + 1)]) && a > 1e-14 * gmax)
      pts.push_back({double(i) * row.dt, std::log(a)});
  }
  if (pts.size() < 3) {
    pts.clear();
    for (long i = i0; i <= n; ++i) {
      double a = std::abs(row.g[size_t(i)]);
      if (a > 1e-14 * gmax) pts.push_back({double(i) * row.dt, std::log(a)});
    }
  }
  if (pts.size() < 2) return {gmax, 0.0};

  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (auto [x, yv] : pts) {
    sx += x;
    sy += yv;
    sxx += x * x;
    sxy += x * yv;
  }
  double m = double(pts.size());
  double slope = (m * sxy - sx * sy) / (m * sxx - sx * sx);
  double icept = (sy - slope * sx) / m;
  return {std::exp(icept), -slope};
}

}  // namespace rou
