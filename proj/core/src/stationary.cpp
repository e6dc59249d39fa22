#include "rou/stationary.hpp"

#include <cmath>
#include <stdexcept>

namespace rou {

double CovarianceTable::at(int k, int j, double t) const {
  long i = std::lround((t - lag_min) / dt);
  if (i < 0 || i >= n_lags())
    throw std::out_of_range("CovarianceTable::at: lag outside table");
  return entries[size_t(k)][size_t(j)][size_t(i)];
}

CovarianceTable covariance(const std::vector<FundamentalRow>& g,
                           std::span<const double> f, double lag_min,
                           double lag_max, double T_trunc) {
  if (g.empty() || f.size() != g.size())
    throw std::invalid_argument("covariance: modes/forcing mismatch");
  const double dt = g[0].dt;
  const int K = int(g.size());

  std::vector<DecayFit> fits(g.size());
  for (int k = 0; k < K; ++k) {
    fits[size_t(k)] = fit_decay(g[size_t(k)]);
    if (!(fits[size_t(k)].nu > 0.0) && f[size_t(k)] != 0.0)
      throw std::runtime_error(
          "covariance: no stationary solution; see spectral abscissa");
  }

  if (T_trunc <= 0.0) {
    // Smallest horizon whose fitted tail is below 1e-6 of the rough
    // covariance scale max_k f_k^2 M_k^2 / (2 nu_k).
    double scale = 0.0;
    for (int k = 0; k < K; ++k) {
      if (f[size_t(k)] == 0.0) continue;
      scale = std::max(scale, f[size_t(k)] * f[size_t(k)] *
                                  fits[size_t(k)].M * fits[size_t(k)].M /
                                  (2.0 * fits[size_t(k)].nu));
    }
    double target = 1e-6 * std::max(scale, 1e-300);
    T_trunc = dt;
    for (int k = 0; k < K; ++k) {
      for (int j = 0; j < K; ++j) {
        if (f[size_t(k)] == 0.0 || f[size_t(j)] == 0.0) continue;
        double nu = fits[size_t(k)].nu + fits[size_t(j)].nu;
        double mm = std::abs(f[size_t(k)] * f[size_t(j)]) * fits[size_t(k)].M *
                    fits[size_t(j)].M;
        if (mm <= 0.0) continue;
        double t_need = std::log(mm / (nu * target)) / nu;
        T_trunc = std::max(T_trunc, t_need);
      }
    }
    T_trunc = dt * double(std::lround(std::ceil(T_trunc / dt)));
  }

  const long n_lag_lo = std::lround(lag_min / dt);
  const long n_lag_hi = std::lround(lag_max / dt);
  const long n_trunc = std::lround(T_trunc / dt);
  for (int k = 0; k < K; ++k) {
    if (long(g[size_t(k)].g.size()) - 1 < n_trunc + n_lag_hi)
      throw std::invalid_argument(
          "covariance: fundamental tables shorter than T_trunc + max lag");
  }

  CovarianceTable out;
  out.lag_min = double(n_lag_lo) * dt;
  out.dt = dt;
  out.n_modes = K;
  out.entries.assign(size_t(K),
                     std::vector<std::vector<double>>(
                         size_t(K), std::vector<double>(size_t(n_lag_hi - n_lag_lo + 1))));
  out.tail_bound.assign(size_t(K), std::vector<double>(size_t(K)));

  for (int k = 0; k < K; ++k) {
    for (int j = 0; j < K; ++j) {
      double fk = f[size_t(k)], fj = f[size_t(j)];
      double nu = fits[size_t(k)].nu + fits[size_t(j)].nu;
      out.tail_bound[size_t(k)][size_t(j)] =
          (fk == 0.0 || fj == 0.0)
              ? 0.0
              : std::abs(fk * fj) * fits[size_t(k)].M * fits[size_t(j)].M *
                    std::exp(-nu * T_trunc) / nu;
      for (long li = n_lag_lo; li <= n_lag_hi; ++li) {
        double v = 0.0;
        if (fk != 0.0 && fj != 0.0) {
          // integral_0^T g_k(t+s) g_j(s) ds, trapezoid; g(neg) = 0.
          const auto& gk = g[size_t(k)].g;
          const auto& gj = g[size_t(j)].g;
          double acc = 0.0;
          for (long s = 0; s <= n_trunc; ++s) {
            long ik = li + s;
            if (ik < 0) continue;
            double w = (s == 0 || s == n_trunc) ? 0.5 : 1.0;
            // Interior node on the jump of g_k at 0: the two adjacent cells
            // see the limits 0 and 1, so the node carries their mean.
            double gv = (ik == 0 && s > 0 && s < n_trunc) ? 0.5 * gk[0]
                                                          : gk[size_t(ik)];
            acc += w * gv * gj[size_t(s)];
          }
          v = fk * fj * acc * dt;
        }
        out.entries[size_t(k)][size_t(j)][size_t(li - n_lag_lo)] = v;
      }
    }
  }
  return out;
}

double covariance_ode_residual(const CovarianceTable& K, const DelayKernel& kern,
                               const ModeEntry& row_mode, int k, int j) {
  const double dt = K.dt;
  const long q = std::lround(kern.r() / dt);
  if (std::abs(double(q) * dt - kern.r()) > 1e-9 * kern.r())
    throw std::invalid_argument("covariance_ode_residual: dt must divide r");
  const long i0 = std::lround(-K.lag_min / dt);  // index of lag 0
  if (i0 < q)
    throw std::invalid_argument(
        "covariance_ode_residual: lag grid does not reach -r");

  const auto& row = K.entries[size_t(k)][size_t(j)];
  const long n = long(row.size());
  double max_res = 0.0;
  for (long i = i0 + 1; i + 1 < n; ++i) {
    double dKdt;
    if ((i - i0) % q == 0 && i - 2 >= 0) {
      // K'' jumps at positive multiples of r; difference one-sided from the
      // left to stay on a smooth piece.
      dKdt = (3.0 * row[size_t(i)] - 4.0 * row[size_t(i - 1)] +
              row[size_t(i - 2)]) /
             (2.0 * dt);
    } else {
      dKdt = (row[size_t(i + 1)] - row[size_t(i - 1)]) / (2.0 * dt);
    }
    double rhs = row_mode.mu * row[size_t(i)] +
                 kern.alpha() * row_mode.m1 * row[size_t(i - q)];
    if (row_mode.m2 != 0.0 && kern.beta().type != BetaKernel::Type::Zero) {
      double acc = 0.0;
      for (long l = 0; l <= q; ++l) {
        double w = (l == 0 || l == q) ? 0.5 : 1.0;
        acc += w * kern.beta_at(-kern.r() + double(l) * dt) *
               row[size_t(i - q + l)];
      }
      rhs += row_mode.m2 * acc * dt;
    }
    max_res = std::max(max_res, std::abs(dKdt - rhs));
  }
  return max_res;
}

double field_covariance(const CovarianceTable& K,
                        const std::vector<DirichletMode>& modes, double x,
                        double x2, double t) {
  if (int(modes.size()) != K.n_modes)
    throw std::invalid_argument("field_covariance: mode count mismatch");
  double acc = 0.0;
  for (int k = 0; k < K.n_modes; ++k) {
    double ek = modes[size_t(k)].eval(x);
    for (int j = 0; j < K.n_modes; ++j) {
      acc += K.at(k, j, t) * ek * modes[size_t(j)].eval(x2);
    }
  }
  return acc;
}

}  // namespace rou
