#pragma once

#include <vector>

#include "rou/delay_kernel.hpp"
#include "rou/fundamental.hpp"
#include "rou/spectral_models.hpp"

namespace rou {

/// Cross-mode stationary covariance on a uniform lag grid:
///   K[k][j](t) = f_k f_j integral_0^inf g_k(t+s) g_j(s) ds,  t >= -r,
/// truncated at T_trunc with a fitted exponential tail certificate.
class CovarianceTable {
 public:
  double lag_min = 0.0;   // typically -r
  double dt = 0.0;
  int n_modes = 0;
  // entries[k][j][i] = K_{kj}(lag_min + i*dt)
  std::vector<std::vector<std::vector<double>>> entries;
  std::vector<std::vector<double>> tail_bound;  // per (k, j)

  int n_lags() const {
    return n_modes ? int(entries[0][0].size()) : 0;
  }
  double lag_max() const { return lag_min + dt * double(n_lags() - 1); }
  /// Entry at the grid lag nearest to t; throws when t is outside the table.
  double at(int k, int j, double t) const;
};

/// Quadrature of the covariance integral over [0, T_trunc] on the grid of
/// the fundamental tables. Requires every mode stable; throws otherwise
/// ("no stationary solution").
/// T_trunc <= 0 picks the smallest horizon whose fitted tail bound is
/// below 1e-6 times the covariance scale.
CovarianceTable covariance(const std::vector<FundamentalRow>& g,
                           std::span<const double> f, double lag_min,
                           double lag_max, double T_trunc = 0.0);

/// Max over interior lags of the residual of the covariance delay ODE
///   dK_{kj}/dt = mu_k K_{kj}(t) + alpha m1_k K_{kj}(t-r) + m2_k (beta * K_{kj})(t)
/// (A acts on the row index k), with central differences in t on [0, lag_max].
double covariance_ode_residual(const CovarianceTable& K, const DelayKernel& kern,
                               const ModeEntry& row_mode, int k, int j);

/// Spatial covariance field: sum_{k,j} K_{kj}(t) e_k(x) e_j(x2).
double field_covariance(const CovarianceTable& K,
                        const std::vector<DirichletMode>& modes, double x,
                        double x2, double t);

}  // namespace rou
