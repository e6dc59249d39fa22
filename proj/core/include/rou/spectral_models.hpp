#pragma once

#include <span>
#include <vector>

namespace rou {

/// One spectral mode of the diagonalized system.
///   mu : eigenvalue of A (< 0)
///   m1 : multiplier of A1 on this mode (A1 e_k = m1 e_k)
///   m2 : multiplier of A2
///   f  : forcing coefficient <f, e_k>
struct ModeEntry {
  double mu = 0.0;
  double m1 = 0.0;
  double m2 = 0.0;
  double f = 0.0;
  int eig_index = 0;
};

struct ModeSystem {
  std::vector<ModeEntry> modes;
  double domain_length = 0.0;  // 0 when the system is given explicitly
  int truncation() const { return int(modes.size()); }
};

/// Eigenpair of the 1-D Dirichlet Laplacian on [0, L]:
///   mu_k = -(k*pi/L)^2,  e_k(x) = sqrt(2/L) * sin(k*pi*x/L).
struct DirichletMode {
  double mu;
  int k;
  double L;
  double eval(double x) const;
};

std::vector<DirichletMode> dirichlet_modes(double L, int K);

struct ForcingProjection {
  std::vector<double> coeffs;   // f_k = <f, e_k>
  double parseval_defect;       // integral of f^2 minus sum of f_k^2 (>= 0)
};

/// Projects spatial samples of f (uniform grid over [0, L], endpoints
/// included) onto the given eigenfunctions by trapezoid quadrature.
ForcingProjection project_forcing(std::span<const double> f_samples,
                                  const std::vector<DirichletMode>& modes);

/// |mu|^delta for A1 = (-A)^delta; requires mu < 0 and delta in [0, 1).
double fractional_multiplier(double mu, double delta);

}  // namespace rou
