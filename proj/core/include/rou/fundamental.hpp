#pragma once

#include <complex>
#include <utility>
#include <vector>

#include "rou/delay_kernel.hpp"
#include "rou/spectral_models.hpp"

namespace rou {

/// Per-mode fundamental solution g on the uniform grid t_i = i*dt,
/// with g(0) = 1 and g(t) = 0 for t < 0. dg holds the right-derivative
/// at each grid point (used for dense interpolation of history).
struct FundamentalRow {
  double dt = 0.0;
  std::vector<double> g;
  std::vector<double> dg;

  double horizon() const { return dt * double(g.size() - 1); }
  /// g at arbitrary t (cubic Hermite between grid points; 0 for t < 0).
  double at(double t) const;
};

/// Integrates g' = mu*g + alpha*m1*g(t-r) + m2 * integral beta(theta)*g(t+theta)
/// by RK4 with the method of steps. dt must divide r; T >= r.
FundamentalRow solve_fundamental(const ModeEntry& mode, const DelayKernel& k,
                                 double T, double dt);

/// Deterministic solve with initial history phi1 (on [-r,0], grid step dt)
/// and initial value phi0 at t = 0. Returns y on the grid over [0, T].
std::vector<double> solve_with_history(const ModeEntry& mode,
                                       const DelayKernel& k,
                                       const Segment& phi1, double phi0,
                                       double T, double dt);

/// Max residual of the integral form
///   g(t) - e^{mu t} - integral_0^t e^{mu(t-s)} [alpha*m1*g(s-r) + m2*(beta*g)(s)] ds
/// over all grid points (trapezoid quadrature).
double verify_integral_form(const FundamentalRow& g, const ModeEntry& mode,
                            const DelayKernel& k);

/// Structure operator at mode level:
///   [S phi](theta) = alpha*m1*phi(-r-theta) + m2 * integral_{-r}^{theta} beta(tau)*phi(tau-theta) dtau.
Segment structure_apply(const DelayKernel& k, const ModeEntry& mode,
                        const Segment& phi1);

/// History response t -> integral_{-r}^0 g(t+theta) * s_phi(theta) dtheta
/// with g(negative) = 0, on the grid of g.
std::vector<double> history_response(const FundamentalRow& g,
                                     const Segment& s_phi);

/// Resolvent application (one mode): given (psi0, psi1), returns
/// (phi0, phi1) with Delta(lambda) phi1(0) = ... + psi0 and
/// phi1(theta) = e^{lambda theta} phi1(0) + integral_theta^0 e^{lambda(theta-tau)} psi1(tau) dtau.
/// Throws when lambda is (numerically) in the spectrum of this mode.
std::pair<std::complex<double>, CSegment> resolvent_apply(
    std::complex<double> lambda, const ModeEntry& mode, const DelayKernel& k,
    std::complex<double> psi0, const CSegment& psi1);

struct DecayFit {
  double M = 0.0;   // |g(t)| <= M e^{-nu t} fit
  double nu = 0.0;  // positive for decaying g
};

/// Least-squares fit of log|g| on [T/2, T].
DecayFit fit_decay(const FundamentalRow& g);

}  // namespace rou
