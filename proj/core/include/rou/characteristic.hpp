#pragma once

#include <complex>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "rou/delay_kernel.hpp"
#include "rou/spectral_models.hpp"

namespace rou {

using Complex = std::complex<double>;

/// Characteristic problem for one mode; with no mode the characteristic
/// value is the scalar function n(lambda) itself (the Gamma_0 problem).
struct CharProblem {
  DelayKernel kernel;
  std::optional<ModeEntry> mode;
};

struct Rect {
  double re_lo, re_hi, im_lo, im_hi;
  double width() const { return re_hi - re_lo; }
  double height() const { return im_hi - im_lo; }
};

/// n(lambda) = 1 + alpha*exp(-lambda*r) + integral of beta(theta)*exp(lambda*theta).
Complex n_of_lambda(const DelayKernel& k, Complex lambda);

/// Mode characteristic value
///   lambda - mu - alpha*m1*exp(-lambda*r) - m2*integral beta(theta)*exp(lambda*theta),
/// or n(lambda) for a problem with no mode.
Complex char_value(const CharProblem& p, Complex lambda);

/// Analytic derivative of char_value with respect to lambda.
Complex char_deriv(const CharProblem& p, Complex lambda);

/// Number of characteristic roots inside the rectangle, counted with
/// multiplicity, by the argument principle. Throws if the contour passes
/// too close to a root (min |Delta| < 1e-8 scale).
int count_roots_in_rect(const CharProblem& p, const Rect& rect);

struct RootReport {
  std::vector<Complex> roots;  // closed under conjugation, sorted
  Complex rightmost{0.0, 0.0};
  int count_certificate = 0;   // winding count for the search rectangle
  std::vector<double> residuals;
  bool complete = true;        // false when the subdivision budget ran out
  std::string message;
};

/// Finds all roots in [x_lo, x_hi] x [-im_cap, im_cap] by rectangle
/// subdivision with winding counts, refined by Newton iteration.
RootReport rightmost_root(const CharProblem& p, double x_lo, double x_hi,
                          double im_cap);

/// Default a-priori search window for roots with nonnegative real part:
/// on a root, lambda = mu*n(lambda)-type bounds give
/// |lambda| <= |mu| + |alpha*m1| + ||beta||_1 * |m2|.
double apriori_root_bound(const ModeEntry& mode, const DelayKernel& k);

enum class GammaLabel { Gamma0, GammaP, Gamma1Other, Resolvent };

std::string to_string(GammaLabel g);

/// Classifies lambda against the spectrum truncation:
/// Gamma0 when n(lambda) = 0 (lambda != 0), GammaP when lambda/n(lambda)
/// is within tolerance of some eigenvalue, Resolvent otherwise.
/// lambda = 0 is point spectrum iff 1 + alpha + integral(beta) = 0.
GammaLabel gamma_classify(const DelayKernel& k, Complex lambda,
                          std::span<const double> spectrum);

struct Verdict {
  bool stable = false;
  double margin = 0.0;
};

/// Distributed-delay criterion (requires alpha = 0, sigma(A) in (-inf,-c0]):
/// stable iff ||beta||_1 < 1.
Verdict distributed_stability_check(const DelayKernel& k, double c0);

/// Real roots of x + beta0*(1 - exp(-r*x)) = 0 for beta0 < 0.
/// Always contains 0; when -beta0*r > 1 also the positive root, which
/// exceeds ln(-beta0*r)/r.
std::vector<double> remark51_real_roots(double beta0, double r);

/// Stability threshold on |a| for the exponential kernel beta = a*e^{b*theta}:
/// e^{r*b}/r when b <= 0, else 1/r.
double example52_threshold(double b, double r);

/// Discrete-delay criterion (beta = 0, A1 = alpha*A): stable iff |alpha| < 1.
bool discrete_stability_check(double alpha);

/// Fractional-delay criterion (A1 = (-A)^delta): stable iff
/// 2|alpha| < |lambda1|^(1-delta).
Verdict fractional_stability_check(double alpha, double delta, double lambda1);

struct ResolventSup {
  double sup = 0.0;          // max over samples and modes of 1/|Delta_k|
  Complex argmax{0.0, 0.0};
  double f_resolvent_sup = 0.0;  // max_k sup_a |alpha*m1_k| / |ia - mu_k|
  int flagged_samples = 0;       // samples skipped because they hit a root
};

struct HalfPlaneGrid {
  int axis_points = 2001;          // samples of the axis Re lambda = 0
  double im_cap = 100.0;
  std::vector<double> re_rays = {0.25, 1.0, 4.0};  // interior rays Re = const
};

/// Samples sup over the closed right half-plane of the mode-wise resolvent
/// norm max_k 1/|Delta_k(lambda)| (Gearhart-Pruss style numeric check).
ResolventSup resolvent_norm_sup(const ModeSystem& sys, const DelayKernel& k,
                                const HalfPlaneGrid& grid = {});

struct AbscissaReport {
  double abscissa = 0.0;
  double mode_abscissa = 0.0;   // max over modes of Re(rightmost root)
  double gamma0_abscissa = 0.0; // rightmost zero of n (quiet NaN when none)
  int worst_mode = -1;          // eig_index attaining the mode abscissa
};

/// Max over modes of the rightmost characteristic root, combined with the
/// rightmost zero of n (the Gamma_0 family, continuous spectrum).
AbscissaReport spectral_abscissa(const ModeSystem& sys, const DelayKernel& k,
                                 double im_cap = 0.0 /* 0 -> a-priori */);

}  // namespace rou
