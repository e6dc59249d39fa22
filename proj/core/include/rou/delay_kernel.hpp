#pragma once

#include <complex>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

namespace rou {

/// Distributed part of the delay measure, a real kernel on [-r, 0].
struct BetaKernel {
  enum class Type { Zero, Constant, Exponential, Tabulated };

  Type type = Type::Zero;
  double c = 0.0;              // Constant: beta(theta) = c
  double a = 0.0, b = 0.0;     // Exponential: beta(theta) = a * exp(b*theta)
  std::vector<double> values;  // Tabulated: uniform grid over [-r, 0]

  static BetaKernel zero() { return {}; }
  static BetaKernel constant(double c) {
    BetaKernel k;
    k.type = Type::Constant;
    k.c = c;
    return k;
  }
  static BetaKernel exponential(double a, double b) {
    BetaKernel k;
    k.type = Type::Exponential;
    k.a = a;
    k.b = b;
    return k;
  }
  static BetaKernel tabulated(std::vector<double> values) {
    BetaKernel k;
    k.type = Type::Tabulated;
    k.values = std::move(values);
    return k;
  }
};

/// History segment: samples of a function on the uniform grid over [-r, 0].
/// values[0] is the value at -r, values.back() at 0.
template <class T>
struct BasicSegment {
  std::vector<T> values;
  double step = 0.0;

  double span() const { return step * double(values.size() - 1); }
};

using Segment = BasicSegment<double>;
using CSegment = BasicSegment<std::complex<double>>;

/// Delay measure with one discrete atom of weight alpha at -r plus an
/// absolutely continuous part beta on [-r, 0].
class DelayKernel {
 public:
  DelayKernel(double r, double alpha, BetaKernel beta);

  double r() const { return r_; }
  double alpha() const { return alpha_; }
  const BetaKernel& beta() const { return beta_; }

  /// Pointwise kernel value beta(theta), theta in [-r, 0].
  double beta_at(double theta) const;

  /// integral of |beta| over [-r, 0]; exact except for tabulated kernels.
  double beta_l1_norm() const;

  /// Signed integral of beta over [-r, 0].
  double beta_integral() const;

  /// sup of |beta| over [-r, 0].
  double beta_sup_norm() const;

  /// Pointwise variation of beta over [-r, 0] (integral of |beta'| for the
  /// parametric kernels, sum of |jumps| for tabulated ones).
  double beta_pointwise_variation() const;

  /// Total variation of the delay measure: |alpha| + integral of |beta|.
  double total_variation() const;

  /// integral of beta(theta) * exp(lambda*theta) over [-r, 0].
  std::complex<double> beta_laplace(std::complex<double> lambda) const;

  /// integral of theta * beta(theta) * exp(lambda*theta) over [-r, 0],
  /// i.e. d/dlambda of beta_laplace.
  std::complex<double> beta_laplace_deriv(std::complex<double> lambda) const;

 private:
  double r_;
  double alpha_;
  BetaKernel beta_;
};

/// Mode-level delay functional:
///   F phi = alpha*m1*phi(-r) + m2 * integral of beta(theta)*phi(theta).
/// The distributed term uses trapezoid quadrature on the segment grid.
double apply_F_mode(const DelayKernel& k, double m1, double m2,
                    const Segment& phi);
std::complex<double> apply_F_mode(const DelayKernel& k, double m1, double m2,
                                  const CSegment& phi);

/// Discretized energy bound: returns
///   lhs = integral over [0,T] of |F y_t|^2,
///   rhs = C * integral over [-r,T] of y^2 with C = (|alpha*m1| + |m2|*||beta||_1)^2.
/// y is sampled on the uniform grid covering [-r, T] with spacing dt.
std::pair<double, double> segment_energy_bound_check(const DelayKernel& k,
                                                     double m1, double m2,
                                                     std::span<const double> y,
                                                     double dt);

}  // namespace rou
