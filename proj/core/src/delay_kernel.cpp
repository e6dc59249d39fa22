#include "rou/delay_kernel.hpp"

#include <cmath>

namespace rou {

namespace {

// E(s) = integral over [-r,0] of exp(s*theta) = (1 - exp(-s*r)) / s,
// with the removable singularity at s = 0 handled by the power series.
std::complex<double> exp_moment0(std::complex<double> s, double r) {
  if (std::abs(s) * r < 0.5) {
    // sum_{n>=0} (-1)^n s^n r^{n+1} / (n+1)!
    std::complex<double> term(r, 0.0);
    std::complex<double> sum = term;
    for (int n = 1; n <= 18; ++n) {
      term *= -s * r / double(n + 1);
      sum += term;
    }
    return sum;
  }
  return (1.0 - std::exp(-s * r)) / s;
}

// E'(s) = integral over [-r,0] of theta * exp(s*theta).
std::complex<double> exp_moment1(std::complex<double> s, double r) {
  if (std::abs(s) * r < 0.5) {
    // sum_{n>=1} (-1)^n n s^{n-1} r^{n+1} / (n+1)!
    std::complex<double> pow(1.0, 0.0);  // s^{n-1}
    std::complex<double> sum = -r * r / 2.0;
    double fact = 2.0;  // (n+1)!
    double rn = r * r;  // r^{n+1}
    double sign = -1.0;
    for (int n = 2; n <= 18; ++n) {
      pow *= s;
      rn *= r;
      fact *= double(n + 1);
      sign = -sign;
      sum += sign * double(n) * pow * rn / fact;
    }
    return sum;
  }
  std::complex<double> e = std::exp(-s * r);
  return (r * e * s - (1.0 - e)) / (s * s);
}

double trapezoid(std::span<const double> v, double h) {
  double s = 0.0;
  for (size_t i = 0; i + 1 < v.size(); ++i) s += 0.5 * (v[i] + v[i + 1]);
  return s * h;
}

}  // namespace

DelayKernel::DelayKernel(double r, double alpha, BetaKernel beta)
    : r_(r), alpha_(alpha), beta_(std::move(beta)) {
  if (!(r > 0.0)) throw std::invalid_argument("DelayKernel: r must be > 0");
  if (beta_.type == BetaKernel::Type::Tabulated && beta_.values.size() < 2)
    throw std::invalid_argument(
        "DelayKernel: tabulated kernel needs at least 2 points");
}

double DelayKernel::beta_at(double theta) const {
  switch (beta_.type) {
    case BetaKernel::Type::Zero:
      return 0.0;
    case BetaKernel::Type::Constant:
      return beta_.c;
    case BetaKernel::Type::Exponential:
      return beta_.a * std::exp(beta_.b * theta);
    case BetaKernel::Type::Tabulated: {
      const size_t n = beta_.values.size();
      const double h = r_ / double(n - 1);
      double pos = (theta + r_) / h;
      if (pos <= 0.0) return beta_.values.front();
      if (pos >= double(n - 1)) return beta_.values.back();
      size_t i = size_t(pos);
      double w = pos - double(i);
      return (1.0 - w) * beta_.values[i] + w * beta_.values[i + 1];
    }
  }
  return 0.0;
}

double DelayKernel::beta_l1_norm() const {
  switch (beta_.type) {
    case BetaKernel::Type::Zero:
      return 0.0;
    case BetaKernel::Type::Constant:
      return std::abs(beta_.c) * r_;
    case BetaKernel::Type::Exponential: {
      if (beta_.b == 0.0) return std::abs(beta_.a) * r_;
      return std::abs(beta_.a) * (1.0 - std::exp(-beta_.b * r_)) / beta_.b;
    }
    case BetaKernel::Type::Tabulated: {
      std::vector<double> av(beta_.values.size());
      for (size_t i = 0; i < av.size(); ++i) av[i] = std::abs(beta_.values[i]);
      return trapezoid(av, r_ / double(av.size() - 1));
    }
  }
  return 0.0;
}

double DelayKernel::beta_integral() const {
  switch (beta_.type) {
    case BetaKernel::Type::Zero:
      return 0.0;
    case BetaKernel::Type::Constant:
      return beta_.c * r_;
    case BetaKernel::Type::Exponential:
      return beta_.a * ((beta_.b == 0.0)
                            ? r_
                            : (1.0 - std::exp(-beta_.b * r_)) / beta_.b);
    case BetaKernel::Type::Tabulated:
      return trapezoid(beta_.values, r_ / double(beta_.values.size() - 1));
  }
  return 0.0;
}

double DelayKernel::beta_sup_norm() const {
  switch (beta_.type) {
    case BetaKernel::Type::Zero:
      return 0.0;
    case BetaKernel::Type::Constant:
      return std::abs(beta_.c);
    case BetaKernel::Type::Exponential:
      return std::abs(beta_.a) * std::max(1.0, std::exp(-beta_.b * r_));
    case BetaKernel::Type::Tabulated: {
      double m = 0.0;
      for (double v : beta_.values) m = std::max(m, std::abs(v));
      return m;
    }
  }
  return 0.0;
}

double DelayKernel::beta_pointwise_variation() const {
  switch (beta_.type) {
    case BetaKernel::Type::Zero:
    case BetaKernel::Type::Constant:
      return 0.0;
    case BetaKernel::Type::Exponential:
      // integral of |a*b*e^{b theta}| over [-r, 0]
      return std::abs(beta_.a) * std::abs(1.0 - std::exp(-beta_.b * r_));
    case BetaKernel::Type::Tabulated: {
      double tv = 0.0;
      for (size_t i = 1; i < beta_.values.size(); ++i)
        tv += std::abs(beta_.values[i] - beta_.values[i - 1]);
      return tv;
    }
  }
  return 0.0;
}

double DelayKernel::total_variation() const {
  return std::abs(alpha_) + beta_l1_norm();
}

std::complex<double> DelayKernel::beta_laplace(
    std::complex<double> lambda) const {
  switch (beta_.type) {
    case BetaKernel::Type::Zero:
      return 0.0;
    case BetaKernel::Type::Constant:
      return beta_.c * exp_moment0(lambda, r_);
    case BetaKernel::Type::Exponential:
      return beta_.a * exp_moment0(lambda + beta_.b, r_);
    case BetaKernel::Type::Tabulated: {
      const size_t n = beta_.values.size();
      const double h = r_ / double(n - 1);
      std::complex<double> s = 0.0;
      std::complex<double> prev =
          beta_.values[0] * std::exp(lambda * std::complex<double>(-r_));
      for (size_t i = 1; i < n; ++i) {
        double theta = -r_ + double(i) * h;
        std::complex<double> cur = beta_.values[i] * std::exp(lambda * theta);
        s += 0.5 * (prev + cur);
        prev = cur;
      }
      return s * h;
    }
  }
  return 0.0;
}

std::complex<double> DelayKernel::beta_laplace_deriv(
    std::complex<double> lambda) const {
  switch (beta_.type) {
    case BetaKernel::Type::Zero:
      return 0.0;
    case BetaKernel::Type::Constant:
      return beta_.c * exp_moment1(lambda, r_);
    case BetaKernel::Type::Exponential:
      return beta_.a * exp_moment1(lambda + beta_.b, r_);
    case BetaKernel::Type::Tabulated: {
      const size_t n = beta_.values.size();
      const double h = r_ / double(n - 1);
      std::complex<double> s = 0.0;
      std::complex<double> prev = beta_.values[0] * (-r_) *
                                  std::exp(lambda * std::complex<double>(-r_));
      for (size_t i = 1; i < n; ++i) {
        double theta = -r_ + double(i) * h;
        std::complex<double> cur =
            beta_.values[i] * theta * std::exp(lambda * theta);
        s += 0.5 * (prev + cur);
        prev = cur;
      }
      return s * h;
    }
  }
  return 0.0;
}

namespace {

template <class T>
T apply_F_mode_impl(const DelayKernel& k, double m1, double m2,
                    const BasicSegment<T>& phi) {
  if (phi.values.size() < 2)
    throw std::invalid_argument("apply_F_mode: segment needs >= 2 samples");
  if (std::abs(phi.span() - k.r()) > 1e-9 * k.r())
    throw std::invalid_argument("apply_F_mode: segment does not span [-r, 0]");
  if (k.beta().type == BetaKernel::Type::Tabulated &&
      k.beta().values.size() != phi.values.size())
    throw std::invalid_argument(
        "apply_F_mode: tabulated kernel grid does not match segment grid");

  T discrete = k.alpha() * m1 * phi.values.front();
  if (k.beta().type == BetaKernel::Type::Zero || m2 == 0.0) return discrete;

  const size_t n = phi.values.size();
  const double h = phi.step;
  T integral{};
  T prev = k.beta_at(-k.r()) * phi.values[0];
  for (size_t i = 1; i < n; ++i) {
    double theta = -k.r() + double(i) * h;
    T cur = k.beta_at(theta) * phi.values[i];
    integral += 0.5 * (prev + cur);
    prev = cur;
  }
  return discrete + m2 * integral * h;
}

}  // namespace

double apply_F_mode(const DelayKernel& k, double m1, double m2,
                    const Segment& phi) {
  return apply_F_mode_impl(k, m1, m2, phi);
}

std::complex<double> apply_F_mode(const DelayKernel& k, double m1, double m2,
                                  const CSegment& phi) {
  return apply_F_mode_impl(k, m1, m2, phi);
}

std::pair<double, double> segment_energy_bound_check(const DelayKernel& k,
                                                     double m1, double m2,
                                                     std::span<const double> y,
                                                     double dt) {
  const double r = k.r();
  const long q = std::lround(r / dt);
  if (std::abs(double(q) * dt - r) > 1e-9 * r || q < 1)
    throw std::invalid_argument("segment_energy_bound_check: dt must divide r");
  if (long(y.size()) <= q)
    throw std::invalid_argument("segment_energy_bound_check: T must be > 0");

  const long n_t = long(y.size()) - q;  // grid points of [0, T]
  std::vector<double> f2(n_t);
  Segment window;
  window.step = dt;
  window.values.resize(q + 1);
  for (long i = 0; i < n_t; ++i) {
    for (long j = 0; j <= q; ++j) window.values[j] = y[i + j];
    double f = apply_F_mode(k, m1, m2, window);
    f2[i] = f * f;
  }
  double lhs = trapezoid(f2, dt);

  std::vector<double> y2(y.size());
  for (size_t i = 0; i < y.size(); ++i) y2[i] = y[i] * y[i];
  double c = std::abs(k.alpha() * m1) + std::abs(m2) * k.beta_l1_norm();
  double rhs = c * c * trapezoid(y2, dt);
  return {lhs, rhs};
}

}  // namespace rou
