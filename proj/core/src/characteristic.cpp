#include "rou/characteristic.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>

namespace rou {

namespace {
constexpr double kPi = 3.14159265358979323846;
}

namespace {

// c * exp(-lambda*r) with the vanishing-coefficient case short-circuited;
// otherwise c = 0 against an overflowing exponential produces NaN.
Complex scaled_exp(double c, Complex lambda, double r) {
  if (c == 0.0) return {0.0, 0.0};
  return c * std::exp(-lambda * r);
}

}  // namespace

Complex n_of_lambda(const DelayKernel& k, Complex lambda) {
  return 1.0 + scaled_exp(k.alpha(), lambda, k.r()) + k.beta_laplace(lambda);
}

Complex char_value(const CharProblem& p, Complex lambda) {
  if (!p.mode) return n_of_lambda(p.kernel, lambda);
  const auto& m = *p.mode;
  Complex v = lambda - m.mu -
              scaled_exp(p.kernel.alpha() * m.m1, lambda, p.kernel.r());
  if (m.m2 != 0.0) v -= m.m2 * p.kernel.beta_laplace(lambda);
  return v;
}

Complex char_deriv(const CharProblem& p, Complex lambda) {
  const double r = p.kernel.r();
  if (!p.mode) {
    Complex v = -scaled_exp(p.kernel.alpha() * r, lambda, r);
    return v + p.kernel.beta_laplace_deriv(lambda);
  }
  const auto& m = *p.mode;
  Complex v = 1.0 + scaled_exp(p.kernel.alpha() * m.m1 * r, lambda, r);
  if (m.m2 != 0.0) v -= m.m2 * p.kernel.beta_laplace_deriv(lambda);
  return v;
}

double apriori_root_bound(const ModeEntry& mode, const DelayKernel& k) {
  return std::abs(mode.mu) + std::abs(k.alpha() * mode.m1) +
         k.beta_l1_norm() * std::abs(mode.m2);
}

// ---------------------------------------------------------------------------
// Winding numbers along rectangle contours.
// ---------------------------------------------------------------------------

namespace {

struct NearRootOnContour : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Tracks the continuous argument of Delta along a contour, subdividing each
// leg until the phase step is below pi/3. The accumulated phase divided by
// 2*pi is the winding number.
class ContourTracker {
 public:
  explicit ContourTracker(const CharProblem& p) : p_(p) {}

  void leg(Complex za, Complex zb, int initial_samples) {
    Complex fa = eval(za);
    Complex step = (zb - za) / double(initial_samples);
    for (int i = 0; i < initial_samples; ++i) {
      Complex z0 = za + step * double(i);
      Complex z1 = (i + 1 == initial_samples) ? zb : za + step * double(i + 1);
      Complex f1 = eval(z1);
      segment(z0, z1, fa, f1, 0);
      fa = f1;
    }
  }

  double phase() const { return phase_; }
  long evals() const { return evals_; }

 private:
  Complex eval(Complex z) {
    ++evals_;
    Complex f = char_value(p_, z);
    if (std::abs(f) < 1e-8 * (1.0 + std::abs(z)))
      throw NearRootOnContour(
          "count_roots_in_rect: contour passes too near a root; perturb the "
          "rectangle");
    return f;
  }

  void segment(Complex z0, Complex z1, Complex f0, Complex f1, int depth) {
    double dphi = std::arg(f1 / f0);
    if (std::abs(dphi) <= kPi / 3.0 || depth >= 48) {
      phase_ += dphi;
      return;
    }
    Complex zm = 0.5 * (z0 + z1);
    Complex fm = eval(zm);
    segment(z0, zm, f0, fm, depth + 1);
    segment(zm, z1, fm, f1, depth + 1);
  }

  const CharProblem& p_;
  double phase_ = 0.0;
  long evals_ = 0;
};

int winding_number(const CharProblem& p, const Rect& rect) {
  // Initial density resolves the exp(-lambda*r) oscillation: ~8 samples per
  // period 2*pi/r along each leg, refined adaptively afterwards.
  const double r = p.kernel.r();
  auto samples = [&](double len) {
    return std::max(16, int(std::ceil(len * r * 8.0 / (2.0 * kPi))));
  };
  ContourTracker t(p);
  Complex bl(rect.re_lo, rect.im_lo), br(rect.re_hi, rect.im_lo);
  Complex tr(rect.re_hi, rect.im_hi), tl(rect.re_lo, rect.im_hi);
  t.leg(bl, br, samples(rect.width()));
  t.leg(br, tr, samples(rect.height()));
  t.leg(tr, tl, samples(rect.width()));
  t.leg(tl, bl, samples(rect.height()));
  double w = t.phase() / (2.0 * kPi);
  long n = std::lround(w);
  if (std::abs(w - double(n)) > 0.25)
    throw std::runtime_error("winding_number: phase tracking did not close");
  return int(n);
}

// Retries with slightly inflated rectangles when the contour hits a root;
// the rectangle is updated in place so callers subdivide the certified one.
int count_with_jiggle(const CharProblem& p, Rect& rect) {
  double scale = std::max({1.0, std::abs(rect.re_lo), std::abs(rect.re_hi),
                           std::abs(rect.im_lo), std::abs(rect.im_hi)});
  for (int attempt = 0;; ++attempt) {
    try {
      return winding_number(p, rect);
    } catch (const NearRootOnContour&) {
      if (attempt >= 8) throw;
      double eps = scale * 1.7e-6 * double(attempt + 1);
      rect.re_lo -= eps;
      rect.re_hi += eps * 1.3;
      rect.im_lo -= eps * 0.7;
      rect.im_hi += eps * 1.1;
    }
  }
}

bool newton_refine(const CharProblem& p, Complex& z) {
  for (int it = 0; it < 80; ++it) {
    Complex f = char_value(p, z);
    Complex df = char_deriv(p, z);
    if (std::abs(df) == 0.0) return false;
    Complex step = f / df;
    z -= step;
    if (std::abs(step) < 1e-13 * (1.0 + std::abs(z))) {
      return std::abs(char_value(p, z)) < 1e-9 * (1.0 + std::abs(z));
    }
  }
  return std::abs(char_value(p, z)) < 1e-9 * (1.0 + std::abs(z));
}

}  // namespace

int count_roots_in_rect(const CharProblem& p, const Rect& rect) {
  return winding_number(p, rect);
}

RootReport rightmost_root(const CharProblem& p, double x_lo, double x_hi,
                          double im_cap) {
  if (!(x_lo < x_hi) || !(im_cap > 0.0))
    throw std::invalid_argument("rightmost_root: bad search window");

  RootReport report;
  Rect window{x_lo, x_hi, -im_cap, im_cap};
  report.count_certificate = count_with_jiggle(p, window);
  if (report.count_certificate == 0) {
    report.rightmost = {std::numeric_limits<double>::quiet_NaN(), 0.0};
    report.message = "no roots in window";
    return report;
  }

  const double box_tol =
      1e-5 * std::max(1.0, std::max(std::abs(x_lo), std::abs(x_hi)));
  struct Item {
    Rect rect;
    int count;
  };
  std::deque<Item> queue{{window, report.count_certificate}};
  std::vector<Complex> roots;
  long budget = 4000 + 600L * report.count_certificate;

  while (!queue.empty()) {
    if (--budget < 0) {
      report.complete = false;
      report.message = "subdivision budget exhausted; partial root list";
      break;
    }
    Item it = queue.front();
    queue.pop_front();
    if (it.count == 0) continue;

    if (it.rect.width() < box_tol && it.rect.height() < box_tol) {
      // Newton from the center and a couple of offsets; attribute the full
      // count to whatever converges inside (or near) the box.
      std::vector<Complex> found;
      Complex c(0.5 * (it.rect.re_lo + it.rect.re_hi),
                0.5 * (it.rect.im_lo + it.rect.im_hi));
      double h = std::max(it.rect.width(), it.rect.height());
      for (Complex seed :
           {c, c + Complex(0.3 * h, 0.2 * h), c - Complex(0.2 * h, 0.3 * h)}) {
        Complex z = seed;
        if (!newton_refine(p, z)) continue;
        if (std::abs(z - c) > 64.0 * h) continue;
        bool dup = false;
        for (Complex w : found)
          if (std::abs(w - z) < 1e-7 * (1.0 + std::abs(z))) dup = true;
        if (!dup) found.push_back(z);
      }
      if (found.empty()) {
        report.complete = false;
        report.message = "Newton failed to converge in an isolated box";
        continue;
      }
      for (int i = 0; i < it.count; ++i)
        roots.push_back(found[std::min<size_t>(i, found.size() - 1)]);
      continue;
    }

    // Split along the longer dimension; jiggle the cut if it lands on a root.
    bool split_re = it.rect.width() >= it.rect.height();
    double lo = split_re ? it.rect.re_lo : it.rect.im_lo;
    double hi = split_re ? it.rect.re_hi : it.rect.im_hi;
    int left_count = -1;
    Rect left = it.rect;
    for (int attempt = 0; attempt < 8 && left_count < 0; ++attempt) {
      double cut = lo + (hi - lo) * (0.5 + 0.037 * double(attempt));
      left = it.rect;
      (split_re ? left.re_hi : left.im_hi) = cut;
      try {
        left_count = winding_number(p, left);
      } catch (const NearRootOnContour&) {
      } catch (const std::runtime_error&) {
      }
    }
    if (left_count < 0) {
      report.complete = false;
      report.message = "could not place a cut away from roots";
      continue;
    }
    Rect right = it.rect;
    (split_re ? right.re_lo : right.im_lo) =
        (split_re ? left.re_hi : left.im_hi);
    queue.push_back({left, left_count});
    queue.push_back({right, it.count - left_count});
  }

  // Conjugate closure (real coefficients) and deterministic ordering.
  std::vector<Complex> closed;
  for (Complex z : roots) {
    if (std::abs(z.imag()) < 1e-9 * (1.0 + std::abs(z)))
      z = {z.real(), 0.0};
    closed.push_back(z);
  }
  for (Complex z : std::vector<Complex>(closed)) {
    if (z.imag() == 0.0) continue;
    bool has_conj = false;
    for (Complex w : closed)
      if (std::abs(w - std::conj(z)) < 1e-7 * (1.0 + std::abs(z)))
        has_conj = true;
    if (!has_conj) closed.push_back(std::conj(z));
  }
  std::sort(closed.begin(), closed.end(), [](Complex a, Complex b) {
    if (a.real() != b.real()) return a.real() < b.real();
    return a.imag() < b.imag();
  });
  report.roots = std::move(closed);
  report.residuals.reserve(report.roots.size());
  for (Complex z : report.roots)
    report.residuals.push_back(std::abs(char_value(p, z)));
  if (!report.roots.empty()) {
    report.rightmost = *std::max_element(
        report.roots.begin(), report.roots.end(),
        [](Complex a, Complex b) { return a.real() < b.real(); });
  } else {
    report.rightmost = {std::numeric_limits<double>::quiet_NaN(), 0.0};
  }
  return report;
}

std::string to_string(GammaLabel g) {
  switch (g) {
    case GammaLabel::Gamma0: return "Gamma0";
    case GammaLabel::GammaP: return "GammaP";
    case GammaLabel::Gamma1Other: return "Gamma1-other";
    case GammaLabel::Resolvent: return "resolvent";
  }
  return "?";
}

GammaLabel gamma_classify(const DelayKernel& k, Complex lambda,
                          std::span<const double> spectrum) {
  Complex n = n_of_lambda(k, lambda);
  double ntol = 1e-8 * (1.0 + std::abs(lambda));
  if (std::abs(n) < ntol) {
    // n(0) = 1 + alpha + integral(beta); when it vanishes, 0 is point
    // spectrum rather than a Gamma_0 element.
    if (std::abs(lambda) < 1e-12) return GammaLabel::GammaP;
    return GammaLabel::Gamma0;
  }
  Complex z = lambda / n;
  for (double mu : spectrum) {
    if (std::abs(z - mu) <= 1e-8 * (1.0 + std::abs(mu)))
      return GammaLabel::GammaP;
  }
  return GammaLabel::Resolvent;
}

Verdict distributed_stability_check(const DelayKernel& k, double c0) {
  if (k.alpha() != 0.0)
    throw std::invalid_argument(
        "distributed_stability_check: criterion requires alpha = 0");
  if (!(c0 > 0.0))
    throw std::invalid_argument("distributed_stability_check: c0 must be > 0");
  double l1 = k.beta_l1_norm();
  return {l1 < 1.0, 1.0 - l1};
}

std::vector<double> remark51_real_roots(double beta0, double r) {
  if (!(beta0 < 0.0))
    throw std::invalid_argument("remark51_real_roots: beta0 must be < 0");
  if (!(r > 0.0))
    throw std::invalid_argument("remark51_real_roots: r must be > 0");
  std::vector<double> roots{0.0};
  if (-beta0 * r <= 1.0) return roots;

  auto f = [&](double x) { return x + beta0 * (1.0 - std::exp(-r * x)); };
  // f has its minimum at ln(-beta0*r)/r > 0 and f -> +inf; bracket the
  // positive root between the minimum and x = -beta0 + 1 where f > 0.
  double lo = std::log(-beta0 * r) / r;
  double hi = -beta0 + 1.0;
  while (f(hi) <= 0.0) hi *= 2.0;
  for (int it = 0; it < 200 && hi - lo > 1e-12; ++it) {
    double mid = 0.5 * (lo + hi);
    (f(mid) < 0.0 ? lo : hi) = mid;
  }
  roots.push_back(0.5 * (lo + hi));
  return roots;
}

double example52_threshold(double b, double r) {
  if (!(r > 0.0))
    throw std::invalid_argument("example52_threshold: r must be > 0");
  return b <= 0.0 ? std::exp(r * b) / r : 1.0 / r;
}

bool discrete_stability_check(double alpha) { return std::abs(alpha) < 1.0; }

Verdict fractional_stability_check(double alpha, double delta, double lambda1) {
  if (!(delta >= 0.0 && delta < 1.0))
    throw std::invalid_argument(
        "fractional_stability_check: delta must be in [0,1)");
  if (!(lambda1 < 0.0))
    throw std::invalid_argument(
        "fractional_stability_check: lambda1 must be < 0");
  double threshold = std::pow(-lambda1, 1.0 - delta);
  return {2.0 * std::abs(alpha) < threshold,
          threshold - 2.0 * std::abs(alpha)};
}

ResolventSup resolvent_norm_sup(const ModeSystem& sys, const DelayKernel& k,
                                const HalfPlaneGrid& grid) {
  ResolventSup out;
  auto consider = [&](Complex lambda) {
    for (const auto& m : sys.modes) {
      CharProblem p{k, m};
      double d = std::abs(char_value(p, lambda));
      if (d < 1e-12 * (1.0 + std::abs(lambda))) {
        ++out.flagged_samples;
        continue;
      }
      if (1.0 / d > out.sup) {
        out.sup = 1.0 / d;
        out.argmax = lambda;
      }
    }
  };
  const int n = std::max(3, grid.axis_points);
  for (int i = 0; i < n; ++i) {
    double y = -grid.im_cap + 2.0 * grid.im_cap * double(i) / double(n - 1);
    consider({0.0, y});
    // F_{ia} R(ia, A) sample on the axis.
    for (const auto& m : sys.modes) {
      double v = std::abs(k.alpha() * m.m1) / std::hypot(y, m.mu);
      out.f_resolvent_sup = std::max(out.f_resolvent_sup, v);
    }
    for (double x : grid.re_rays) consider({x, y});
  }
  return out;
}

namespace {

// Real roots by sign scan plus bisection; used only to seed Newton.
void real_axis_seeds(const CharProblem& p, double lo, double hi,
                     std::vector<Complex>& seeds) {
  const int n = 128;
  double prev_x = lo;
  double prev_f = char_value(p, {lo, 0.0}).real();
  for (int i = 1; i <= n; ++i) {
    double x = lo + (hi - lo) * double(i) / double(n);
    double f = char_value(p, {x, 0.0}).real();
    if (prev_f == 0.0) seeds.push_back({prev_x, 0.0});
    if (prev_f * f < 0.0) {
      double a = prev_x, b = x, fa = prev_f;
      for (int it = 0; it < 60; ++it) {
        double m = 0.5 * (a + b);
        double fm = char_value(p, {m, 0.0}).real();
        if (fa * fm <= 0.0)
          b = m;
        else
          a = m, fa = fm;
      }
      seeds.push_back({0.5 * (a + b), 0.0});
    }
    prev_x = x;
    prev_f = f;
  }
}

// Rightmost root via a lower bound from Newton candidates followed by one
// certified isolation pass. mu anchors the seeds, D bounds the delayed
// channels (|alpha*m1| + ||beta||_1 |m2|), and im_bound(x) bounds |Im| of
// roots with Re >= x.
template <class ImBound>
double certified_rightmost(const CharProblem& p, double mu, double D,
                           double x_hi, ImBound im_bound) {
  const double r = p.kernel.r();
  std::vector<Complex> seeds;
  seeds.push_back({mu, 0.0});
  for (int j = 0; j < 8; ++j) {
    double th = 2.0 * kPi * double(j) / 8.0 + 0.3;
    seeds.push_back(Complex(mu, 0.0) +
                    (D + 1.0) * Complex(std::cos(th), std::sin(th)));
  }
  if (D > 0.0) {
    // Root-chain estimates: on a chain root, e^{-x r} ~ |lambda - mu| / D.
    for (int j = 0; j <= 16; ++j) {
      double y = double(j) * kPi / r;
      double x = std::log(D / std::hypot(mu, y + 1.0)) / r;
      seeds.push_back({std::clamp(x, mu - D - 10.0, x_hi), y});
    }
  }
  real_axis_seeds(p, std::min(mu - D - 1.0, -1.0), x_hi, seeds);

  double rho = -std::numeric_limits<double>::infinity();
  for (Complex seed : seeds) {
    Complex z = seed;
    if (!newton_refine(p, z)) continue;
    if (z.real() > x_hi + 1.0) continue;
    rho = std::max(rho, z.real());
  }
  if (!std::isfinite(rho))
    throw std::runtime_error(
        "spectral_abscissa: no seed root converged; widen the search");

  // Everything right of rho - 0.5 lies within the certified box.
  double left = rho - 0.5;
  double y = im_bound(left);
  RootReport rr = rightmost_root(p, left, std::max(x_hi, left + 1.0), y);
  if (rr.roots.empty())
    throw std::runtime_error("spectral_abscissa: root isolation failed");
  return rr.rightmost.real();
}

}  // namespace

AbscissaReport spectral_abscissa(const ModeSystem& sys, const DelayKernel& k,
                                 double im_cap) {
  AbscissaReport rep;
  rep.mode_abscissa = -std::numeric_limits<double>::infinity();
  rep.gamma0_abscissa = -std::numeric_limits<double>::infinity();

  const double r = k.r();

  for (const auto& m : sys.modes) {
    CharProblem p{k, m};
    double x_hi = apriori_root_bound(m, k) + 1.0;
    double delayed =
        std::abs(k.alpha() * m.m1) + k.beta_l1_norm() * std::abs(m.m2);
    auto im_bound = [&](double x) {
      // On a root, |lambda - mu| <= delayed * e^{-x*r} for Re lambda >= x.
      double y = std::abs(m.mu) + std::abs(x) + 2.0;
      if (delayed > 0.0)
        y += delayed * (x < 0.0 ? std::exp(-x * r) : 1.0);
      if (im_cap > 0.0) y = std::min(y, im_cap);
      return y;
    };
    double re = certified_rightmost(p, m.mu, delayed, x_hi, im_bound);
    if (re > rep.mode_abscissa) {
      rep.mode_abscissa = re;
      rep.worst_mode = m.eig_index;
    }
  }

  // Gamma_0 family: zeros of n. These belong to the generator's spectrum
  // only when every active delayed channel acts through A itself
  // (m1_k = mu_k when alpha != 0, m2_k = mu_k when beta != 0), so that
  // Delta_k(lambda) = lambda - mu_k * n(lambda) and mode roots accumulate
  // on the zero set of n as |mu_k| grows. Their imaginary parts are
  // unbounded for a discrete atom, but that chain converges to
  // Re = ln|alpha|/r, which is included analytically; zeros within the cap
  // are located numerically.
  bool gamma0_applies = !sys.modes.empty();
  for (const auto& m : sys.modes) {
    double tol = 1e-12 * std::max(1.0, std::abs(m.mu));
    if (k.alpha() != 0.0 && std::abs(m.m1 - m.mu) > tol) gamma0_applies = false;
    if (k.beta().type != BetaKernel::Type::Zero &&
        std::abs(m.m2 - m.mu) > tol)
      gamma0_applies = false;
  }
  if (!gamma0_applies) {
    rep.gamma0_abscissa = std::numeric_limits<double>::quiet_NaN();
  } else {
    CharProblem p{k, std::nullopt};
    const double a = std::abs(k.alpha());
    // The discrete chain of zeros accumulates at Re = ln|alpha|/r.
    if (a > 0.0) rep.gamma0_abscissa = std::log(a) / r;

    if (k.beta().type != BetaKernel::Type::Zero) {
      // Zeros of n with 1 - |alpha| e^{-x r} >= 1/16 satisfy
      // |lambda| <= 16 B(x) with B from integration by parts of the
      // beta transform; deeper zeros sit within ln(16/15)/r of the chain
      // asymptote and are covered by it. Zeros left of the mode abscissa
      // cannot move the overall abscissa and are not resolved.
      double b0 = std::abs(k.beta_at(0.0));
      double br = std::abs(k.beta_at(-r));
      double pv = k.beta_pointwise_variation();
      auto bound_B = [&](double x) {
        double grow = x < 0.0 ? std::exp(-x * r) : 1.0;
        return b0 + br * grow + pv * grow;
      };
      double floor_g = std::max(rep.mode_abscissa, -8.0 / r);
      if (a > 0.0)
        floor_g = std::max(floor_g, std::log(16.0 * a / 15.0) / r);
      double x_hi = 1.0 + 2.0 * k.beta_sup_norm();
      if (a > 0.5) x_hi = std::max(x_hi, std::log(2.0 * a) / r + 1.0);
      if (floor_g < x_hi) {
        double y = 16.0 * bound_B(floor_g) + 1.0;
        if (im_cap > 0.0) y = std::min(y, im_cap);
        Rect box{floor_g, x_hi, -y, y};
        if (count_with_jiggle(p, box) > 0) {
          RootReport rr = rightmost_root(p, box.re_lo, box.re_hi, y);
          if (!rr.roots.empty())
            rep.gamma0_abscissa =
                std::max(rep.gamma0_abscissa, rr.rightmost.real());
        }
      }
    }
    // lambda = 0 is point spectrum iff n(0) = 1 + alpha + integral(beta) = 0.
    if (std::abs(n_of_lambda(k, 0.0)) < 1e-12)
      rep.gamma0_abscissa = std::max(rep.gamma0_abscissa, 0.0);
  }

  rep.abscissa = rep.mode_abscissa;
  if (std::isfinite(rep.gamma0_abscissa))
    rep.abscissa = std::max(rep.abscissa, rep.gamma0_abscissa);
  return rep;
}

}  // namespace rou
