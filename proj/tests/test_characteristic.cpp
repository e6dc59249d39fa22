#include <cmath>
#include <complex>
#include <numbers>

#include "doctest.h"
#include "rou/characteristic.hpp"

using namespace rou;
using std::numbers::pi;

namespace {

DelayKernel no_delay() { return DelayKernel(1.0, 0.0, BetaKernel::zero()); }

CharProblem ou_problem() {
  return CharProblem{no_delay(), ModeEntry{-1.0, 0.0, 0.0, 1.0, 1}};
}

}  // namespace

TEST_CASE("characteristic function n at notable points") {
  DelayKernel k(1.0, 1.0, BetaKernel::zero());
  CHECK(std::abs(n_of_lambda(k, {0.0, pi})) < 1e-14);  // 1 + e^{-i pi} = 0
  CHECK(std::abs(n_of_lambda(k, 0.0) - 2.0) < 1e-14);

  DelayKernel kc(1.0, 0.0, BetaKernel::constant(1.0));
  CHECK(std::abs(n_of_lambda(kc, 0.0) - 2.0) < 1e-13);  // 1 + integral(1)
}

TEST_CASE("characteristic value and derivative") {
  DelayKernel k(1.0, -0.5, BetaKernel::zero());
  CharProblem p{k, ModeEntry{-1.0, 1.0, 0.0, 1.0, 1}};
  // lambda - mu - alpha*m1*e^{-lambda r} at lambda = 0: 0 + 1 + 0.5.
  CHECK(std::abs(char_value(p, 0.0) - 1.5) < 1e-14);

  // Derivative matches a central difference for several problems.
  DelayKernel kd(0.8, 0.4, BetaKernel::exponential(0.6, -1.5));
  CharProblem pd{kd, ModeEntry{-2.0, -1.3, 0.7, 1.0, 1}};
  CharProblem pg{kd, std::nullopt};
  for (const auto& prob : {pd, pg}) {
    for (Complex z : {Complex{0.3, 1.2}, Complex{-1.0, 0.0}, Complex{0.0, 3.0}}) {
      const double h = 1e-5;
      Complex fd = (char_value(prob, z + h) - char_value(prob, z - h)) / (2.0 * h);
      CHECK(std::abs(char_deriv(prob, z) - fd) < 1e-7 * (1.0 + std::abs(fd)));
    }
  }
}

TEST_CASE("root counting by the argument principle") {
  auto p = ou_problem();
  CHECK(count_roots_in_rect(p, {-2.0, 0.0, -1.0, 1.0}) == 1);
  CHECK(count_roots_in_rect(p, {0.0, 1.0, -1.0, 1.0}) == 0);

  // Zeros of n(lambda) = 1 + e^{-lambda} sit at i*(2k+1)*pi.
  CharProblem g{DelayKernel(1.0, 1.0, BetaKernel::zero()), std::nullopt};
  CHECK(count_roots_in_rect(g, {-0.1, 0.1, 2.0, 4.0}) == 1);
  CHECK(count_roots_in_rect(g, {-0.1, 0.1, 4.0, 6.0}) == 0);
  CHECK(count_roots_in_rect(g, {-0.5, 0.5, -11.0, 11.0}) == 4);  // +-pi, +-3pi
}

TEST_CASE("winding counts are additive over a split rectangle") {
  DelayKernel k(1.0, -2.0, BetaKernel::zero());
  CharProblem p{k, ModeEntry{-1.0, 1.0, 0.0, 1.0, 1}};
  Rect whole{-3.0, 1.0, -8.0, 8.0};
  Rect left{-3.0, -0.7, -8.0, 8.0};
  Rect right{-0.7, 1.0, -8.0, 8.0};
  int w = count_roots_in_rect(p, whole);
  CHECK(w == count_roots_in_rect(p, left) + count_roots_in_rect(p, right));
  CHECK(w >= 1);
}

TEST_CASE("rightmost root: plain decay mode") {
  auto rep = rightmost_root(ou_problem(), -5.0, 1.0, 10.0);
  REQUIRE(!rep.roots.empty());
  CHECK(rep.rightmost.real() == doctest::Approx(-1.0).epsilon(1e-10));
  CHECK(std::abs(rep.rightmost.imag()) < 1e-10);
  CHECK(rep.complete);
  for (double res : rep.residuals) CHECK(res <= 1e-9 * (1.0 + std::abs(rep.rightmost)));
}

TEST_CASE("rightmost root: complex pairs are conjugate-closed") {
  DelayKernel k(1.0, -2.0, BetaKernel::zero());
  CharProblem p{k, ModeEntry{-1.0, 1.0, 0.0, 1.0, 1}};
  auto rep = rightmost_root(p, -4.0, 2.0, 30.0);
  REQUIRE(rep.roots.size() >= 2);
  for (auto z : rep.roots) {
    if (std::abs(z.imag()) < 1e-12) continue;
    bool has_conj = false;
    for (auto w : rep.roots)
      if (std::abs(w - std::conj(z)) < 1e-8 * (1.0 + std::abs(z))) has_conj = true;
    CHECK(has_conj);
  }
  // Residuals certify every listed root.
  for (size_t i = 0; i < rep.roots.size(); ++i)
    CHECK(std::abs(char_value(p, rep.roots[i])) <
          1e-8 * (1.0 + std::abs(rep.roots[i])));
}

TEST_CASE("a-priori root bound dominates the rightmost root") {
  DelayKernel k(0.5, 0.8, BetaKernel::constant(-1.0));
  ModeEntry m{-3.0, 2.0, 1.5, 1.0, 1};
  double bound = apriori_root_bound(m, k);
  CHECK(bound >= 3.0);
  auto rep = rightmost_root(CharProblem{k, m}, -bound, bound, bound);
  CHECK(std::abs(rep.rightmost) <= bound + 1e-9);
}

TEST_CASE("real roots of x + beta0 (1 - e^{-rx})") {
  auto roots = remark51_real_roots(-1.5, 1.0);
  REQUIRE(roots.size() == 2);
  CHECK(roots[0] == doctest::Approx(0.0));
  double x = roots[1];
  CHECK(x > std::log(1.5));
  CHECK(std::abs(x + (-1.5) * (1.0 - std::exp(-x))) < 1e-9);
  // Bisection down to 1e-10: re-evaluating nearby shows a sign change.
  auto f = [](double t) { return t - 1.5 * (1.0 - std::exp(-t)); };
  CHECK(f(x - 1e-9) * f(x + 1e-9) <= 0.0);

  // Below the threshold -beta0*r <= 1 only the zero root survives.
  CHECK(remark51_real_roots(-0.5, 1.0).size() == 1);
  CHECK_THROWS_AS(remark51_real_roots(0.5, 1.0), std::invalid_argument);
}

TEST_CASE("exponential-kernel stability threshold") {
  CHECK(example52_threshold(-1.0, 1.0) == doctest::Approx(std::exp(-1.0)));
  CHECK(example52_threshold(0.0, 0.5) == doctest::Approx(2.0));
  CHECK(example52_threshold(3.0, 1.0) == doctest::Approx(1.0));
  CHECK_THROWS_AS(example52_threshold(0.0, 0.0), std::invalid_argument);
}

TEST_CASE("closed-form stability criteria") {
  CHECK(discrete_stability_check(0.9));
  CHECK(discrete_stability_check(-0.99));
  CHECK(!discrete_stability_check(1.0));
  CHECK(!discrete_stability_check(-1.3));

  auto v = fractional_stability_check(1.0, 0.5, -pi * pi);
  CHECK(v.stable);
  CHECK(v.margin == doctest::Approx(pi - 2.0).epsilon(1e-12));
  CHECK(!fractional_stability_check(2.0, 0.5, -pi * pi).stable);
  CHECK_THROWS_AS(fractional_stability_check(1.0, 1.2, -1.0), std::invalid_argument);

  DelayKernel small(1.0, 0.0, BetaKernel::constant(0.5));
  auto d = distributed_stability_check(small, pi * pi);
  CHECK(d.stable);
  CHECK(d.margin == doctest::Approx(0.5).epsilon(1e-12));
  DelayKernel big(1.0, 0.0, BetaKernel::constant(-1.2));
  CHECK(!distributed_stability_check(big, pi * pi).stable);
  DelayKernel withatom(1.0, 0.3, BetaKernel::constant(0.1));
  CHECK_THROWS_AS(distributed_stability_check(withatom, 1.0), std::invalid_argument);
}

TEST_CASE("spectrum classification of sample points") {
  DelayKernel k(1.0, 1.0, BetaKernel::zero());
  std::vector<double> spectrum{-pi * pi};
  CHECK(gamma_classify(k, {0.0, pi}, spectrum) == GammaLabel::Gamma0);

  DelayKernel k2(1.0, 0.5, BetaKernel::zero());
  Complex lam{0.3, 0.0};
  Complex z = lam / n_of_lambda(k2, lam);
  CHECK(gamma_classify(k2, lam, {{z.real()}}) == GammaLabel::GammaP);
  CHECK(gamma_classify(k2, lam, {{z.real() + 1.0}}) == GammaLabel::Resolvent);

  // lambda = 0 with 1 + alpha + integral(beta) = 0 is point spectrum.
  DelayKernel k3(1.0, -1.0, BetaKernel::zero());
  CHECK(gamma_classify(k3, 0.0, spectrum) == GammaLabel::GammaP);

  CHECK(to_string(GammaLabel::Gamma0) != to_string(GammaLabel::Resolvent));
}

TEST_CASE("resolvent sup over the right half-plane: no delay") {
  ModeSystem sys;
  sys.modes = {{-1.0, 0.0, 0.0, 1.0, 1}};
  auto rs = resolvent_norm_sup(sys, no_delay());
  // sup over Re >= 0 of 1/|lambda + 1| is 1, attained at the origin.
  CHECK(rs.sup == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(std::abs(rs.argmax) < 1e-6);
  CHECK(rs.f_resolvent_sup == doctest::Approx(0.0));
  CHECK(rs.flagged_samples == 0);
}

TEST_CASE("spectral abscissa: no-delay and discrete-delay modes") {
  ModeSystem ou;
  ou.modes = {{-1.0, 0.0, 0.0, 1.0, 1}};
  auto rep = spectral_abscissa(ou, no_delay());
  CHECK(rep.abscissa == doctest::Approx(-1.0).epsilon(1e-9));
  CHECK(rep.worst_mode == 1);
  // Without any delayed channel, n has no zeros at all.
  CHECK(!(rep.gamma0_abscissa > -1e300));

  // A1 = A: the abscissa agrees with the certified rightmost root.
  double mu = -pi * pi, r = 0.1, alpha = 0.5;
  ModeEntry m{mu, mu, 0.0, 1.0, 1};
  ModeSystem disc;
  disc.modes = {m};
  DelayKernel kd(r, alpha, BetaKernel::zero());
  auto repd = spectral_abscissa(disc, kd);
  CHECK(repd.abscissa < 0.0);
  auto rr = rightmost_root(CharProblem{kd, m}, -40.0, 1.0, 80.0);
  CHECK(repd.mode_abscissa == doctest::Approx(rr.rightmost.real()).epsilon(1e-8));
  CHECK(std::abs(char_value(CharProblem{kd, m}, rr.rightmost)) <
        1e-8 * (1.0 + std::abs(rr.rightmost)));
  // With A1 = A the zeros of n accumulate at ln(alpha)/r and dominate here.
  CHECK(repd.gamma0_abscissa == doctest::Approx(std::log(0.5) / 0.1).epsilon(1e-9));
  CHECK(repd.abscissa ==
        doctest::Approx(std::max(repd.mode_abscissa, repd.gamma0_abscissa)));
}

TEST_CASE("spectral abscissa: zeros of n only join for A-proportional channels") {
  // A1 = (-A)^{1/2}, |alpha| = 1: n has imaginary-axis zeros but the modes
  // stay strictly stable; those zeros do not belong to this system.
  ModeSystem frac;
  frac.modes = {{-pi * pi, pi, 0.0, 1.0, 1}, {-4.0 * pi * pi, 2.0 * pi, 0.0, 0.5, 2}};
  DelayKernel k(1.0, 1.0, BetaKernel::zero());
  auto rep = spectral_abscissa(frac, k);
  CHECK(std::isnan(rep.gamma0_abscissa));
  CHECK(rep.abscissa < 0.0);

  // A1 = A: the same kernel's n-zeros are genuine spectrum on the axis.
  ModeSystem prop;
  prop.modes = {{-pi * pi, -pi * pi, 0.0, 1.0, 1}};
  auto rep2 = spectral_abscissa(prop, k);
  CHECK(!std::isnan(rep2.gamma0_abscissa));
  CHECK(std::abs(rep2.gamma0_abscissa) < 1e-8);  // zeros at i(2k+1)pi
}

TEST_CASE("spectral abscissa: stiff no-delay mode stays finite") {
  ModeSystem sys;
  sys.modes = {{-800.0, 0.0, 0.0, 1.0, 1}};
  DelayKernel k(1.0, 0.0, BetaKernel::zero());
  auto rep = spectral_abscissa(sys, k);
  CHECK(rep.abscissa == doctest::Approx(-800.0).epsilon(1e-9));
}

TEST_CASE("contour through a root is reported, not mislabeled") {
  // The root sits at -1, exactly on the requested edge.
  auto p = ou_problem();
  CHECK_THROWS_AS(count_roots_in_rect(p, {-1.0, 0.0, -1.0, 1.0}),
                  std::runtime_error);
  // rightmost_root perturbs the window internally and still succeeds.
  auto rep = rightmost_root(p, -1.0, 0.0, 1.0);
  CHECK(rep.rightmost.real() == doctest::Approx(-1.0).epsilon(1e-9));
  CHECK_THROWS_AS(rightmost_root(p, 0.0, -1.0, 1.0), std::invalid_argument);
}
