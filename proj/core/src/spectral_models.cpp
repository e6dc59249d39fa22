#include "rou/spectral_models.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace rou {

double DirichletMode::eval(double x) const {
  return std::sqrt(2.0 / L) * std::sin(double(k) * std::numbers::pi * x / L);
}

std::vector<DirichletMode> dirichlet_modes(double L, int K) {
  if (!(L > 0.0)) throw std::invalid_argument("dirichlet_modes: L must be > 0");
  if (K < 1) throw std::invalid_argument("dirichlet_modes: K must be >= 1");
  std::vector<DirichletMode> out;
  out.reserve(K);
  for (int k = 1; k <= K; ++k) {
    double w = double(k) * std::numbers::pi / L;
    out.push_back({-w * w, k, L});
  }
  return out;
}

ForcingProjection project_forcing(std::span<const double> f_samples,
                                  const std::vector<DirichletMode>& modes) {
  if (f_samples.size() < 2)
    throw std::invalid_argument("project_forcing: empty or degenerate grid");
  if (modes.empty())
    throw std::invalid_argument("project_forcing: no modes");
  const double L = modes.front().L;
  const size_t n = f_samples.size();
  const double h = L / double(n - 1);

  ForcingProjection out;
  out.coeffs.reserve(modes.size());
  for (const auto& m : modes) {
    double s = 0.0;
    double prev = f_samples[0] * m.eval(0.0);
    for (size_t i = 1; i < n; ++i) {
      double cur = f_samples[i] * m.eval(double(i) * h);
      s += 0.5 * (prev + cur);
      prev = cur;
    }
    out.coeffs.push_back(s * h);
  }

  double norm2 = 0.0;
  {
    double prev = f_samples[0] * f_samples[0];
    for (size_t i = 1; i < n; ++i) {
      double cur = f_samples[i] * f_samples[i];
      norm2 += 0.5 * (prev + cur);
      prev = cur;
    }
    norm2 *= h;
  }
  double sum2 = 0.0;
  for (double c : out.coeffs) sum2 += c * c;
  out.parseval_defect = norm2 - sum2;
  return out;
}

double fractional_multiplier(double mu, double delta) {
  if (!(mu < 0.0))
    throw std::invalid_argument("fractional_multiplier: mu must be < 0");
  if (!(delta >= 0.0 && delta < 1.0))
    throw std::invalid_argument("fractional_multiplier: delta must be in [0,1)");
  return std::pow(-mu, delta);
}

}  // namespace rou
