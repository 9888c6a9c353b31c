#include "casa/bessel.hpp"

#include <cmath>
#include <numbers>

namespace casa {
namespace {

constexpr double kSeriesCutoff = 15.0;

// Power series: I_nu(x) = sum_k (x/2)^(2k+nu) / (k! (k+nu)!)
double series_scaled(double x, int nu) {
  const double t = 0.25 * x * x;
  double term = (nu == 0) ? 1.0 : 0.5 * x;
  double sum = term;
  for (int k = 1; k < 64; ++k) {
    term *= t / (static_cast<double>(k) * (k + nu));
    sum += term;
    if (term < sum * 1e-18) break;
  }
  return sum * std::exp(-x);
}

// Asymptotic expansion of e^{-x} I_nu(x), usable for x >= ~15:
//   e^{-x} I_nu(x) ~ (2 pi x)^{-1/2} sum_k t_k,
//   t_0 = 1, t_k = t_{k-1} * -(4 nu^2 - (2k-1)^2) / (8 k x)
double asymptotic_scaled(double x, int nu) {
  const double mu = 4.0 * nu * nu;
  double term = 1.0;
  double sum = 1.0;
  for (int k = 1; k < 24; ++k) {
    const double odd = 2.0 * k - 1.0;
    const double next = term * -(mu - odd * odd) / (8.0 * k * x);
    if (std::abs(next) >= std::abs(term)) break;  // divergent tail
    term = next;
    sum += term;
    if (std::abs(term) < 1e-17 * std::abs(sum)) break;
  }
  return sum / std::sqrt(2.0 * std::numbers::pi * x);
}

double scaled_bessel(double x, int nu) {
  if (x < kSeriesCutoff) return series_scaled(x, nu);
  return asymptotic_scaled(x, nu);
}

}  // namespace

double bessel_i0_scaled(double x) { return scaled_bessel(x, 0); }

double bessel_i1_scaled(double x) { return scaled_bessel(x, 1); }

double bessel_ratio(double x) {
  if (x <= 0.0) return 0.0;
  return bessel_i1_scaled(x) / bessel_i0_scaled(x);
}

}  // namespace casa
