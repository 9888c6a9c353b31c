// Independent reference implementations used only to generate or check
// expected values in tests.  Nothing here may call into the library code
// it verifies.
#pragma once

#include <cmath>
#include <functional>
#include <numbers>
#include <vector>

namespace oracle {

// Modified Bessel function of the first kind by direct power series.
inline double bessel_i(int nu, double x) {
  double term = 1.0;
  for (int j = 1; j <= nu; ++j) term *= x / (2.0 * j);
  double sum = term;
  const double t = 0.25 * x * x;
  for (int k = 1; k < 200; ++k) {
    term *= t / (static_cast<double>(k) * (k + nu));
    sum += term;
    if (term < sum * 1e-18) break;
  }
  return sum;
}

// Composite Simpson quadrature on [a, b].
inline double simpson(const std::function<double(double)>& f, double a, double b,
                      int intervals /* even */) {
  const double h = (b - a) / intervals;
  double sum = f(a) + f(b);
  for (int i = 1; i < intervals; ++i) sum += f(a + i * h) * (i % 2 == 1 ? 4.0 : 2.0);
  return sum * h / 3.0;
}

// Inverts a monotone increasing function on [lo, hi] by bisection.
inline double bisect_inverse(const std::function<double(double)>& f, double target,
                             double lo, double hi, int iters = 200) {
  for (int i = 0; i < iters; ++i) {
    const double mid = 0.5 * (lo + hi);
    (f(mid) < target ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

// Naive von Mises mixture log-likelihood, no log-domain tricks.
inline double naive_vm_loglik(const std::vector<double>& phi,
                              const std::vector<double>& weights,
                              const std::vector<double>& means,
                              const std::vector<double>& kappas) {
  double total = 0.0;
  for (double p : phi) {
    double mix = 0.0;
    for (std::size_t c = 0; c < weights.size(); ++c) {
      mix += weights[c] * std::exp(kappas[c] * std::cos(p - means[c])) /
             (2.0 * std::numbers::pi * bessel_i(0, kappas[c]));
    }
    total += std::log(mix);
  }
  return total;
}

// Exhaustive assignment search on index vectors (recursion, no std::next_permutation).
inline void all_permutations(int n, std::vector<std::vector<int>>& out) {
  std::vector<int> perm(n), used(n, 0);
  std::function<void(int)> rec = [&](int depth) {
    if (depth == n) {
      out.push_back(perm);
      return;
    }
    for (int i = 0; i < n; ++i) {
      if (used[i]) continue;
      used[i] = 1;
      perm[depth] = i;
      rec(depth + 1);
      used[i] = 0;
    }
  };
  rec(0);
}

}  // namespace oracle
