#include "casa/von_mises.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "casa/angles.hpp"
#include "casa/bessel.hpp"
#include "casa/errors.hpp"

namespace casa {
namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double log_sum_exp(std::span<const double> v) {
  double m = kNegInf;
  for (double x : v) m = std::max(m, x);
  if (m == kNegInf) return kNegInf;
  double s = 0.0;
  for (double x : v) s += std::exp(x - m);
  return m + std::log(s);
}

// Responsibility-weighted data term of one component as a function of its
// concentration, up to a constant: kappa*r - log(2 pi I0(kappa)).
double concentration_objective(double kappa, double r) {
  return kappa * (r - 1.0) - std::log(kTwoPi * bessel_i0_scaled(kappa));
}

}  // namespace

double vm_log_pdf(double phi, double mu, double kappa) {
  kappa = std::clamp(kappa, 0.0, kKappaMax);
  // kappa*cos(d) - log(2 pi I0(kappa)) written against the scaled Bessel so
  // the exponentials cancel for large kappa.
  return kappa * (std::cos(phi - mu) - 1.0) -
         std::log(kTwoPi * bessel_i0_scaled(kappa));
}

double vm_pdf(double phi, double mu, double kappa) {
  return std::exp(vm_log_pdf(phi, mu, kappa));
}

double mixture_loglik(std::span<const double> phi, const VonMisesMixture& mix) {
  const int c_count = mix.size();
  std::vector<double> terms(c_count);
  double total = 0.0;
  for (double p : phi) {
    for (int c = 0; c < c_count; ++c) {
      terms[c] = mix.weights[c] > 0.0
                     ? std::log(mix.weights[c]) + vm_log_pdf(p, mix.means[c], mix.kappas[c])
                     : kNegInf;
    }
    total += log_sum_exp(terms);
  }
  return total;
}

int min_kappa_component(const VonMisesMixture& mix) {
  int best = 0;
  for (int c = 1; c < mix.size(); ++c) {
    if (mix.kappas[c] < mix.kappas[best]) best = c;
  }
  return best;
}

double approx_kappa_inverse(double r) {
  if (r <= 0.0) return 0.0;
  if (r >= 1.0) return kKappaMax;
  double kappa;
  if (r < 0.53) {
    kappa = 2.0 * r + r * r * r + (5.0 / 6.0) * r * r * r * r * r;
  } else if (r < 0.85) {
    kappa = -0.4 + 1.39 * r + 0.43 / (1.0 - r);
  } else {
    kappa = 1.0 / (r * r * r - 4.0 * r * r + 3.0 * r);
  }
  return std::clamp(kappa, 0.0, kKappaMax);
}

CircularKMeansResult circular_kmeans(std::span<const double> phi, int num_clusters,
                                     std::uint64_t seed, int restarts, int max_iter) {
  const int n = static_cast<int>(phi.size());
  if (num_clusters < 1) throw ConfigError("circular_kmeans: need at least one cluster");
  if (n < num_clusters) throw ConfigError("circular_kmeans: fewer observations than clusters");

  CircularKMeansResult best;
  best.cost = std::numeric_limits<double>::infinity();

  for (int r = 0; r < restarts; ++r) {
    std::mt19937_64 rng(seed + static_cast<std::uint64_t>(r) * 0x9e3779b97f4a7c15ULL);

    // Initial centroids: C distinct observations.
    std::vector<int> idx(n);
    for (int i = 0; i < n; ++i) idx[i] = i;
    for (int i = 0; i < num_clusters; ++i) {
      std::uniform_int_distribution<int> pick(i, n - 1);
      std::swap(idx[i], idx[pick(rng)]);
    }
    std::vector<double> means(num_clusters);
    for (int c = 0; c < num_clusters; ++c) means[c] = phi[idx[c]];

    std::vector<int> assign(n, -1);
    std::vector<int> prev(n, -2);
    for (int it = 0; it < max_iter && assign != prev; ++it) {
      prev = assign;
      for (int i = 0; i < n; ++i) {
        int arg = 0;
        double best_cos = -2.0;
        for (int c = 0; c < num_clusters; ++c) {
          const double cs = std::cos(phi[i] - means[c]);
          if (cs > best_cos) {
            best_cos = cs;
            arg = c;
          }
        }
        assign[i] = arg;
      }
      // Update centroids; re-seed empty clusters at the worst-fit point.
      std::vector<double> sx(num_clusters, 0.0), sy(num_clusters, 0.0);
      std::vector<int> count(num_clusters, 0);
      for (int i = 0; i < n; ++i) {
        sx[assign[i]] += std::cos(phi[i]);
        sy[assign[i]] += std::sin(phi[i]);
        ++count[assign[i]];
      }
      for (int c = 0; c < num_clusters; ++c) {
        if (count[c] > 0) {
          means[c] = std::atan2(sy[c], sx[c]);
        } else {
          int far = 0;
          double worst = 2.0;
          for (int i = 0; i < n; ++i) {
            const double cs = std::cos(phi[i] - means[assign[i]]);
            if (cs < worst) {
              worst = cs;
              far = i;
            }
          }
          means[c] = phi[far];
          assign[far] = c;
          prev[far] = -2;  // force another sweep
        }
      }
    }

    double cost = 0.0;
    for (int i = 0; i < n; ++i) cost += 1.0 - std::cos(phi[i] - means[assign[i]]);
    if (cost < best.cost) {
      best.cost = cost;
      best.assignment = assign;
      best.means.resize(num_clusters);
      for (int c = 0; c < num_clusters; ++c) best.means[c] = wrap_angle(means[c]);
    }
  }
  return best;
}

EmResult em_fit(std::span<const double> phi, const CircularKMeansResult& init,
                const EmOptions& opts) {
  const int n = static_cast<int>(phi.size());
  const int c_count = static_cast<int>(init.means.size());
  if (n < c_count) throw ConfigError("em_fit: fewer observations than components");

  EmResult out;
  VonMisesMixture& mix = out.mix;
  mix.weights.assign(c_count, 0.0);
  mix.means = init.means;
  mix.kappas.assign(c_count, 0.0);

  // Initial parameters from the hard partition.
  {
    std::vector<double> sx(c_count, 0.0), sy(c_count, 0.0);
    std::vector<int> count(c_count, 0);
    for (int i = 0; i < n; ++i) {
      const int c = init.assignment[i];
      sx[c] += std::cos(phi[i]);
      sy[c] += std::sin(phi[i]);
      ++count[c];
    }
    for (int c = 0; c < c_count; ++c) {
      mix.weights[c] = std::max(static_cast<double>(count[c]) / n, opts.weight_floor);
      if (count[c] > 0) {
        const double r = std::hypot(sx[c], sy[c]) / count[c];
        mix.kappas[c] = approx_kappa_inverse(std::min(r, 1.0 - 1e-12));
      }
    }
    double wsum = 0.0;
    for (double w : mix.weights) wsum += w;
    for (double& w : mix.weights) w /= wsum;
  }

  std::vector<double> gamma(static_cast<std::size_t>(n) * c_count);
  std::vector<double> logw(c_count);
  double prev_ll = kNegInf;

  for (int it = 0; it < opts.max_iter; ++it) {
    // E-step (responsibilities) and current log-likelihood in one pass.
    double ll = 0.0;
    for (int i = 0; i < n; ++i) {
      for (int c = 0; c < c_count; ++c) {
        logw[c] = mix.weights[c] > 0.0
                      ? std::log(mix.weights[c]) +
                            vm_log_pdf(phi[i], mix.means[c], mix.kappas[c])
                      : kNegInf;
      }
      const double lse = log_sum_exp(logw);
      ll += lse;
      for (int c = 0; c < c_count; ++c) {
        gamma[static_cast<std::size_t>(i) * c_count + c] =
            lse == kNegInf ? 1.0 / c_count : std::exp(logw[c] - lse);
      }
    }

    // M-step.
    for (int c = 0; c < c_count; ++c) {
      double sx = 0.0, sy = 0.0, gsum = 0.0;
      for (int i = 0; i < n; ++i) {
        const double g = gamma[static_cast<std::size_t>(i) * c_count + c];
        sx += g * std::cos(phi[i]);
        sy += g * std::sin(phi[i]);
        gsum += g;
      }
      const double pi_c = gsum / n;
      if (pi_c < opts.weight_floor) {
        // Collapsed component: restart it as a uniform circular density.
        mix.weights[c] = 1.0 / c_count;
        mix.kappas[c] = 0.0;
        out.component_reinitialized = true;
        continue;
      }
      mix.weights[c] = pi_c;
      mix.means[c] = wrap_angle(std::atan2(sy, sx));
      double r = 0.0;
      for (int i = 0; i < n; ++i) {
        r += gamma[static_cast<std::size_t>(i) * c_count + c] *
             std::cos(phi[i] - mix.means[c]);
      }
      r = std::clamp(r / gsum, 0.0, 1.0 - 1e-12);
      // The Best-Fisher inverse is approximate, so only accept its kappa when
      // it does not lower the component's weighted fit; this keeps the
      // iteration a generalized EM step with a non-decreasing log-likelihood.
      const double cand = approx_kappa_inverse(r);
      if (concentration_objective(cand, r) >=
          concentration_objective(mix.kappas[c], r)) {
        mix.kappas[c] = cand;
      }
    }
    {
      double wsum = 0.0;
      for (double w : mix.weights) wsum += w;
      for (double& w : mix.weights) w /= wsum;
    }

    const double new_ll = mixture_loglik(phi, mix);
    out.loglik_trace.push_back(new_ll);
    out.iterations = it + 1;
    if (it > 0 && new_ll - prev_ll < opts.tol) {
      prev_ll = new_ll;
      break;
    }
    prev_ll = new_ll;
  }
  return out;
}

EmResult fit_mixture(std::span<const double> phi, int num_components,
                     std::uint64_t seed, const EmOptions& opts) {
  return em_fit(phi, circular_kmeans(phi, num_components, seed), opts);
}

SoftMaskSet soft_masks(std::span<const double> angles,
                       std::span<const std::pair<int, int>> origin,
                       const VonMisesMixture& mix, int num_frames, int num_channels) {
  const int c_count = mix.size();
  SoftMaskSet masks;
  masks.num_frames = num_frames;
  masks.num_channels = num_channels;
  masks.num_streams = c_count;
  masks.beta.assign(static_cast<std::size_t>(num_frames) * num_channels * c_count,
                    1.0 / c_count);

  std::vector<double> logp(c_count);
  for (std::size_t i = 0; i < angles.size(); ++i) {
    for (int c = 0; c < c_count; ++c) {
      logp[c] = vm_log_pdf(angles[i], mix.means[c], mix.kappas[c]);
    }
    const double lse = log_sum_exp(logp);
    const auto [k, l] = origin[i];
    for (int c = 0; c < c_count; ++c) {
      masks.at(k, l, c) = lse == kNegInf ? 1.0 / c_count : std::exp(logp[c] - lse);
    }
  }
  return masks;
}

}  // namespace casa
