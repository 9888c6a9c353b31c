#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

namespace casa {

/// Concentrations above this are clamped; at grid resolution the
/// distribution is already indistinguishable from a delta.
inline constexpr double kKappaMax = 1e4;

double vm_log_pdf(double phi, double mu, double kappa);
double vm_pdf(double phi, double mu, double kappa);

struct VonMisesMixture {
  std::vector<double> weights;  // sum to 1
  std::vector<double> means;    // wrapped to [-pi, pi)
  std::vector<double> kappas;   // in [0, kKappaMax]

  int size() const { return static_cast<int>(weights.size()); }
};

/// Sum_n log sum_c pi_c VM(phi_n | mu_c, kappa_c), log-sum-exp stabilized.
double mixture_loglik(std::span<const double> phi, const VonMisesMixture& mix);

/// Index of the smallest concentration; ties resolve to the lowest index.
int min_kappa_component(const VonMisesMixture& mix);

/// Best-Fisher piecewise approximation of A^{-1}(R), clamped to
/// [0, kKappaMax].  R outside [0, 1) clamps to the nearest endpoint.
double approx_kappa_inverse(double r);

struct CircularKMeansResult {
  std::vector<double> means;
  std::vector<int> assignment;
  double cost = 0.0;  // sum of (1 - cos(phi - mean))
};

/// k-means on unit vectors with cosine distance; best of `restarts`
/// seeded runs.  Requires N >= C.
CircularKMeansResult circular_kmeans(std::span<const double> phi, int num_clusters,
                                     std::uint64_t seed, int restarts = 5,
                                     int max_iter = 100);

struct EmOptions {
  double tol = 1e-6;
  int max_iter = 100;
  double weight_floor = 1e-8;
};

struct EmResult {
  VonMisesMixture mix;
  std::vector<double> loglik_trace;  // log-likelihood after each iteration
  int iterations = 0;
  bool component_reinitialized = false;
};

/// EM for a von Mises mixture, initialized from a circular k-means
/// partition.  Stops when the log-likelihood gain drops below tol.
EmResult em_fit(std::span<const double> phi, const CircularKMeansResult& init,
                const EmOptions& opts = {});

/// Convenience: circular_kmeans followed by em_fit.
EmResult fit_mixture(std::span<const double> phi, int num_components,
                     std::uint64_t seed, const EmOptions& opts = {});

struct SoftMaskSet {
  int num_frames = 0;    // K
  int num_channels = 0;  // L
  int num_streams = 0;   // C
  std::vector<double> beta;  // K*L*C, uniform 1/C where no observation exists

  double& at(int k, int l, int c) {
    return beta[(static_cast<std::size_t>(l) * num_frames + k) * num_streams + c];
  }
  double at(int k, int l, int c) const {
    return beta[(static_cast<std::size_t>(l) * num_frames + k) * num_streams + c];
  }
};

/// Per-unit masks beta = VM(phi | mu_c, kappa_c) / sum_j VM(phi | mu_j, kappa_j);
/// mixture weights are deliberately excluded.  Units without an observation
/// (invalid TF units) receive uniform 1/C.
SoftMaskSet soft_masks(std::span<const double> angles,
                       std::span<const std::pair<int, int>> origin,
                       const VonMisesMixture& mix, int num_frames, int num_channels);

}  // namespace casa
