#include "casa/gmm.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include "casa/errors.hpp"

namespace casa {
namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

std::vector<int> kmeans_labels(const Eigen::MatrixXd& data, int k, std::uint64_t seed,
                               const GmmOptions& opts) {
  const int n = static_cast<int>(data.rows());
  std::vector<int> best_labels(n, 0);
  double best_cost = std::numeric_limits<double>::infinity();

  for (int r = 0; r < opts.kmeans_restarts; ++r) {
    std::mt19937_64 rng(seed + static_cast<std::uint64_t>(r) * 0x9e3779b97f4a7c15ULL);
    std::vector<int> idx(n);
    for (int i = 0; i < n; ++i) idx[i] = i;
    for (int i = 0; i < k; ++i) {
      std::uniform_int_distribution<int> pick(i, n - 1);
      std::swap(idx[i], idx[pick(rng)]);
    }
    Eigen::MatrixXd centers(k, data.cols());
    for (int c = 0; c < k; ++c) centers.row(c) = data.row(idx[c]);

    std::vector<int> labels(n, -1);
    for (int it = 0; it < opts.kmeans_iter; ++it) {
      bool changed = false;
      for (int i = 0; i < n; ++i) {
        int arg = 0;
        double best_d = std::numeric_limits<double>::infinity();
        for (int c = 0; c < k; ++c) {
          const double d = (data.row(i) - centers.row(c)).squaredNorm();
          if (d < best_d) {
            best_d = d;
            arg = c;
          }
        }
        if (labels[i] != arg) {
          labels[i] = arg;
          changed = true;
        }
      }
      Eigen::MatrixXd sums = Eigen::MatrixXd::Zero(k, data.cols());
      std::vector<int> count(k, 0);
      for (int i = 0; i < n; ++i) {
        sums.row(labels[i]) += data.row(i);
        ++count[labels[i]];
      }
      for (int c = 0; c < k; ++c) {
        if (count[c] > 0) {
          centers.row(c) = sums.row(c) / count[c];
        } else {
          std::uniform_int_distribution<int> pick(0, n - 1);
          centers.row(c) = data.row(pick(rng));
        }
      }
      if (!changed) break;
    }
    double cost = 0.0;
    for (int i = 0; i < n; ++i) cost += (data.row(i) - centers.row(labels[i])).squaredNorm();
    if (cost < best_cost) {
      best_cost = cost;
      best_labels = labels;
    }
  }
  return best_labels;
}

}  // namespace

void Gmm::cache() {
  const int k = num_components();
  cholesky_.resize(k);
  log_norm_.resize(k);
  for (int c = 0; c < k; ++c) {
    Eigen::MatrixXd cov = covariances_[c];
    double jitter = 0.0;
    for (;;) {
      cholesky_[c].compute(cov);
      if (cholesky_[c].info() == Eigen::Success) break;
      jitter = jitter == 0.0 ? 1e-8 : jitter * 10.0;
      cov = covariances_[c] + jitter * Eigen::MatrixXd::Identity(dim_, dim_);
      if (jitter > 1.0) throw TrainingError("gmm: covariance not positive definite");
    }
    double log_det = 0.0;
    for (int i = 0; i < dim_; ++i) log_det += 2.0 * std::log(cholesky_[c].matrixL()(i, i));
    log_norm_[c] = -0.5 * (dim_ * std::log(2.0 * std::numbers::pi) + log_det);
  }
}

double Gmm::log_likelihood(const Eigen::VectorXd& x) const {
  const int k = num_components();
  double max_term = kNegInf;
  std::vector<double> terms(k, kNegInf);
  for (int c = 0; c < k; ++c) {
    if (weights_[c] <= 0.0) continue;
    const Eigen::VectorXd d = x - means_[c];
    const double maha = d.dot(cholesky_[c].solve(d));
    terms[c] = std::log(weights_[c]) + log_norm_[c] - 0.5 * maha;
    max_term = std::max(max_term, terms[c]);
  }
  if (max_term == kNegInf) return kNegInf;
  double s = 0.0;
  for (double t : terms) s += std::exp(t - max_term);
  return max_term + std::log(s);
}

Gmm Gmm::from_parameters(std::vector<double> weights, std::vector<Eigen::VectorXd> means,
                         std::vector<Eigen::MatrixXd> covariances) {
  Gmm g;
  g.weights_ = std::move(weights);
  g.means_ = std::move(means);
  g.covariances_ = std::move(covariances);
  g.dim_ = g.means_.empty() ? 0 : static_cast<int>(g.means_[0].size());
  g.cache();
  return g;
}

Gmm Gmm::fit(const Eigen::MatrixXd& data, int num_components, std::uint64_t seed,
             const GmmOptions& opts) {
  const int n = static_cast<int>(data.rows());
  const int d = static_cast<int>(data.cols());
  if (n < num_components) throw TrainingError("gmm: fewer samples than components");

  Gmm g;
  g.dim_ = d;
  g.weights_.assign(num_components, 1.0 / num_components);
  g.means_.assign(num_components, Eigen::VectorXd::Zero(d));
  g.covariances_.assign(num_components, Eigen::MatrixXd::Identity(d, d));

  // Hard k-means partition seeds the mixture.
  const auto labels = kmeans_labels(data, num_components, seed, opts);
  {
    std::vector<int> count(num_components, 0);
    for (int i = 0; i < n; ++i) {
      g.means_[labels[i]] += data.row(i).transpose();
      ++count[labels[i]];
    }
    for (int c = 0; c < num_components; ++c) {
      if (count[c] > 0) g.means_[c] /= count[c];
      g.weights_[c] = std::max(count[c], 1) / static_cast<double>(n);
    }
    double wsum = 0.0;
    for (double w : g.weights_) wsum += w;
    for (double& w : g.weights_) w /= wsum;
    for (int c = 0; c < num_components; ++c) {
      Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(d, d);
      for (int i = 0; i < n; ++i) {
        if (labels[i] != c) continue;
        const Eigen::VectorXd v = data.row(i).transpose() - g.means_[c];
        cov += v * v.transpose();
      }
      if (count[c] > 1) cov /= count[c];
      g.covariances_[c] = cov + opts.cov_floor * Eigen::MatrixXd::Identity(d, d);
    }
  }
  g.cache();

  Eigen::MatrixXd gamma(n, num_components);
  double prev_mean_ll = kNegInf;
  for (int it = 0; it < opts.max_iter; ++it) {
    // E-step
    double ll = 0.0;
    std::vector<double> terms(num_components);
    for (int i = 0; i < n; ++i) {
      const Eigen::VectorXd x = data.row(i).transpose();
      double max_term = kNegInf;
      for (int c = 0; c < num_components; ++c) {
        const Eigen::VectorXd v = x - g.means_[c];
        const double maha = v.dot(g.cholesky_[c].solve(v));
        terms[c] = std::log(g.weights_[c]) + g.log_norm_[c] - 0.5 * maha;
        max_term = std::max(max_term, terms[c]);
      }
      double s = 0.0;
      for (int c = 0; c < num_components; ++c) s += std::exp(terms[c] - max_term);
      const double lse = max_term + std::log(s);
      ll += lse;
      for (int c = 0; c < num_components; ++c) gamma(i, c) = std::exp(terms[c] - lse);
    }

    // M-step
    for (int c = 0; c < num_components; ++c) {
      const double gsum = gamma.col(c).sum();
      if (gsum < 1e-10) continue;  // starved component keeps its parameters
      g.weights_[c] = gsum / n;
      Eigen::VectorXd mean = Eigen::VectorXd::Zero(d);
      for (int i = 0; i < n; ++i) mean += gamma(i, c) * data.row(i).transpose();
      mean /= gsum;
      Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(d, d);
      for (int i = 0; i < n; ++i) {
        const Eigen::VectorXd v = data.row(i).transpose() - mean;
        cov += gamma(i, c) * (v * v.transpose());
      }
      cov /= gsum;
      g.means_[c] = mean;
      g.covariances_[c] = cov + opts.cov_floor * Eigen::MatrixXd::Identity(d, d);
    }
    {
      double wsum = 0.0;
      for (double w : g.weights_) wsum += w;
      for (double& w : g.weights_) w /= wsum;
    }
    g.cache();

    const double mean_ll = ll / n;
    if (it > 0 && mean_ll - prev_mean_ll < opts.tol) break;
    prev_mean_ll = mean_ll;
  }
  return g;
}

}  // namespace casa
