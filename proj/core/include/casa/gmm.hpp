#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

namespace casa {

struct GmmOptions {
  int max_iter = 100;
  double tol = 1e-6;        // on the mean log-likelihood
  double cov_floor = 1e-6;  // added to covariance diagonals
  int kmeans_iter = 25;
  int kmeans_restarts = 3;
};

/// Full-covariance Gaussian mixture fitted with k-means + EM.
class Gmm {
 public:
  static Gmm fit(const Eigen::MatrixXd& data /* N x D */, int num_components,
                 std::uint64_t seed, const GmmOptions& opts = {});

  int dim() const { return dim_; }
  int num_components() const { return static_cast<int>(weights_.size()); }
  const std::vector<double>& weights() const { return weights_; }
  const std::vector<Eigen::VectorXd>& means() const { return means_; }
  const std::vector<Eigen::MatrixXd>& covariances() const { return covariances_; }

  double log_likelihood(const Eigen::VectorXd& x) const;

  /// Construction from stored parameters (deserialization).
  static Gmm from_parameters(std::vector<double> weights,
                             std::vector<Eigen::VectorXd> means,
                             std::vector<Eigen::MatrixXd> covariances);

 private:
  void cache();

  int dim_ = 0;
  std::vector<double> weights_;
  std::vector<Eigen::VectorXd> means_;
  std::vector<Eigen::MatrixXd> covariances_;
  std::vector<Eigen::LLT<Eigen::MatrixXd>> cholesky_;
  std::vector<double> log_norm_;
};

}  // namespace casa
