#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "casa/frontend.hpp"
#include "casa/gmm.hpp"

namespace casa {

struct SourceModel {
  std::string label;
  Gmm gmm;
  Eigen::VectorXd norm_mean;  // per-dimension z-score stats from training
  Eigen::VectorXd norm_std;
};

struct SourceModelSet {
  std::vector<SourceModel> models;
  std::uint64_t config_hash = 0;

  int num_classes() const { return static_cast<int>(models.size()); }
  void save(const std::string& path) const;
  static SourceModelSet load(const std::string& path);
};

struct ClassifierTrainConfig {
  int num_components = 16;
  std::uint64_t seed = 1;
  GmmOptions gmm;
  /// Minimum frames per class: components * dims * 10.
  int min_frames() const { return num_components * 7 * 10; }
};

/// Fits one full-covariance GMM per class over z-scored spectral feature
/// frames.  Throws TrainingError naming the class when a frame set is too
/// small.  Map iteration order fixes the class index order.
SourceModelSet train_source_models(
    const std::map<std::string, Eigen::MatrixXd>& frames_per_class,
    const ClassifierTrainConfig& cfg = {});

/// p(class | x) with a uniform class prior; sums to 1.  `degenerate` is set
/// when every class likelihood underflows and the uniform fallback applies.
std::vector<double> frame_posterior(const SpectralFeatureVector& features,
                                    const SourceModelSet& models,
                                    bool* degenerate = nullptr);

struct BlockDecision {
  int class_index = -1;  // -1 = no decision (all frames degenerate)
  std::vector<double> averaged_posterior;
};

/// Average of non-degenerate frame posteriors, argmax with lowest-index tie
/// breaking.  All frames degenerate -> no decision.
BlockDecision classify_block(const std::vector<SpectralFeatureVector>& frames,
                             const SourceModelSet& models);

}  // namespace casa
