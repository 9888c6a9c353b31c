#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "casa/scene.hpp"

namespace casa {

struct EvalConfig {
  int folds = 10;
  int scenes_per_fold = 30;
  std::vector<int> scenarios = {2, 3, 4};  // active sources per scene
  std::vector<RotationPolicy> policies = {RotationPolicy::None, RotationPolicy::Random,
                                          RotationPolicy::Feedback};
  std::uint64_t master_seed = 1;
  double scene_duration = 3.0;
  double alpha = 5.0;
  int files_per_class = 10;   // synthetic pool size per class
  double file_duration = 8.0; // seconds per pool entry
  ClassifierTrainConfig classifier;
  EmOptions em;

  void validate() const;
};

struct CellResult {
  int num_sources = 0;
  RotationPolicy policy = RotationPolicy::None;
  double rmse_deg = 0.0;                 // cumulative: pooled over blocks+sources
  double classification_error_pct = 0.0;
  int skipped_blocks = 0;
  std::vector<double> fold_rmse_deg;
  std::vector<double> fold_error_pct;
};

struct EvaluationReport {
  std::uint64_t master_seed = 0;
  std::uint64_t config_hash = 0;
  int folds = 0;
  int scenes_per_fold = 0;
  std::vector<CellResult> cells;

  const CellResult& cell(int num_sources, RotationPolicy policy) const;
  std::string to_json_string() const;
  std::string to_csv() const;  // one row per scenario x policy, Table-style
  void save(const std::string& json_path, const std::string& csv_path = "") const;
};

/// Full cross-validated protocol: per fold, train classifiers on the train
/// split of the synthetic pool, then run seeded scenes per scenario and
/// policy and aggregate circular RMSE and classification error.
EvaluationReport run_evaluation(const EvalConfig& cfg, const GaussianAzimuthBank& bank,
                                const BinauralRenderer& renderer);

/// Spectral-feature frames (degenerate frames dropped) of a mono signal
/// presented diotically; the classifier training path.
Eigen::MatrixXd monaural_feature_frames(const AuditoryFrontend& frontend,
                                        std::span<const double> signal);

/// The four loudspeaker slots of the evaluation layout, radians.
const std::vector<double>& scene_azimuth_slots();

}  // namespace casa
