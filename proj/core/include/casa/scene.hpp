#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "casa/angles.hpp"
#include "casa/classifier.hpp"
#include "casa/localization.hpp"
#include "casa/renderer.hpp"
#include "casa/signals.hpp"
#include "casa/von_mises.hpp"

namespace casa {

enum class RotationPolicy { None = 0, Random, Feedback };

const std::string& rotation_policy_name(RotationPolicy p);
RotationPolicy rotation_policy_from_name(const std::string& name);

struct SceneSourceSpec {
  SoundClass sound_class = SoundClass::SpeechLike;
  double azimuth = 0.0;  // absolute, radians
  std::uint64_t signal_seed = 0;
};

struct SceneConfig {
  std::vector<SceneSourceSpec> sources;
  double duration = 3.0;  // seconds, a whole number of blocks
  double initial_look = deg_to_rad(90.0);
  double look_min = deg_to_rad(10.0);
  double look_max = deg_to_rad(170.0);
  RotationPolicy policy = RotationPolicy::None;
  double alpha = 5.0;  // feedback gain
  std::uint64_t seed = 0;

  void validate(const FrontendConfig& frontend_cfg) const;
};

struct ListenerState {
  double look = deg_to_rad(90.0);
  RotationPolicy policy = RotationPolicy::None;
  double alpha = 5.0;
  double look_min = deg_to_rad(10.0);
  double look_max = deg_to_rad(170.0);
};

/// One-degree-std random walk, clamped to the rotation limits.
double random_rotation(double look_prev, std::mt19937_64& rng, double look_min,
                       double look_max);

/// Turns toward the most uncertain (lowest kappa) source mean with gain
/// alpha; the angular difference is wrapped before scaling.
double feedback_rotation(double look_prev, const VonMisesMixture& mix, double alpha,
                         double look_min, double look_max);

struct StreamRecord {
  int decided_class = -1;  // -1 = no decision / classifier absent
  std::vector<double> averaged_posterior;
};

struct BlockRecord {
  int index = 0;
  double look = 0.0;  // head orientation during this block
  bool skipped = false;
  VonMisesMixture mixture;
  double loglik = 0.0;
  int em_iterations = 0;
  std::size_t num_observations = 0;
  std::vector<StreamRecord> streams;
};

struct SceneResult {
  std::vector<double> true_azimuths;
  std::vector<int> true_classes;
  std::vector<BlockRecord> blocks;
};

/// Closed-loop per-block pipeline: render -> front-end -> localization ->
/// von Mises EM -> soft masks -> masked spectral features -> classification
/// -> head rotation.
class ScenePipeline {
 public:
  ScenePipeline(const GaussianAzimuthBank& bank, const BinauralRenderer& renderer,
                const SourceModelSet* models = nullptr, EmOptions em_opts = {});

  SceneResult run(const SceneConfig& scene) const;

  /// The rendered ear signals for a whole scene with a fixed or scripted
  /// orientation trajectory (one entry per block); debugging aid.
  void render_scene(const SceneConfig& scene, const std::vector<double>& look_per_block,
                    std::vector<double>& left, std::vector<double>& right) const;

  const AuditoryFrontend& frontend() const { return frontend_; }

 private:
  const GaussianAzimuthBank& bank_;
  const BinauralRenderer& renderer_;
  const SourceModelSet* models_;
  EmOptions em_opts_;
  AuditoryFrontend frontend_;
};

}  // namespace casa
