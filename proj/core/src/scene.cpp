#include "casa/scene.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include "casa/errors.hpp"
#include "casa/rng.hpp"

namespace casa {

const std::string& rotation_policy_name(RotationPolicy p) {
  static const std::array<std::string, 3> names{"none", "random", "feedback"};
  return names[static_cast<int>(p)];
}

RotationPolicy rotation_policy_from_name(const std::string& name) {
  for (int i = 0; i < 3; ++i) {
    if (rotation_policy_name(static_cast<RotationPolicy>(i)) == name) {
      return static_cast<RotationPolicy>(i);
    }
  }
  throw ConfigError("unknown rotation policy: " + name);
}

void SceneConfig::validate(const FrontendConfig& frontend_cfg) const {
  if (sources.empty()) throw ConfigError("scene: no sources");
  for (std::size_t i = 0; i < sources.size(); ++i) {
    for (std::size_t j = i + 1; j < sources.size(); ++j) {
      if (sources[i].azimuth == sources[j].azimuth) {
        throw ConfigError("scene: source azimuths must be distinct");
      }
    }
  }
  const double block_len = frontend_cfg.frame_len * frontend_cfg.block_frames;
  const double blocks = duration / block_len;
  if (duration <= 0.0 || std::abs(blocks - std::round(blocks)) > 1e-9) {
    throw ConfigError("scene: duration must be a whole number of blocks");
  }
  if (look_min >= look_max) throw ConfigError("scene: bad rotation limits");
}

double random_rotation(double look_prev, std::mt19937_64& rng, double look_min,
                       double look_max) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  const double next = look_prev + deg_to_rad(1.0) * gauss(rng);
  return std::clamp(next, look_min, look_max);
}

double feedback_rotation(double look_prev, const VonMisesMixture& mix, double alpha,
                         double look_min, double look_max) {
  const int c = min_kappa_component(mix);
  const double next = look_prev + alpha * angle_diff(mix.means[c], look_prev);
  return std::clamp(next, look_min, look_max);
}

ScenePipeline::ScenePipeline(const GaussianAzimuthBank& bank,
                             const BinauralRenderer& renderer,
                             const SourceModelSet* models, EmOptions em_opts)
    : bank_(bank),
      renderer_(renderer),
      models_(models),
      em_opts_(em_opts),
      frontend_(bank.frontend_config) {}

void ScenePipeline::render_scene(const SceneConfig& scene,
                                 const std::vector<double>& look_per_block,
                                 std::vector<double>& left,
                                 std::vector<double>& right) const {
  const FrontendConfig& cfg = bank_.frontend_config;
  const auto block_n = static_cast<std::size_t>(cfg.block_samples());

  std::vector<std::vector<double>> signals;
  std::vector<SceneSource> sources;
  for (const auto& spec : scene.sources) {
    signals.push_back(synth_class_signal(spec.sound_class, scene.duration,
                                         cfg.sample_rate, spec.signal_seed));
    sources.push_back({signals.back(), spec.azimuth});
  }
  // signals vector must not reallocate after spans are taken
  for (std::size_t i = 0; i < sources.size(); ++i) sources[i].signal = signals[i];

  left.clear();
  right.clear();
  std::vector<double> bl, br;
  for (std::size_t b = 0; b < look_per_block.size(); ++b) {
    renderer_.render(sources, look_per_block[b], b * block_n, block_n, bl, br);
    left.insert(left.end(), bl.begin(), bl.end());
    right.insert(right.end(), br.begin(), br.end());
  }
}

SceneResult ScenePipeline::run(const SceneConfig& scene) const {
  const FrontendConfig& cfg = bank_.frontend_config;
  scene.validate(cfg);
  const auto block_n = static_cast<std::size_t>(cfg.block_samples());
  const int num_blocks = static_cast<int>(
      std::round(scene.duration / (cfg.frame_len * cfg.block_frames)));
  const int num_streams = static_cast<int>(scene.sources.size());

  SceneResult result;
  for (const auto& spec : scene.sources) {
    result.true_azimuths.push_back(wrap_angle(spec.azimuth));
    result.true_classes.push_back(static_cast<int>(spec.sound_class));
  }

  std::vector<std::vector<double>> signals;
  std::vector<SceneSource> sources(scene.sources.size());
  for (const auto& spec : scene.sources) {
    signals.push_back(synth_class_signal(spec.sound_class, scene.duration,
                                         cfg.sample_rate, spec.signal_seed));
  }
  for (std::size_t i = 0; i < sources.size(); ++i) {
    sources[i] = {signals[i], scene.sources[i].azimuth};
  }

  std::mt19937_64 rotation_rng(derive_seed(scene.seed, 0x726f74));
  ListenerState listener{scene.initial_look, scene.policy, scene.alpha,
                         scene.look_min, scene.look_max};

  std::vector<double> left, right;
  for (int b = 0; b < num_blocks; ++b) {
    BlockRecord record;
    record.index = b;
    record.look = listener.look;

    renderer_.render(sources, listener.look, static_cast<std::size_t>(b) * block_n,
                     block_n, left, right);
    const AuditoryBlock block = frontend_.process_block(left, right, listener.look);

    bool have_mixture = false;
    try {
      const AzimuthObservations obs = stack_block(block, bank_);
      const EmResult em = fit_mixture(obs.angles, num_streams,
                                      derive_seed(scene.seed, 0x656d00 + b), em_opts_);
      record.mixture = em.mix;
      record.loglik = em.loglik_trace.empty() ? 0.0 : em.loglik_trace.back();
      record.em_iterations = em.iterations;
      record.num_observations = obs.size();
      have_mixture = true;

      const SoftMaskSet masks = soft_masks(obs.angles, obs.index_map, record.mixture,
                                           block.num_frames, block.num_channels);
      record.streams.resize(num_streams);
      if (models_ != nullptr) {
        std::vector<double> masked_frame(block.num_channels);
        for (int c = 0; c < num_streams; ++c) {
          std::vector<SpectralFeatureVector> features(block.num_frames);
          for (int k = 0; k < block.num_frames; ++k) {
            for (int l = 0; l < block.num_channels; ++l) {
              masked_frame[l] = block.ratemap(k, l) * masks.at(k, l, c);
            }
            features[k] = spectral_features(masked_frame, block.center_freqs);
          }
          const BlockDecision decision = classify_block(features, *models_);
          record.streams[c].decided_class = decision.class_index;
          record.streams[c].averaged_posterior = decision.averaged_posterior;
        }
      }
    } catch (const EmptyBlockError&) {
      record.skipped = true;
    }

    // Rotation for the next block; feedback uses this block's mixture.
    switch (listener.policy) {
      case RotationPolicy::None:
        break;
      case RotationPolicy::Random:
        listener.look = random_rotation(listener.look, rotation_rng,
                                        listener.look_min, listener.look_max);
        break;
      case RotationPolicy::Feedback:
        if (have_mixture) {
          listener.look = feedback_rotation(listener.look, record.mixture,
                                            listener.alpha, listener.look_min,
                                            listener.look_max);
        }
        break;
    }
    result.blocks.push_back(std::move(record));
  }
  return result;
}

}  // namespace casa
