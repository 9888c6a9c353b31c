#include "casa/evaluation.hpp"

#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

#include <json.hpp>

#include "casa/errors.hpp"
#include "casa/metrics.hpp"
#include "casa/rng.hpp"

namespace casa {
namespace {

std::uint64_t pool_file_seed(std::uint64_t master_seed, int sound_class, int file_idx) {
  return derive_seed(master_seed, 0xf00d0000ULL + sound_class * 4096 + file_idx);
}

struct CellAccum {
  double sq_err_sum = 0.0;  // wrapped squared errors, radians^2
  std::size_t err_count = 0;
  std::size_t wrong = 0;
  std::size_t decisions = 0;
  int skipped = 0;

  double rmse_deg() const {
    return err_count == 0 ? 0.0 : rad_to_deg(std::sqrt(sq_err_sum / err_count));
  }
  double error_pct() const {
    return decisions == 0 ? 0.0 : 100.0 * wrong / static_cast<double>(decisions);
  }
};

// Stream decisions index the model set (label-sorted), while scene truth
// carries SoundClass values; model_to_class bridges the two orderings.
void score_scene(const SceneResult& scene, const std::vector<int>& model_to_class,
                 CellAccum& acc) {
  for (const auto& block : scene.blocks) {
    if (block.skipped) {
      ++acc.skipped;
      continue;
    }
    const auto perm = match_streams(block.mixture.means, scene.true_azimuths);
    for (std::size_t i = 0; i < perm.size(); ++i) {
      const double e = angle_diff(block.mixture.means[perm[i]], scene.true_azimuths[i]);
      acc.sq_err_sum += e * e;
      ++acc.err_count;
      if (!block.streams.empty()) {
        ++acc.decisions;
        const int decided = block.streams[perm[i]].decided_class;
        const int decided_class = decided < 0 ? -1 : model_to_class[decided];
        if (decided_class != scene.true_classes[i]) ++acc.wrong;
      }
    }
  }
}

}  // namespace

void EvalConfig::validate() const {
  if (folds < 1 || scenes_per_fold < 1) throw ConfigError("evaluation: bad fold setup");
  if (files_per_class < folds) {
    throw ConfigError("evaluation: need at least one pool file per class and fold");
  }
  for (int n : scenarios) {
    if (n < 1 || n > static_cast<int>(scene_azimuth_slots().size())) {
      throw ConfigError("evaluation: scenario source count out of range");
    }
  }
}

const std::vector<double>& scene_azimuth_slots() {
  static const std::vector<double> slots{deg_to_rad(30.0), deg_to_rad(70.0),
                                         deg_to_rad(110.0), deg_to_rad(150.0)};
  return slots;
}

Eigen::MatrixXd monaural_feature_frames(const AuditoryFrontend& frontend,
                                        std::span<const double> signal) {
  std::vector<std::array<double, 7>> rows;
  std::vector<double> frame(frontend.config().num_channels);
  for (const auto& block : frontend.process(signal, signal)) {
    for (int k = 0; k < block.num_frames; ++k) {
      for (int l = 0; l < block.num_channels; ++l) frame[l] = block.ratemap(k, l);
      const auto v = spectral_features(frame, block.center_freqs);
      if (!v.degenerate) rows.push_back(v.as_array());
    }
  }
  Eigen::MatrixXd out(rows.size(), 7);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (int j = 0; j < 7; ++j) out(i, j) = rows[i][j];
  }
  return out;
}

EvaluationReport run_evaluation(const EvalConfig& cfg, const GaussianAzimuthBank& bank,
                                const BinauralRenderer& renderer) {
  cfg.validate();
  const AuditoryFrontend frontend(bank.frontend_config);
  const auto& slots = scene_azimuth_slots();

  EvaluationReport report;
  report.master_seed = cfg.master_seed;
  report.config_hash = bank.config_hash;
  report.folds = cfg.folds;
  report.scenes_per_fold = cfg.scenes_per_fold;

  struct Key {
    int scenario;
    RotationPolicy policy;
  };
  std::vector<Key> keys;
  for (int n : cfg.scenarios) {
    for (RotationPolicy p : cfg.policies) keys.push_back({n, p});
  }
  std::vector<CellAccum> totals(keys.size());
  std::vector<std::vector<double>> fold_rmse(keys.size()), fold_err(keys.size());

  for (int fold = 0; fold < cfg.folds; ++fold) {
    // Train classifiers on the train split of the pool.
    std::map<std::string, Eigen::MatrixXd> frames;
    for (int c = 0; c < kNumSoundClasses; ++c) {
      std::vector<Eigen::MatrixXd> parts;
      std::size_t total_rows = 0;
      for (int f = 0; f < cfg.files_per_class; ++f) {
        if (f % cfg.folds == fold) continue;  // held out for testing
        const auto signal = synth_class_signal(
            static_cast<SoundClass>(c), cfg.file_duration,
            bank.frontend_config.sample_rate, pool_file_seed(cfg.master_seed, c, f));
        parts.push_back(monaural_feature_frames(frontend, signal));
        total_rows += parts.back().rows();
      }
      Eigen::MatrixXd all(total_rows, 7);
      std::size_t at = 0;
      for (const auto& p : parts) {
        all.middleRows(at, p.rows()) = p;
        at += p.rows();
      }
      frames[sound_class_name(static_cast<SoundClass>(c))] = std::move(all);
    }
    ClassifierTrainConfig clf_cfg = cfg.classifier;
    clf_cfg.seed = derive_seed(cfg.master_seed, 0xc1f00000ULL + fold);
    const SourceModelSet models = train_source_models(frames, clf_cfg);
    std::vector<int> model_to_class(models.num_classes());
    for (int s = 0; s < models.num_classes(); ++s) {
      model_to_class[s] = static_cast<int>(sound_class_from_name(models.models[s].label));
    }

    const ScenePipeline pipeline(bank, renderer, &models, cfg.em);

    for (std::size_t key_idx = 0; key_idx < keys.size(); ++key_idx) {
      CellAccum fold_acc;
      for (int s = 0; s < cfg.scenes_per_fold; ++s) {
        const std::uint64_t scene_seed = derive_seed(
            cfg.master_seed,
            0x5ce00000ULL + ((fold * 100 + static_cast<int>(key_idx)) * 1000 + s));
        std::mt19937_64 rng(scene_seed);

        SceneConfig scene;
        scene.policy = keys[key_idx].policy;
        scene.alpha = cfg.alpha;
        scene.duration = cfg.scene_duration;
        scene.seed = scene_seed;

        // Distinct random slots, random classes drawn from the test split.
        std::vector<int> slot_idx(slots.size());
        for (std::size_t i = 0; i < slots.size(); ++i) slot_idx[i] = static_cast<int>(i);
        for (int i = 0; i < keys[key_idx].scenario; ++i) {
          std::uniform_int_distribution<int> pick(i, static_cast<int>(slots.size()) - 1);
          std::swap(slot_idx[i], slot_idx[pick(rng)]);
        }
        for (int i = 0; i < keys[key_idx].scenario; ++i) {
          std::uniform_int_distribution<int> pick_class(0, kNumSoundClasses - 1);
          const int sound_class = pick_class(rng);
          std::vector<int> test_files;
          for (int f = 0; f < cfg.files_per_class; ++f) {
            if (f % cfg.folds == fold) test_files.push_back(f);
          }
          std::uniform_int_distribution<int> pick_file(
              0, static_cast<int>(test_files.size()) - 1);
          const std::uint64_t file_seed =
              pool_file_seed(cfg.master_seed, sound_class, test_files[pick_file(rng)]);
          SceneSourceSpec spec;
          spec.sound_class = static_cast<SoundClass>(sound_class);
          spec.azimuth = slots[slot_idx[i]];
          spec.signal_seed = derive_seed(file_seed, scene_seed);
          scene.sources.push_back(spec);
        }

        const SceneResult result = pipeline.run(scene);
        score_scene(result, model_to_class, fold_acc);
        score_scene(result, model_to_class, totals[key_idx]);
      }
      fold_rmse[key_idx].push_back(fold_acc.rmse_deg());
      fold_err[key_idx].push_back(fold_acc.error_pct());
    }
  }

  for (std::size_t key_idx = 0; key_idx < keys.size(); ++key_idx) {
    CellResult cell;
    cell.num_sources = keys[key_idx].scenario;
    cell.policy = keys[key_idx].policy;
    cell.rmse_deg = totals[key_idx].rmse_deg();
    cell.classification_error_pct = totals[key_idx].error_pct();
    cell.skipped_blocks = totals[key_idx].skipped;
    cell.fold_rmse_deg = fold_rmse[key_idx];
    cell.fold_error_pct = fold_err[key_idx];
    report.cells.push_back(std::move(cell));
  }
  return report;
}

const CellResult& EvaluationReport::cell(int num_sources, RotationPolicy policy) const {
  for (const auto& c : cells) {
    if (c.num_sources == num_sources && c.policy == policy) return c;
  }
  throw ConfigError("evaluation report: no such cell");
}

std::string EvaluationReport::to_json_string() const {
  nlohmann::json j;
  j["format"] = "casa-evaluation-report";
  j["version"] = 1;
  j["master_seed"] = master_seed;
  j["config_hash"] = config_hash;
  j["folds"] = folds;
  j["scenes_per_fold"] = scenes_per_fold;
  auto& jc = j["cells"];
  jc = nlohmann::json::array();
  for (const auto& c : cells) {
    nlohmann::json e;
    e["num_sources"] = c.num_sources;
    e["policy"] = rotation_policy_name(c.policy);
    e["rmse_deg"] = c.rmse_deg;
    e["classification_error_pct"] = c.classification_error_pct;
    e["skipped_blocks"] = c.skipped_blocks;
    e["fold_rmse_deg"] = c.fold_rmse_deg;
    e["fold_error_pct"] = c.fold_error_pct;
    jc.push_back(std::move(e));
  }
  return j.dump(2);
}

std::string EvaluationReport::to_csv() const {
  std::ostringstream os;
  os << "num_sources,policy,localization_rmse_deg,classification_error_pct\n";
  for (const auto& c : cells) {
    os << c.num_sources << ',' << rotation_policy_name(c.policy) << ','
       << c.rmse_deg << ',' << c.classification_error_pct << '\n';
  }
  return os.str();
}

void EvaluationReport::save(const std::string& json_path,
                            const std::string& csv_path) const {
  std::ofstream js(json_path);
  if (!js) throw IoError("cannot write report: " + json_path);
  js << to_json_string();
  if (!csv_path.empty()) {
    std::ofstream cs(csv_path);
    if (!cs) throw IoError("cannot write report: " + csv_path);
    cs << to_csv();
  }
}

}  // namespace casa
