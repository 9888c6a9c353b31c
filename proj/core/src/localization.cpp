#include "casa/localization.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <random>
#include <sstream>

#include <json.hpp>

#include "casa/angles.hpp"
#include "casa/errors.hpp"
#include "casa/renderer.hpp"
#include "casa/rng.hpp"

namespace casa {
namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr double kItdToMs = 1e3;  // bank models operate on ITD in milliseconds

}  // namespace

void AzimuthModel::finalize(double cov_floor) {
  // Lift the smallest eigenvalue of the 2x2 covariance to the floor.
  const double mid = 0.5 * (cov_tt + cov_dd);
  const double rad = std::hypot(0.5 * (cov_tt - cov_dd), cov_td);
  const double min_eig = mid - rad;
  if (min_eig < cov_floor) {
    const double lift = cov_floor - min_eig;
    cov_tt += lift;
    cov_dd += lift;
  }
  const double det = cov_tt * cov_dd - cov_td * cov_td;
  inv_tt = cov_dd / det;
  inv_dd = cov_tt / det;
  inv_td = -cov_td / det;
  log_norm = -std::log(kTwoPi) - 0.5 * std::log(det);
}

double AzimuthModel::log_pdf(double itd_ms, double ild_db) const {
  const double dt = itd_ms - mean_itd_ms;
  const double dd = ild_db - mean_ild_db;
  return log_norm - 0.5 * (dt * dt * inv_tt + 2.0 * dt * dd * inv_td + dd * dd * inv_dd);
}

std::uint64_t frontend_config_hash(const FrontendConfig& cfg) {
  std::ostringstream os;
  os << cfg.sample_rate << '|' << cfg.num_channels << '|' << cfg.f_low << '|'
     << cfg.f_high << '|' << cfg.frame_len << '|' << cfg.ratemap_tau << '|'
     << cfg.block_frames << '|' << cfg.energy_floor << '|' << cfg.itd_max_lag << '|'
     << cfg.ihc_cutoff << '|' << cfg.itd_refine << '|' << cfg.itd_ambiguity_ratio
     << '|' << cfg.itd_ild_sign_gate_db << '|' << cfg.itd_coherence_floor;
  const std::string s = os.str();
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

GaussianAzimuthBank train_bank(const BinauralRenderer& renderer,
                               const FrontendConfig& frontend_cfg,
                               const LocalizationTrainConfig& train_cfg) {
  frontend_cfg.validate();
  if (train_cfg.grid_size < 2) throw ConfigError("train_bank: grid_size must be >= 2");

  const AuditoryFrontend frontend(frontend_cfg);
  const int grid = train_cfg.grid_size;
  const int num_ch = frontend_cfg.num_channels;

  GaussianAzimuthBank bank;
  bank.frontend_config = frontend_cfg;
  bank.config_hash = frontend_config_hash(frontend_cfg);
  bank.num_channels = num_ch;
  bank.azimuth_grid.resize(grid);
  for (int m = 0; m < grid; ++m) bank.azimuth_grid[m] = -kPi + kTwoPi * m / grid;
  bank.models.resize(static_cast<std::size_t>(grid) * num_ch);

  const auto num_samples =
      static_cast<std::size_t>(train_cfg.noise_duration * frontend_cfg.sample_rate);
  std::vector<double> noise(num_samples);
  std::vector<double> left, right;

  struct Accum {
    double st = 0, sd = 0, stt = 0, std_ = 0, sdd = 0;
    int n = 0;
  };

  for (int m = 0; m < grid; ++m) {
    std::mt19937_64 rng(derive_seed(train_cfg.seed, m));
    std::normal_distribution<double> gauss(0.0, 0.2);
    for (auto& s : noise) s = gauss(rng);

    const SceneSource source{noise, bank.azimuth_grid[m]};
    renderer.render({&source, 1}, 0.0, 0, num_samples, left, right);

    std::vector<Accum> acc(num_ch);
    for (const auto& block : frontend.process(left, right)) {
      for (int l = 0; l < num_ch; ++l) {
        for (int k = 0; k < block.num_frames; ++k) {
          const auto& f = block.feature(k, l);
          if (!f.valid || f.itd_ambiguous) continue;
          const double t = f.itd * kItdToMs;
          auto& a = acc[l];
          a.st += t;
          a.sd += f.ild;
          a.stt += t * t;
          a.std_ += t * f.ild;
          a.sdd += f.ild * f.ild;
          ++a.n;
        }
      }
    }
    for (int l = 0; l < num_ch; ++l) {
      const auto& a = acc[l];
      if (a.n < train_cfg.min_frames) {
        throw TrainingError("train_bank: only " + std::to_string(a.n) +
                            " valid frames for channel " + std::to_string(l) +
                            ", azimuth index " + std::to_string(m));
      }
      auto& model = bank.model(m, l);
      model.mean_itd_ms = a.st / a.n;
      model.mean_ild_db = a.sd / a.n;
      model.cov_tt = a.stt / a.n - model.mean_itd_ms * model.mean_itd_ms;
      model.cov_td = a.std_ / a.n - model.mean_itd_ms * model.mean_ild_db;
      model.cov_dd = a.sdd / a.n - model.mean_ild_db * model.mean_ild_db;
      const double dd_floor = train_cfg.ild_sd_floor_db * train_cfg.ild_sd_floor_db;
      model.cov_dd = std::max(model.cov_dd, dd_floor);
      model.finalize(train_cfg.cov_floor);
    }
  }

  if (train_cfg.ambiguous_itd_sd_ms > 0.0) {
    // The broadband training noise yields very tight ITD estimates even in
    // high-frequency channels, but at test time any narrowband source there
    // can alias its lag by a whole carrier period.  Channels whose period is
    // shorter than the full interaural delay span get the wider floor.
    const auto& freqs = frontend.bank().center_freqs();
    for (int l = 0; l < num_ch; ++l) {
      double span_ms = 0.0;
      for (int m = 0; m < grid; ++m)
        span_ms = std::max(span_ms, std::abs(bank.model(m, l).mean_itd_ms));
      span_ms *= 2.0;
      if (freqs[l] <= 0.0) continue;
      const double period_ms = kItdToMs / freqs[l];
      if (period_ms >= span_ms) continue;
      // A displacement of one carrier period should cost a bounded number of
      // standard deviations, so the floor grows with the period.
      const double sd = std::max(train_cfg.ambiguous_itd_sd_ms, period_ms / 4.0);
      const double var_floor = sd * sd;
      for (int m = 0; m < grid; ++m) {
        auto& model = bank.model(m, l);
        if (model.cov_tt < var_floor) {
          model.cov_tt = var_floor;
          model.finalize(train_cfg.cov_floor);
        }
      }
    }
  }
  return bank;
}

std::vector<double> posterior_azimuth(const BinauralFeature& feature, int channel,
                                      const GaussianAzimuthBank& bank,
                                      bool* degenerate) {
  const int grid = bank.grid_size();
  std::vector<double> post(grid);
  const double itd_ms = feature.itd * kItdToMs;
  double max_log = kNegInf;
  for (int m = 0; m < grid; ++m) {
    post[m] = bank.model(m, channel).log_pdf(itd_ms, feature.ild);
    max_log = std::max(max_log, post[m]);
  }
  if (!std::isfinite(max_log)) {
    if (degenerate) *degenerate = true;
    std::fill(post.begin(), post.end(), 1.0 / grid);
    return post;
  }
  if (degenerate) *degenerate = false;
  double sum = 0.0;
  for (double& p : post) {
    p = std::exp(p - max_log);
    sum += p;
  }
  for (double& p : post) p /= sum;
  return post;
}

double ml_relative_azimuth(std::span<const double> posterior,
                           std::span<const double> azimuth_grid, bool* tied) {
  int best = 0;
  for (std::size_t m = 1; m < posterior.size(); ++m) {
    if (posterior[m] > posterior[best]) best = static_cast<int>(m);
  }
  if (tied) {
    *tied = false;
    for (std::size_t m = 0; m < posterior.size(); ++m) {
      if (static_cast<int>(m) != best && posterior[m] == posterior[best]) {
        *tied = true;
        break;
      }
    }
  }
  return azimuth_grid[best];
}

AzimuthObservations stack_block(const AuditoryBlock& block,
                                const GaussianAzimuthBank& bank) {
  AzimuthObservations obs;
  // Eq.-style stacking order: frame index fastest within each channel.
  for (int l = 0; l < block.num_channels; ++l) {
    for (int k = 0; k < block.num_frames; ++k) {
      const auto& f = block.feature(k, l);
      if (!f.valid || f.itd_ambiguous) continue;
      bool degenerate = false;
      const auto post = posterior_azimuth(f, l, bank, &degenerate);
      // A unit whose likelihood underflows at every grid angle carries no
      // azimuth information; keeping the uniform fallback would pile such
      // units onto one arbitrary grid point via the argmax tie-break.
      if (degenerate) continue;
      const double rel = ml_relative_azimuth(post, bank.azimuth_grid);
      obs.angles.push_back(to_absolute(rel, block.head_orientation));
      obs.index_map.emplace_back(k, l);
    }
  }
  if (obs.angles.empty()) throw EmptyBlockError("stack_block: no valid TF units");
  return obs;
}

void GaussianAzimuthBank::save(const std::string& path) const {
  nlohmann::json j;
  j["format"] = "casa-azimuth-bank";
  j["version"] = 1;
  j["config_hash"] = config_hash;
  j["num_channels"] = num_channels;
  j["azimuth_grid"] = azimuth_grid;
  auto& fc = j["frontend_config"];
  fc["sample_rate"] = frontend_config.sample_rate;
  fc["num_channels"] = frontend_config.num_channels;
  fc["f_low"] = frontend_config.f_low;
  fc["f_high"] = frontend_config.f_high;
  fc["frame_len"] = frontend_config.frame_len;
  fc["ratemap_tau"] = frontend_config.ratemap_tau;
  fc["block_frames"] = frontend_config.block_frames;
  fc["energy_floor"] = frontend_config.energy_floor;
  fc["itd_max_lag"] = frontend_config.itd_max_lag;
  fc["ihc_cutoff"] = frontend_config.ihc_cutoff;
  fc["itd_refine"] = frontend_config.itd_refine;
  fc["itd_ambiguity_ratio"] = frontend_config.itd_ambiguity_ratio;
  fc["itd_ild_sign_gate_db"] = frontend_config.itd_ild_sign_gate_db;
  fc["itd_coherence_floor"] = frontend_config.itd_coherence_floor;
  auto& jm = j["models"];
  jm = nlohmann::json::array();
  for (const auto& m : models) {
    jm.push_back({m.mean_itd_ms, m.mean_ild_db, m.cov_tt, m.cov_td, m.cov_dd});
  }
  std::ofstream os(path);
  if (!os) throw IoError("cannot write bank file: " + path);
  os << j.dump();
}

GaussianAzimuthBank GaussianAzimuthBank::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open bank file: " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw IoError("malformed bank file: " + path + ": " + e.what());
  }
  if (j.value("format", "") != "casa-azimuth-bank") {
    throw IoError("not an azimuth bank file: " + path);
  }

  GaussianAzimuthBank bank;
  bank.config_hash = j.at("config_hash").get<std::uint64_t>();
  bank.num_channels = j.at("num_channels").get<int>();
  bank.azimuth_grid = j.at("azimuth_grid").get<std::vector<double>>();
  const auto& fc = j.at("frontend_config");
  bank.frontend_config.sample_rate = fc.at("sample_rate");
  bank.frontend_config.num_channels = fc.at("num_channels");
  bank.frontend_config.f_low = fc.at("f_low");
  bank.frontend_config.f_high = fc.at("f_high");
  bank.frontend_config.frame_len = fc.at("frame_len");
  bank.frontend_config.ratemap_tau = fc.at("ratemap_tau");
  bank.frontend_config.block_frames = fc.at("block_frames");
  bank.frontend_config.energy_floor = fc.at("energy_floor");
  bank.frontend_config.itd_max_lag = fc.at("itd_max_lag");
  bank.frontend_config.itd_refine = fc.value("itd_refine", false);
  bank.frontend_config.itd_ambiguity_ratio = fc.value("itd_ambiguity_ratio", 0.0);
  bank.frontend_config.itd_ild_sign_gate_db = fc.value("itd_ild_sign_gate_db", 0.0);
  bank.frontend_config.itd_coherence_floor = fc.value("itd_coherence_floor", 0.0);
  bank.frontend_config.ihc_cutoff = fc.at("ihc_cutoff");
  for (const auto& row : j.at("models")) {
    AzimuthModel m;
    m.mean_itd_ms = row.at(0);
    m.mean_ild_db = row.at(1);
    m.cov_tt = row.at(2);
    m.cov_td = row.at(3);
    m.cov_dd = row.at(4);
    m.finalize(0.0);  // stored covariances already carry the training floor
    bank.models.push_back(m);
  }
  if (static_cast<int>(bank.models.size()) !=
      bank.grid_size() * bank.num_channels) {
    throw IoError("bank model count mismatch: " + path);
  }
  return bank;
}

}  // namespace casa
