#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "casa/frontend.hpp"

namespace casa {

class BinauralRenderer;

/// One 2-D Gaussian over (ITD in ms, ILD in dB) with full covariance.
struct AzimuthModel {
  double mean_itd_ms = 0.0;
  double mean_ild_db = 0.0;
  double cov_tt = 0.0;  // var(itd)
  double cov_td = 0.0;  // cov(itd, ild)
  double cov_dd = 0.0;  // var(ild)

  // Cached by finalize().
  double inv_tt = 0.0, inv_td = 0.0, inv_dd = 0.0;
  double log_norm = 0.0;

  /// Applies the SPD floor and caches inverse and normalization.
  void finalize(double cov_floor);
  double log_pdf(double itd_ms, double ild_db) const;
};

struct GaussianAzimuthBank {
  std::vector<double> azimuth_grid;   // M angles, equidistant over [-pi, pi)
  int num_channels = 0;               // L
  std::vector<AzimuthModel> models;   // M*L, index m + M*l
  FrontendConfig frontend_config;
  std::uint64_t config_hash = 0;

  int grid_size() const { return static_cast<int>(azimuth_grid.size()); }
  const AzimuthModel& model(int m, int l) const {
    return models[static_cast<std::size_t>(l) * grid_size() + m];
  }
  AzimuthModel& model(int m, int l) {
    return models[static_cast<std::size_t>(l) * grid_size() + m];
  }

  void save(const std::string& path) const;
  static GaussianAzimuthBank load(const std::string& path);
};

struct LocalizationTrainConfig {
  int grid_size = 360;            // M, 1 degree steps
  double noise_duration = 10.0;   // seconds of white noise per azimuth
  std::uint64_t seed = 1;
  double cov_floor = 1e-6;        // minimum eigenvalue of each covariance
  int min_frames = 10;            // per (channel, azimuth) cell
  // Extra ITD standard deviation floor (ms) for channels whose carrier
  // period is shorter than the interaural delay range.  Cross-correlation
  // of narrowband content repeats every carrier period there, so a tonal
  // source can report a lag displaced by whole periods; widening the ITD
  // variance keeps the level cue decisive in those channels.  0 disables.
  double ambiguous_itd_sd_ms = 0.12;
  // Minimum ILD standard deviation (dB) for every cell.  Broadband training
  // noise can make a cell's level estimate arbitrarily tight, which lets a
  // chance level match at a wrong azimuth dominate the likelihood.
  double ild_sd_floor_db = 0.15;
};

/// Renders seeded white noise at every grid azimuth (look direction 0) and
/// fits one full-covariance Gaussian per (channel, azimuth) cell.
GaussianAzimuthBank train_bank(const BinauralRenderer& renderer,
                               const FrontendConfig& frontend_cfg,
                               const LocalizationTrainConfig& train_cfg);

/// Posterior over grid azimuths for one TF unit (uniform azimuth prior,
/// log-sum-exp normalized).  `degenerate` is set when every likelihood
/// underflows and the uniform fallback is returned.
std::vector<double> posterior_azimuth(const BinauralFeature& feature, int channel,
                                      const GaussianAzimuthBank& bank,
                                      bool* degenerate = nullptr);

/// Grid angle of the posterior maximum; ties pick the lowest index.
double ml_relative_azimuth(std::span<const double> posterior,
                           std::span<const double> azimuth_grid,
                           bool* tied = nullptr);

struct AzimuthObservations {
  std::vector<double> angles;                  // absolute azimuths, [-pi, pi)
  std::vector<std::pair<int, int>> index_map;  // (frame k, channel l) per entry

  std::size_t size() const { return angles.size(); }
};

/// Stacks per-unit absolute azimuth estimates of all valid TF units, frame
/// index fastest.  Throws EmptyBlockError when no unit is valid.
AzimuthObservations stack_block(const AuditoryBlock& block,
                                const GaussianAzimuthBank& bank);

/// FNV-1a hash of the serialized frontend configuration, stored with
/// trained artifacts so mismatched configs are detectable.
std::uint64_t frontend_config_hash(const FrontendConfig& cfg);

}  // namespace casa
