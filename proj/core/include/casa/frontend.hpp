#pragma once

#include <array>
#include <span>
#include <vector>

#include "casa/gammatone.hpp"

namespace casa {

struct FrontendConfig {
  double sample_rate = 44100.0;
  int num_channels = 64;
  double f_low = 80.0;
  double f_high = 8000.0;
  double frame_len = 0.020;     // seconds, non-overlapping rectangular
  double ratemap_tau = 0.008;   // leaky integrator time constant, seconds
  int block_frames = 25;        // K; 25 * 20 ms = 0.5 s blocks
  double energy_floor = 1e-8;   // relative to the block's max TF-unit energy
  double itd_max_lag = 0.0011;  // seconds
  double ihc_cutoff = 1000.0;   // IHC low-pass cutoff, Hz
  bool itd_refine = false;      // parabolic sub-sample peak interpolation
  // A cross-correlation function with a secondary local maximum above this
  // fraction of the global peak (at a different lag) does not identify a
  // unique delay; the unit's ITD is flagged ambiguous and excluded from
  // azimuth stacking.  Narrowband content in channels whose carrier period
  // is shorter than the lag window produces exactly such periodic peaks.
  // 0 disables the gate.
  double itd_ambiguity_ratio = 0.0;
  // When the level difference is decisive (|ILD| above this many dB) but the
  // correlation lag disagrees with it in sign, the lag is almost certainly
  // aliased by a carrier period: the unit's ITD is flagged ambiguous.  The
  // rendering head never produces opposite-sign cue pairs.  0 disables.
  double itd_ild_sign_gate_db = 0.0;
  // Units where two sources contribute comparable energy decorrelate the
  // two ears: the peak of the normalized cross-correlation drops well below
  // 1 and its lag describes neither source.  Units whose peak correlation
  // falls below this floor are flagged ambiguous.  0 disables.
  double itd_coherence_floor = 0.0;

  int frame_samples() const { return static_cast<int>(frame_len * sample_rate + 0.5); }
  int block_samples() const { return frame_samples() * block_frames; }
  int max_lag_samples() const { return static_cast<int>(itd_max_lag * sample_rate); }

  /// Throws ConfigError when an invariant is violated.
  void validate() const;
};

struct BinauralFeature {
  double itd = 0.0;  // seconds; positive when the left signal leads
  double ild = 0.0;  // dB, 10*log10(E_left / E_right)
  bool valid = false;
  bool itd_ambiguous = false;  // cross-correlation peak not unique
};

struct SpectralFeatureVector {
  double centroid = 0.0;  // Hz
  double spread = 0.0;    // Hz
  double skewness = 0.0;
  double kurtosis = 0.0;
  double flatness = 0.0;  // [0, 1]
  double crest = 0.0;     // >= 1 for a nonzero frame
  double entropy = 0.0;   // [0, 1], normalized by log L
  bool degenerate = false;

  std::array<double, 7> as_array() const {
    return {centroid, spread, skewness, kurtosis, flatness, crest, entropy};
  }
};

struct AuditoryBlock {
  int num_frames = 0;    // K
  int num_channels = 0;  // L
  std::vector<BinauralFeature> features;  // K*L, index k + K*l
  std::vector<double> ratemaps;           // K*L, left/right average
  std::vector<double> center_freqs;       // Hz
  double head_orientation = 0.0;          // psi at block start, radians

  BinauralFeature& feature(int k, int l) {
    return features[static_cast<std::size_t>(l) * num_frames + k];
  }
  const BinauralFeature& feature(int k, int l) const {
    return features[static_cast<std::size_t>(l) * num_frames + k];
  }
  double& ratemap(int k, int l) {
    return ratemaps[static_cast<std::size_t>(l) * num_frames + k];
  }
  double ratemap(int k, int l) const {
    return ratemaps[static_cast<std::size_t>(l) * num_frames + k];
  }
};

/// Half-wave rectification followed by a 2nd-order low-pass (inner hair
/// cell model).  Output is nonnegative.
std::vector<double> ihc_envelope(std::span<const double> channel_signal,
                                 double sample_rate, double cutoff_hz = 1000.0);

/// Lag (seconds) maximizing the normalized interaural cross-correlation
/// within +-max_lag samples.  Ties pick the smallest |lag|.  Positive
/// values mean the left signal leads.  With ambiguity_ratio > 0, a
/// secondary local maximum above that fraction of the peak sets
/// *ambiguous (periodic correlation, no unique delay).
double extract_itd(std::span<const double> left, std::span<const double> right,
                   double sample_rate, int max_lag, bool refine = false,
                   double ambiguity_ratio = 0.0, bool* ambiguous = nullptr,
                   double* peak_corr = nullptr);

/// 10*log10(E_left / E_right) of the IHC frame energies.
double extract_ild(std::span<const double> left, std::span<const double> right);

/// Leaky integration (time constant tau) followed by per-frame means.
std::vector<double> compute_ratemap(std::span<const double> ihc_signal,
                                    double sample_rate, double tau,
                                    int frame_samples);

/// The 7 spectral attributes of one (masked) ratemap frame.  An all-zero
/// frame returns the documented fallback and sets `degenerate`.
SpectralFeatureVector spectral_features(std::span<const double> ratemap_frame,
                                        std::span<const double> center_freqs);

class AuditoryFrontend {
 public:
  explicit AuditoryFrontend(const FrontendConfig& cfg);

  const FrontendConfig& config() const { return cfg_; }
  const GammatoneBank& bank() const { return bank_; }

  /// Processes exactly one block (K frames) of stereo input.  Input length
  /// must be at least block_samples(); extra samples are ignored.
  AuditoryBlock process_block(std::span<const double> left,
                              std::span<const double> right,
                              double head_orientation = 0.0) const;

  /// Partitions the signal into non-overlapping blocks (remainder dropped).
  std::vector<AuditoryBlock> process(std::span<const double> left,
                                     std::span<const double> right,
                                     double head_orientation = 0.0) const;

 private:
  FrontendConfig cfg_;
  GammatoneBank bank_;
};

}  // namespace casa
