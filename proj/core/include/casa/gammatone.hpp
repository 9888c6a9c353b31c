#pragma once

#include <complex>
#include <span>
#include <vector>

namespace casa {

struct FrontendConfig;

/// Glasberg-Moore ERB-rate scale.
double erb_rate(double freq_hz);
double erb_rate_inverse(double erb);
double erb_bandwidth(double freq_hz);

/// 4th-order gammatone filterbank realized as a cascade of four complex
/// one-pole resonators per channel, with per-channel delay and fine
/// structure phase compensation so the impulse-response envelope maxima
/// align across channels.
class GammatoneBank {
 public:
  static GammatoneBank design(const FrontendConfig& cfg);

  int num_channels() const { return static_cast<int>(channels_.size()); }
  const std::vector<double>& center_freqs() const { return center_freqs_; }

  /// Phase-compensated real output, same length as the input.
  std::vector<double> filter_channel(int l, std::span<const double> x) const;

  /// Complex (analytic-like) output before delay compensation; the channel
  /// envelope is its magnitude.
  std::vector<std::complex<double>> filter_channel_complex(
      int l, std::span<const double> x) const;

  int delay_samples(int l) const { return channels_[l].delay_samples; }
  double envelope_peak_seconds(int l) const { return channels_[l].envelope_peak; }

 private:
  struct Channel {
    double center_freq = 0.0;
    std::complex<double> pole;
    double stage_gain = 0.0;        // (1 - |pole|) per stage
    double envelope_peak = 0.0;     // seconds
    int delay_samples = 0;          // alignment to the slowest channel
    std::complex<double> phase_correction;
  };

  std::vector<Channel> channels_;
  std::vector<double> center_freqs_;
};

}  // namespace casa
