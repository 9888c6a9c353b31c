#include "casa/gammatone.hpp"

#include <algorithm>
#include <cmath>

#include "casa/angles.hpp"
#include "casa/errors.hpp"
#include "casa/frontend.hpp"

namespace casa {

double erb_rate(double freq_hz) {
  return 21.4 * std::log10(1.0 + 0.00437 * freq_hz);
}

double erb_rate_inverse(double erb) {
  return (std::pow(10.0, erb / 21.4) - 1.0) / 0.00437;
}

double erb_bandwidth(double freq_hz) { return 24.7 * (1.0 + 0.00437 * freq_hz); }

GammatoneBank GammatoneBank::design(const FrontendConfig& cfg) {
  cfg.validate();

  GammatoneBank bank;
  const int num_ch = cfg.num_channels;
  const double e_low = erb_rate(cfg.f_low);
  const double e_high = erb_rate(cfg.f_high);

  bank.channels_.resize(num_ch);
  bank.center_freqs_.resize(num_ch);
  double max_peak = 0.0;
  for (int l = 0; l < num_ch; ++l) {
    const double e = e_low + (e_high - e_low) * l / (num_ch - 1);
    const double fc = erb_rate_inverse(e);
    const double bw = 1.019 * erb_bandwidth(fc);  // gammatone decay, Hz
    auto& ch = bank.channels_[l];
    ch.center_freq = fc;
    const double lambda = std::exp(-kTwoPi * bw / cfg.sample_rate);
    ch.pole = std::polar(lambda, kTwoPi * fc / cfg.sample_rate);
    ch.stage_gain = 1.0 - lambda;
    // Envelope t^3 exp(-2 pi bw t) peaks at t = 3 / (2 pi bw).
    ch.envelope_peak = 3.0 / (kTwoPi * bw);
    max_peak = std::max(max_peak, ch.envelope_peak);
    bank.center_freqs_[l] = fc;
  }
  for (int l = 0; l < num_ch; ++l) {
    auto& ch = bank.channels_[l];
    ch.delay_samples =
        static_cast<int>(std::lround((max_peak - ch.envelope_peak) * cfg.sample_rate));
    // Rotate the fine structure so it peaks at the envelope maximum.
    ch.phase_correction = std::polar(1.0, -kTwoPi * ch.center_freq * ch.envelope_peak);
  }
  return bank;
}

std::vector<std::complex<double>> GammatoneBank::filter_channel_complex(
    int l, std::span<const double> x) const {
  const auto& ch = channels_[l];
  const std::complex<double> a = ch.pole;
  const double g = ch.stage_gain;
  std::complex<double> s1{}, s2{}, s3{}, s4{};
  std::vector<std::complex<double>> out(x.size());
  for (std::size_t n = 0; n < x.size(); ++n) {
    s1 = g * x[n] + a * s1;
    s2 = g * s1 + a * s2;
    s3 = g * s2 + a * s3;
    s4 = g * s3 + a * s4;
    out[n] = s4;
  }
  return out;
}

std::vector<double> GammatoneBank::filter_channel(int l,
                                                  std::span<const double> x) const {
  const auto& ch = channels_[l];
  const auto y = filter_channel_complex(l, x);
  std::vector<double> out(x.size(), 0.0);
  const int d = ch.delay_samples;
  for (std::size_t n = 0; n + d < out.size(); ++n) {
    out[n + d] = 2.0 * (y[n] * ch.phase_correction).real();
  }
  return out;
}

}  // namespace casa
