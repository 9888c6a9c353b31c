#include "casa/frontend.hpp"

#include <vector>

#include <algorithm>
#include <cmath>

#include "casa/angles.hpp"
#include "casa/errors.hpp"

namespace casa {

void FrontendConfig::validate() const {
  if (sample_rate <= 0.0) throw ConfigError("sample_rate must be positive");
  if (num_channels < 2) throw ConfigError("need at least 2 auditory channels");
  if (f_low >= f_high) throw ConfigError("f_low must be below f_high");
  if (f_high > sample_rate / 2.0) throw ConfigError("f_high exceeds the Nyquist rate");
  const double fs_frames = frame_len * sample_rate;
  if (frame_len <= 0.0 || std::abs(fs_frames - std::round(fs_frames)) > 1e-6 ||
      std::round(fs_frames) < 1.0) {
    throw ConfigError("frame_len * sample_rate must be a positive integer");
  }
  if (block_frames < 1) throw ConfigError("block_frames must be positive");
  if (ratemap_tau <= 0.0) throw ConfigError("ratemap_tau must be positive");
}

std::vector<double> ihc_envelope(std::span<const double> channel_signal,
                                 double sample_rate, double cutoff_hz) {
  // Butterworth low-pass biquad (unity DC gain).
  const double w0 = kTwoPi * cutoff_hz / sample_rate;
  const double alpha = std::sin(w0) / std::sqrt(2.0);
  const double cw = std::cos(w0);
  const double a0 = 1.0 + alpha;
  const double b0 = (1.0 - cw) / 2.0 / a0;
  const double b1 = (1.0 - cw) / a0;
  const double b2 = b0;
  const double a1 = -2.0 * cw / a0;
  const double a2 = (1.0 - alpha) / a0;

  std::vector<double> out(channel_signal.size());
  double x1 = 0.0, x2 = 0.0, y1 = 0.0, y2 = 0.0;
  for (std::size_t n = 0; n < channel_signal.size(); ++n) {
    const double x = std::max(channel_signal[n], 0.0);  // half-wave rectification
    const double y = b0 * x + b1 * x1 + b2 * x2 - a1 * y1 - a2 * y2;
    x2 = x1;
    x1 = x;
    y2 = y1;
    y1 = y;
    out[n] = std::max(y, 0.0);
  }
  return out;
}

double extract_itd(std::span<const double> left, std::span<const double> right,
                   double sample_rate, int max_lag, bool refine,
                   double ambiguity_ratio, bool* ambiguous, double* peak_corr) {
  const int n = static_cast<int>(left.size());
  // Pearson-style normalization: the rectified inputs are nonnegative, and
  // without mean removal their DC product swamps the correlation, leaving
  // a nearly flat function whose argmax is noise.
  // Prefix sums so each lag can be normalized over its own overlap window.
  // A single whole-frame normalization would favor lag 0, whose overlap is
  // longest; that bias is decisive in low channels where the correlation
  // function is shallow.
  std::vector<double> ps_l(n + 1, 0.0), ps_r(n + 1, 0.0);
  std::vector<double> ps_ll(n + 1, 0.0), ps_rr(n + 1, 0.0);
  for (int i = 0; i < n; ++i) {
    ps_l[i + 1] = ps_l[i] + left[i];
    ps_r[i + 1] = ps_r[i] + right[i];
    ps_ll[i + 1] = ps_ll[i] + left[i] * left[i];
    ps_rr[i + 1] = ps_rr[i] + right[i] * right[i];
  }

  std::vector<double> corr(2 * max_lag + 1);
  int best_lag = 0;
  double best = -2.0;
  for (int lag = -max_lag; lag <= max_lag; ++lag) {
    const int lo = std::max(0, -lag);
    const int hi = std::min(n, n - lag);
    const int m = hi - lo;
    if (m <= 1) {
      corr[lag + max_lag] = -2.0;
      continue;
    }
    const double sum_l = ps_l[hi] - ps_l[lo];
    const double sum_r = ps_r[hi + lag] - ps_r[lo + lag];
    const double mean_l = sum_l / m, mean_r = sum_r / m;
    double acc = 0.0;
    for (int i = lo; i < hi; ++i) acc += left[i] * right[i + lag];
    const double cov = acc - m * mean_l * mean_r;
    const double var_l = ps_ll[hi] - ps_ll[lo] - m * mean_l * mean_l;
    const double var_r = ps_rr[hi + lag] - ps_rr[lo + lag] - m * mean_r * mean_r;
    const double norm = std::sqrt(std::max(var_l, 0.0) * std::max(var_r, 0.0));
    const double c = norm > 0.0 ? cov / norm : 0.0;
    corr[lag + max_lag] = c;
    const bool better =
        c > best ||
        (c == best && (std::abs(lag) < std::abs(best_lag) ||
                       (std::abs(lag) == std::abs(best_lag) && lag > best_lag)));
    if (better) {
      best = c;
      best_lag = lag;
    }
  }
  if (peak_corr != nullptr) *peak_corr = best;
  if (ambiguous != nullptr) {
    *ambiguous = false;
    if (ambiguity_ratio > 0.0) {
      if (best <= 0.0) {
        *ambiguous = true;  // no positive correlation anywhere
      } else {
        // A secondary local maximum close to the global peak means the
        // correlation function is (near-)periodic over the lag window and
        // the delay estimate is a coin toss between carrier periods.
        const double thresh = ambiguity_ratio * best;
        for (int i = 1; i < 2 * max_lag; ++i) {
          if (std::abs(i - max_lag - best_lag) <= 1) continue;
          if (corr[i] >= thresh && corr[i] >= corr[i - 1] && corr[i] >= corr[i + 1]) {
            *ambiguous = true;
            break;
          }
        }
      }
    }
  }
  // Optional parabolic refinement of the peak.  The integer-lag grid is
  // coarse enough that quantized estimates pile up on single lags, which
  // downstream clustering mistakes for genuinely concentrated directions.
  double refined = best_lag;
  const int idx = best_lag + max_lag;
  if (refine && idx > 0 && idx < 2 * max_lag) {
    const double ym = corr[idx - 1], y0 = corr[idx], yp = corr[idx + 1];
    const double denom = ym - 2.0 * y0 + yp;
    if (denom < 0.0) {
      const double shift = 0.5 * (ym - yp) / denom;
      if (std::abs(shift) <= 0.5) refined += shift;
    }
  }
  return refined / sample_rate;
}

double extract_ild(std::span<const double> left, std::span<const double> right) {
  double energy_l = 0.0, energy_r = 0.0;
  for (std::size_t i = 0; i < left.size(); ++i) energy_l += left[i] * left[i];
  for (std::size_t i = 0; i < right.size(); ++i) energy_r += right[i] * right[i];
  return 10.0 * std::log10(energy_l / energy_r);
}

std::vector<double> compute_ratemap(std::span<const double> ihc_signal,
                                    double sample_rate, double tau,
                                    int frame_samples) {
  const double a = std::exp(-1.0 / (tau * sample_rate));
  const int num_frames = static_cast<int>(ihc_signal.size()) / frame_samples;
  std::vector<double> rates(num_frames, 0.0);
  double y = 0.0;
  for (int k = 0; k < num_frames; ++k) {
    double acc = 0.0;
    for (int i = 0; i < frame_samples; ++i) {
      y = a * y + (1.0 - a) * ihc_signal[static_cast<std::size_t>(k) * frame_samples + i];
      acc += y;
    }
    rates[k] = acc / frame_samples;
  }
  return rates;
}

SpectralFeatureVector spectral_features(std::span<const double> ratemap_frame,
                                        std::span<const double> center_freqs) {
  const int num_ch = static_cast<int>(ratemap_frame.size());
  SpectralFeatureVector v;

  double total = 0.0;
  for (double r : ratemap_frame) total += r;
  if (total <= 0.0) {
    // Documented fallback for silent frames; callers skip these.
    v.centroid = erb_rate_inverse(
        0.5 * (erb_rate(center_freqs.front()) + erb_rate(center_freqs.back())));
    v.flatness = 1.0;
    v.crest = 1.0;
    v.entropy = 1.0;
    v.degenerate = true;
    return v;
  }

  double centroid = 0.0;
  for (int l = 0; l < num_ch; ++l) centroid += ratemap_frame[l] / total * center_freqs[l];
  double m2 = 0.0, m3 = 0.0, m4 = 0.0;
  for (int l = 0; l < num_ch; ++l) {
    const double p = ratemap_frame[l] / total;
    const double d = center_freqs[l] - centroid;
    m2 += p * d * d;
    m3 += p * d * d * d;
    m4 += p * d * d * d * d;
  }
  v.centroid = centroid;
  v.spread = std::sqrt(m2);
  v.skewness = m2 > 0.0 ? m3 / (m2 * v.spread) : 0.0;
  v.kurtosis = m2 > 0.0 ? m4 / (m2 * m2) : 0.0;

  const double mean = total / num_ch;
  double log_geo = 0.0;
  double peak = 0.0;
  double entropy = 0.0;
  constexpr double kEps = 1e-12;
  for (int l = 0; l < num_ch; ++l) {
    log_geo += std::log(ratemap_frame[l] + kEps);
    peak = std::max(peak, ratemap_frame[l]);
    const double p = ratemap_frame[l] / total;
    if (p > 0.0) entropy -= p * std::log(p);
  }
  v.flatness = std::min(std::exp(log_geo / num_ch) / mean, 1.0);
  v.crest = peak / mean;
  v.entropy = entropy / std::log(static_cast<double>(num_ch));
  return v;
}

AuditoryFrontend::AuditoryFrontend(const FrontendConfig& cfg)
    : cfg_(cfg), bank_(GammatoneBank::design(cfg)) {}

AuditoryBlock AuditoryFrontend::process_block(std::span<const double> left,
                                              std::span<const double> right,
                                              double head_orientation) const {
  const int frame_n = cfg_.frame_samples();
  const int num_frames = cfg_.block_frames;
  const int num_ch = cfg_.num_channels;
  const int need = frame_n * num_frames;
  if (static_cast<int>(left.size()) < need || static_cast<int>(right.size()) < need) {
    throw ConfigError("process_block: input shorter than one block");
  }

  AuditoryBlock block;
  block.num_frames = num_frames;
  block.num_channels = num_ch;
  block.center_freqs = bank_.center_freqs();
  block.head_orientation = head_orientation;
  block.features.resize(static_cast<std::size_t>(num_frames) * num_ch);
  block.ratemaps.resize(static_cast<std::size_t>(num_frames) * num_ch);

  std::vector<std::vector<double>> ihc_left(num_ch), ihc_right(num_ch);
  std::vector<double> energy_left(block.features.size());
  std::vector<double> energy_right(block.features.size());

  double max_energy = 0.0;
  for (int l = 0; l < num_ch; ++l) {
    ihc_left[l] = ihc_envelope(bank_.filter_channel(l, left.first(need)),
                               cfg_.sample_rate, cfg_.ihc_cutoff);
    ihc_right[l] = ihc_envelope(bank_.filter_channel(l, right.first(need)),
                                cfg_.sample_rate, cfg_.ihc_cutoff);
    const auto rate_l =
        compute_ratemap(ihc_left[l], cfg_.sample_rate, cfg_.ratemap_tau, frame_n);
    const auto rate_r =
        compute_ratemap(ihc_right[l], cfg_.sample_rate, cfg_.ratemap_tau, frame_n);
    for (int k = 0; k < num_frames; ++k) {
      block.ratemap(k, l) = 0.5 * (rate_l[k] + rate_r[k]);
      double el = 0.0, er = 0.0;
      for (int i = 0; i < frame_n; ++i) {
        const double xl = ihc_left[l][static_cast<std::size_t>(k) * frame_n + i];
        const double xr = ihc_right[l][static_cast<std::size_t>(k) * frame_n + i];
        el += xl * xl;
        er += xr * xr;
      }
      const std::size_t idx = static_cast<std::size_t>(l) * num_frames + k;
      energy_left[idx] = el;
      energy_right[idx] = er;
      max_energy = std::max(max_energy, el + er);
    }
  }

  const double floor = cfg_.energy_floor * max_energy;
  const int max_lag = cfg_.max_lag_samples();
  for (int l = 0; l < num_ch; ++l) {
    for (int k = 0; k < num_frames; ++k) {
      const std::size_t idx = static_cast<std::size_t>(l) * num_frames + k;
      auto& f = block.feature(k, l);
      const double el = energy_left[idx];
      const double er = energy_right[idx];
      f.valid = el > 0.0 && er > 0.0 && el + er >= floor;
      if (!f.valid) continue;
      const std::span<const double> frame_l{ihc_left[l].data() +
                                                static_cast<std::size_t>(k) * frame_n,
                                            static_cast<std::size_t>(frame_n)};
      const std::span<const double> frame_r{ihc_right[l].data() +
                                                static_cast<std::size_t>(k) * frame_n,
                                            static_cast<std::size_t>(frame_n)};
      double peak = 0.0;
      f.itd = extract_itd(frame_l, frame_r, cfg_.sample_rate, max_lag,
                          cfg_.itd_refine, cfg_.itd_ambiguity_ratio,
                          &f.itd_ambiguous, &peak);
      if (cfg_.itd_coherence_floor > 0.0 && peak < cfg_.itd_coherence_floor) {
        f.itd_ambiguous = true;
      }
      f.ild = 10.0 * std::log10(el / er);
      if (cfg_.itd_ild_sign_gate_db > 0.0 &&
          std::abs(f.ild) >= cfg_.itd_ild_sign_gate_db && f.itd * f.ild < 0.0) {
        f.itd_ambiguous = true;
      }
    }
  }
  return block;
}

std::vector<AuditoryBlock> AuditoryFrontend::process(std::span<const double> left,
                                                     std::span<const double> right,
                                                     double head_orientation) const {
  const int block_n = cfg_.block_samples();
  const std::size_t num_blocks = std::min(left.size(), right.size()) / block_n;
  std::vector<AuditoryBlock> blocks;
  blocks.reserve(num_blocks);
  for (std::size_t b = 0; b < num_blocks; ++b) {
    blocks.push_back(process_block(left.subspan(b * block_n),
                                   right.subspan(b * block_n), head_orientation));
  }
  return blocks;
}

}  // namespace casa
