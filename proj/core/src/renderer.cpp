#include "casa/renderer.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>

#include "casa/angles.hpp"
#include "casa/audio.hpp"
#include "casa/errors.hpp"

namespace casa {
namespace {

constexpr int kDelayHalfTaps = 16;   // windowed-sinc fractional delay
constexpr int kWarmupSamples = 2048; // filter settle-in before each range
constexpr double kRearItdFactor = 0.9478;  // rear arc compression

// Sine-series level-difference law (dB, left minus right).  The higher
// harmonics make the level cue front/back asymmetric, so a rear direction
// whose compressed ITD collides with a front direction still differs from
// it by several dB.  Without that term those colliding pairs are nearly
// indistinguishable and localization smears toward the rear.
constexpr std::array<double, 7> kIldHarmonicsDb{5.4766, 2.3555, 1.9620, 1.3959,
                                                1.1713, 0.5090, 0.5258};

double sample_at(std::span<const double> x, std::ptrdiff_t i) {
  return (i >= 0 && i < static_cast<std::ptrdiff_t>(x.size())) ? x[i] : 0.0;
}

// x(n - delay) by windowed-sinc interpolation.
double fractional_delay(std::span<const double> x, std::ptrdiff_t n, double delay) {
  const double pos = static_cast<double>(n) - delay;
  const auto n0 = static_cast<std::ptrdiff_t>(std::floor(pos));
  const double frac = pos - static_cast<double>(n0);
  double acc = 0.0;
  for (int j = -kDelayHalfTaps + 1; j <= kDelayHalfTaps; ++j) {
    const double u = frac - j;
    const double sinc = u == 0.0 ? 1.0 : std::sin(kPi * u) / (kPi * u);
    const double w = 0.5 * (1.0 + std::cos(kPi * u / (kDelayHalfTaps + 0.5)));
    acc += sample_at(x, n0 + j) * sinc * w;
  }
  return acc;
}

}  // namespace

SphericalHeadRenderer::SphericalHeadRenderer(double sample_rate, double head_radius,
                                             double speed_of_sound)
    : BinauralRenderer(sample_rate),
      head_radius_(head_radius),
      speed_of_sound_(speed_of_sound) {}

double SphericalHeadRenderer::itd_seconds(double relative_azimuth) const {
  const double theta = wrap_angle(relative_azimuth);
  const double scale = head_radius_ / speed_of_sound_;
  if (std::abs(theta) <= kPi / 2.0) {
    return scale * (theta + std::sin(theta));  // Woodworth
  }
  const double mirrored = std::copysign(kPi - std::abs(theta), theta);
  return scale * (mirrored + kRearItdFactor * std::sin(mirrored));
}

double SphericalHeadRenderer::ild_db(double relative_azimuth) const {
  const double theta = wrap_angle(relative_azimuth);
  double db = 0.0;
  for (std::size_t k = 0; k < kIldHarmonicsDb.size(); ++k) {
    db += kIldHarmonicsDb[k] * std::sin((k + 1.0) * theta);
  }
  return db;
}

double SphericalHeadRenderer::shadow_alpha(double relative_azimuth, int ear_sign) const {
  // The level difference is split evenly across the two ears, keeping the
  // summed power independent of direction.
  return std::pow(10.0, ear_sign * ild_db(relative_azimuth) / 40.0);
}

void SphericalHeadRenderer::render(std::span<const SceneSource> sources,
                                   double look_direction, std::size_t start,
                                   std::size_t length, std::vector<double>& left,
                                   std::vector<double>& right) const {
  left.assign(length, 0.0);
  right.assign(length, 0.0);
  const double base_delay = 2.0 * head_radius_ / speed_of_sound_ * sample_rate_;

  for (const auto& src : sources) {
    const double rel = wrap_angle(src.azimuth - look_direction);
    const double itd = itd_seconds(rel) * sample_rate_;
    for (int ear_sign : {+1, -1}) {
      // Leading ear gets the shorter path.  The shadow is applied as a pure
      // broadband gain: a frequency-shaped filter would carry ear-dependent
      // phase, silently skewing the interaural delay it is layered on.
      const double delay = base_delay - ear_sign * 0.5 * itd;
      const double alpha = shadow_alpha(rel, ear_sign);
      auto& out = ear_sign > 0 ? left : right;
      for (std::size_t n = 0; n < length; ++n) {
        out[n] += alpha * fractional_delay(
                              src.signal,
                              static_cast<std::ptrdiff_t>(start + n), delay);
      }
    }
  }
}

HrirRenderer::HrirRenderer(const std::string& directory, double sample_rate)
    : BinauralRenderer(sample_rate) {
  namespace fs = std::filesystem;
  std::vector<std::pair<double, fs::path>> entries;
  for (const auto& e : fs::directory_iterator(directory)) {
    const std::string name = e.path().filename().string();
    if (name.rfind("az", 0) == 0 && e.path().extension() == ".wav") {
      try {
        const double deg = std::stod(name.substr(2, name.size() - 6));
        entries.emplace_back(deg, e.path());
      } catch (const std::exception&) {
        // not an azimuth-named file, skip
      }
    }
  }
  if (entries.empty()) throw IoError("no az<degrees>.wav files in " + directory);
  std::sort(entries.begin(), entries.end());
  for (const auto& [deg, path] : entries) {
    const AudioBuffer ir = read_wav(path.string());
    if (ir.channels.size() != 2) throw IoError("HRIR must be stereo: " + path.string());
    if (std::abs(ir.sample_rate - sample_rate) > 0.5) {
      throw IoError("HRIR sample rate mismatch: " + path.string());
    }
    azimuths_.push_back(wrap_angle(deg_to_rad(deg)));
    irs_left_.push_back(ir.channels[0]);
    irs_right_.push_back(ir.channels[1]);
  }
}

void HrirRenderer::render(std::span<const SceneSource> sources, double look_direction,
                          std::size_t start, std::size_t length,
                          std::vector<double>& left, std::vector<double>& right) const {
  left.assign(length, 0.0);
  right.assign(length, 0.0);
  for (const auto& src : sources) {
    const double rel = wrap_angle(src.azimuth - look_direction);
    int best = 0;
    for (std::size_t i = 1; i < azimuths_.size(); ++i) {
      if (std::abs(angle_diff(rel, azimuths_[i])) <
          std::abs(angle_diff(rel, azimuths_[best]))) {
        best = static_cast<int>(i);
      }
    }
    for (int ear = 0; ear < 2; ++ear) {
      const auto& ir = ear == 0 ? irs_left_[best] : irs_right_[best];
      auto& out = ear == 0 ? left : right;
      for (std::size_t i = 0; i < length; ++i) {
        const auto n = static_cast<std::ptrdiff_t>(start + i);
        double acc = 0.0;
        for (std::size_t t = 0; t < ir.size(); ++t) {
          acc += ir[t] * sample_at(src.signal, n - static_cast<std::ptrdiff_t>(t));
        }
        out[i] += acc;
      }
    }
  }
}

}  // namespace casa
