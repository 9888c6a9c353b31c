#pragma once

#include <span>
#include <string>
#include <vector>

namespace casa {

struct SceneSource {
  std::span<const double> signal;
  double azimuth = 0.0;  // absolute, [-pi, pi); positive azimuths are left
};

/// Renders world-anchored sources to two ear signals for a given head
/// orientation.  Implementations are stateless: repeated calls over
/// adjacent sample ranges stitch together cleanly.
class BinauralRenderer {
 public:
  virtual ~BinauralRenderer() = default;

  /// Renders samples [start, start + length) of the mixture.  Source
  /// signals shorter than the requested range are zero padded.
  virtual void render(std::span<const SceneSource> sources, double look_direction,
                      std::size_t start, std::size_t length,
                      std::vector<double>& left,
                      std::vector<double>& right) const = 0;

  double sample_rate() const { return sample_rate_; }

 protected:
  explicit BinauralRenderer(double sample_rate) : sample_rate_(sample_rate) {}
  double sample_rate_;
};

/// Parametric spherical-head model: Woodworth ITD via fractional delay and
/// a broadband per-ear shadow gain.  The rear ITD arc is compressed and the
/// level-difference law is front/back asymmetric, so front and back
/// directions are not mirror images in either cue.
class SphericalHeadRenderer : public BinauralRenderer {
 public:
  explicit SphericalHeadRenderer(double sample_rate = 44100.0,
                                 double head_radius = 0.0875,
                                 double speed_of_sound = 343.0);

  /// Interaural time difference (seconds) for a head-relative azimuth;
  /// positive when the left ear leads.
  double itd_seconds(double relative_azimuth) const;

  /// Broadband shadow gain of one ear (+1 = left, -1 = right).
  double shadow_alpha(double relative_azimuth, int ear_sign) const;

  /// Interaural level difference in dB (left minus right) for a
  /// head-relative azimuth; positive when the left ear is louder.
  double ild_db(double relative_azimuth) const;

  void render(std::span<const SceneSource> sources, double look_direction,
              std::size_t start, std::size_t length, std::vector<double>& left,
              std::vector<double>& right) const override;

  double head_radius() const { return head_radius_; }
  double speed_of_sound() const { return speed_of_sound_; }

 private:
  double head_radius_;
  double speed_of_sound_;
};

/// Measured-HRIR renderer: a directory of per-azimuth stereo impulse
/// responses named az<degrees>.wav (degrees in [-180, 180)).  The nearest
/// available azimuth is used for each source.
class HrirRenderer : public BinauralRenderer {
 public:
  HrirRenderer(const std::string& directory, double sample_rate);

  void render(std::span<const SceneSource> sources, double look_direction,
              std::size_t start, std::size_t length, std::vector<double>& left,
              std::vector<double>& right) const override;

  int num_directions() const { return static_cast<int>(azimuths_.size()); }

 private:
  std::vector<double> azimuths_;
  std::vector<std::vector<double>> irs_left_;
  std::vector<std::vector<double>> irs_right_;
};

}  // namespace casa
