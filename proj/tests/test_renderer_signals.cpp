#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "casa/angles.hpp"
#include "casa/renderer.hpp"
#include "casa/signals.hpp"

using namespace casa;

namespace {

constexpr double kFs = 44100.0;

std::vector<double> white_noise(int n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 0.2);
  std::vector<double> x(n);
  for (double& v : x) v = gauss(rng);
  return x;
}

int xcorr_peak_lag(const std::vector<double>& left, const std::vector<double>& right,
                   int max_lag) {
  int best_lag = 0;
  double best = -1e300;
  for (int lag = -max_lag; lag <= max_lag; ++lag) {
    double acc = 0.0;
    for (int i = std::max(0, -lag); i < static_cast<int>(left.size()) - std::max(0, lag);
         ++i) {
      acc += left[i] * right[i + lag];
    }
    if (acc > best) {
      best = acc;
      best_lag = lag;
    }
  }
  return best_lag;
}

double rms(const std::vector<double>& x) {
  double acc = 0.0;
  for (double v : x) acc += v * v;
  return std::sqrt(acc / x.size());
}

// Power fraction below a cutoff via a naive DFT of one window.
double low_band_fraction(const std::vector<double>& x, int offset, int n,
                         double cutoff_hz) {
  double low = 0.0, total = 0.0;
  for (int k = 1; k < n / 2; ++k) {
    double re = 0.0, im = 0.0;
    const double w = kTwoPi * k / n;
    for (int i = 0; i < n; ++i) {
      re += x[offset + i] * std::cos(w * i);
      im -= x[offset + i] * std::sin(w * i);
    }
    const double p = re * re + im * im;
    total += p;
    if (k * kFs / n < cutoff_hz) low += p;
  }
  return low / total;
}

// Dominant frequency of a narrowband segment from zero crossings.
double zero_crossing_freq(const std::vector<double>& x, int offset, int n) {
  int crossings = 0;
  for (int i = 1; i < n; ++i) {
    if ((x[offset + i - 1] < 0.0) != (x[offset + i] < 0.0)) ++crossings;
  }
  return crossings * kFs / (2.0 * n);
}

}  // namespace

TEST_CASE("Woodworth ITD endpoints and antisymmetry") {
  const SphericalHeadRenderer renderer(kFs);
  CHECK(renderer.itd_seconds(0.0) == doctest::Approx(0.0));
  const double expected = 0.0875 / 343.0 * (kPi / 2.0 + 1.0);
  CHECK(renderer.itd_seconds(deg_to_rad(90.0)) == doctest::Approx(expected).epsilon(1e-9));
  CHECK(expected == doctest::Approx(0.655e-3).epsilon(0.01));
  for (double deg = 0.0; deg <= 180.0; deg += 7.5) {
    CHECK(renderer.itd_seconds(deg_to_rad(-deg)) ==
          doctest::Approx(-renderer.itd_seconds(deg_to_rad(deg))).epsilon(1e-12));
  }
  // The rear arc is compressed, so front/back pairs differ in |ITD|.
  CHECK(std::abs(renderer.itd_seconds(deg_to_rad(150.0))) <
        std::abs(renderer.itd_seconds(deg_to_rad(30.0))));
}

TEST_CASE("a source at the look direction reaches both ears identically") {
  const SphericalHeadRenderer renderer(kFs);
  const auto noise = white_noise(4000, 1);
  const SceneSource src{noise, deg_to_rad(40.0)};
  std::vector<double> left, right;
  renderer.render({&src, 1}, deg_to_rad(40.0), 0, noise.size(), left, right);
  REQUIRE(left.size() == noise.size());
  for (std::size_t i = 0; i < left.size(); ++i) {
    CHECK(left[i] == doctest::Approx(right[i]).epsilon(1e-12));
  }
}

TEST_CASE("a lateral source produces the Woodworth delay, left leading") {
  const SphericalHeadRenderer renderer(kFs);
  const auto noise = white_noise(8000, 2);
  const SceneSource src{noise, deg_to_rad(90.0)};
  std::vector<double> left, right;
  renderer.render({&src, 1}, 0.0, 0, noise.size(), left, right);
  const int lag = xcorr_peak_lag(left, right, 48);
  const int expected = static_cast<int>(std::round(renderer.itd_seconds(deg_to_rad(90.0)) * kFs));
  CHECK(std::abs(lag - expected) <= 1);
  CHECK(lag > 0);

  // Mirrored source: right ear leads.
  const SceneSource mirrored{noise, deg_to_rad(-90.0)};
  renderer.render({&mirrored, 1}, 0.0, 0, noise.size(), left, right);
  CHECK(std::abs(xcorr_peak_lag(left, right, 48) + expected) <= 1);
}

TEST_CASE("the louder ear faces the source") {
  const SphericalHeadRenderer renderer(kFs);
  const auto noise = white_noise(8000, 3);
  std::vector<double> left, right;
  for (double deg : {30.0, 60.0, 90.0, 120.0}) {
    const SceneSource src{noise, deg_to_rad(deg)};
    renderer.render({&src, 1}, 0.0, 0, noise.size(), left, right);
    CHECK(rms(left) > rms(right));  // positive azimuths sit to the left
  }
}

TEST_CASE("rendering is linear in the sources") {
  const SphericalHeadRenderer renderer(kFs);
  const auto a = white_noise(4000, 4);
  const auto b = white_noise(4000, 5);
  const SceneSource sa{a, deg_to_rad(30.0)};
  const SceneSource sb{b, deg_to_rad(150.0)};
  const std::vector<SceneSource> both{sa, sb};

  std::vector<double> l_joint, r_joint, l1, r1, l2, r2;
  renderer.render(both, deg_to_rad(90.0), 0, a.size(), l_joint, r_joint);
  renderer.render({&sa, 1}, deg_to_rad(90.0), 0, a.size(), l1, r1);
  renderer.render({&sb, 1}, deg_to_rad(90.0), 0, a.size(), l2, r2);
  for (std::size_t i = 0; i < l_joint.size(); ++i) {
    CHECK(l_joint[i] == doctest::Approx(l1[i] + l2[i]).epsilon(1e-12));
    CHECK(r_joint[i] == doctest::Approx(r1[i] + r2[i]).epsilon(1e-12));
  }
}

TEST_CASE("adjacent render calls stitch cleanly") {
  const SphericalHeadRenderer renderer(kFs);
  const auto noise = white_noise(8000, 6);
  const SceneSource src{noise, deg_to_rad(70.0)};
  std::vector<double> l_full, r_full, l_a, r_a, l_b, r_b;
  renderer.render({&src, 1}, deg_to_rad(90.0), 0, 8000, l_full, r_full);
  renderer.render({&src, 1}, deg_to_rad(90.0), 0, 4000, l_a, r_a);
  renderer.render({&src, 1}, deg_to_rad(90.0), 4000, 4000, l_b, r_b);
  for (int i = 0; i < 4000; ++i) {
    CHECK(l_full[i] == doctest::Approx(l_a[i]).epsilon(1e-9));
    CHECK(l_full[4000 + i] == doctest::Approx(l_b[i]).epsilon(1e-9));
    CHECK(r_full[4000 + i] == doctest::Approx(r_b[i]).epsilon(1e-9));
  }
}

TEST_CASE("synthetic signals are seed-deterministic and silence-free") {
  for (int c = 0; c < kNumSoundClasses; ++c) {
    const auto sound_class = static_cast<SoundClass>(c);
    const auto a = synth_class_signal(sound_class, 1.0, kFs, 42);
    const auto b = synth_class_signal(sound_class, 1.0, kFs, 42);
    const auto other = synth_class_signal(sound_class, 1.0, kFs, 43);
    CHECK(a == b);
    CHECK(a != other);
    CHECK(a.size() == 44100);
    CHECK(rms(a) == doctest::Approx(0.1).epsilon(1e-6));

    const int window = 4410;  // 100 ms
    for (std::size_t at = 0; at + window <= a.size(); at += window) {
      double acc = 0.0;
      for (int i = 0; i < window; ++i) acc += a[at + i] * a[at + i];
      CHECK(std::sqrt(acc / window) > 0.005);
    }
  }
}

TEST_CASE("siren frequency sweeps between its endpoints") {
  const auto x = synth_class_signal(SoundClass::Siren, 3.0, kFs, 7);
  const int window = 2205;  // 50 ms
  double lo = 1e9, hi = 0.0;
  std::vector<double> track;
  for (std::size_t at = 0; at + window <= x.size(); at += window) {
    const double f = zero_crossing_freq(x, static_cast<int>(at), window);
    track.push_back(f);
    lo = std::min(lo, f);
    hi = std::max(hi, f);
  }
  CHECK(lo < 550.0);
  CHECK(hi > 800.0);
  int direction_changes = 0;
  for (std::size_t i = 2; i < track.size(); ++i) {
    if ((track[i] - track[i - 1]) * (track[i - 1] - track[i - 2]) < 0.0) {
      ++direction_changes;
    }
  }
  CHECK(direction_changes >= 2);  // periodic sweep, not a one-way chirp
}

TEST_CASE("engine energy is concentrated below 500 Hz") {
  const auto x = synth_class_signal(SoundClass::Engine, 2.0, kFs, 9);
  double acc = 0.0;
  const int n = 4096;
  int windows = 0;
  for (int at = 0; at + n <= static_cast<int>(x.size()); at += 4 * n) {
    acc += low_band_fraction(x, at, n, 500.0);
    ++windows;
  }
  CHECK(acc / windows > 0.8);
}
