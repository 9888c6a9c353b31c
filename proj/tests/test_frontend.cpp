#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "casa/angles.hpp"
#include "casa/errors.hpp"
#include "casa/frontend.hpp"
#include "casa/gammatone.hpp"
#include "oracles.hpp"

using namespace casa;

namespace {

double erb_rate_ref(double f) { return 21.4 * std::log10(1.0 + 0.00437 * f); }

FrontendConfig small_config(int channels) {
  FrontendConfig cfg;
  cfg.num_channels = channels;
  return cfg;
}

}  // namespace

TEST_CASE("ERB grid endpoints") {
  for (int channels : {2, 3, 64}) {
    const auto bank = GammatoneBank::design(small_config(channels));
    CHECK(bank.center_freqs().front() == doctest::Approx(80.0).epsilon(1e-9));
    CHECK(bank.center_freqs().back() == doctest::Approx(8000.0).epsilon(1e-9));
  }
}

TEST_CASE("three-channel grid midpoint") {
  const auto bank = GammatoneBank::design(small_config(3));
  const double target = 0.5 * (erb_rate_ref(80.0) + erb_rate_ref(8000.0));
  const double expected =
      oracle::bisect_inverse([](double f) { return erb_rate_ref(f); }, target, 80.0,
                             8000.0);
  CHECK(bank.center_freqs()[1] == doctest::Approx(expected).epsilon(1e-6));
}

TEST_CASE("centers are strictly increasing and ERB-rate equispaced") {
  const auto bank = GammatoneBank::design(small_config(64));
  const auto& fc = bank.center_freqs();
  const double step = erb_rate_ref(fc[1]) - erb_rate_ref(fc[0]);
  for (std::size_t l = 1; l < fc.size(); ++l) {
    CHECK(fc[l] > fc[l - 1]);
    CHECK(erb_rate_ref(fc[l]) - erb_rate_ref(fc[l - 1]) ==
          doctest::Approx(step).epsilon(1e-9));
  }
}

TEST_CASE("configuration validation") {
  FrontendConfig cfg;
  cfg.f_high = 30000.0;
  CHECK_THROWS_AS(GammatoneBank::design(cfg), ConfigError);
  cfg = FrontendConfig{};
  cfg.num_channels = 1;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg = FrontendConfig{};
  cfg.frame_len = 0.0001234;  // not an integer number of samples at 44.1 kHz
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
}

TEST_CASE("phase compensation aligns channel peaks on an impulse") {
  const auto bank = GammatoneBank::design(small_config(16));
  std::vector<double> impulse(3000, 0.0);
  impulse[0] = 1.0;
  std::vector<int> peaks;
  for (int l = 0; l < bank.num_channels(); ++l) {
    const auto y = bank.filter_channel(l, impulse);
    int arg = 0;
    for (int n = 1; n < static_cast<int>(y.size()); ++n) {
      if (std::abs(y[n]) > std::abs(y[arg])) arg = n;
    }
    peaks.push_back(arg);
  }
  const auto [lo, hi] = std::minmax_element(peaks.begin(), peaks.end());
  CHECK(*hi - *lo <= 3);
  // All envelope maxima sit at the slowest (lowest) channel's peak time.
  const int expected = static_cast<int>(bank.envelope_peak_seconds(0) * 44100.0 + 0.5);
  CHECK(std::abs(peaks[0] - expected) <= 2);
}

TEST_CASE("IHC output on all-negative input is zero") {
  std::vector<double> x(500, -0.3);
  for (double y : ihc_envelope(x, 44100.0)) CHECK(y == 0.0);
}

TEST_CASE("IHC has unity DC gain") {
  std::vector<double> x(4000, 0.7);
  const auto y = ihc_envelope(x, 44100.0);
  CHECK(y.back() == doctest::Approx(0.7).epsilon(1e-6));
}

TEST_CASE("IHC low-pass attenuation matches the analytic response") {
  const double fs = 44100.0;
  const int n = 44100;
  // A positive-offset tone passes rectification untouched, so the measured
  // ripple isolates the low-pass stage.
  auto measure = [&](double freq) {
    std::vector<double> x(n);
    for (int i = 0; i < n; ++i) x[i] = 0.5 + 0.45 * std::sin(kTwoPi * freq * i / fs);
    const auto y = ihc_envelope(x, fs);
    double lo = 1e9, hi = -1e9;
    for (int i = n / 2; i < n; ++i) {
      lo = std::min(lo, y[i]);
      hi = std::max(hi, y[i]);
    }
    return (hi - lo) / 2.0 / 0.45;
  };
  // 2nd-order Butterworth at 1 kHz: |H(f)| = 1/sqrt(1+(f/1000)^4).
  CHECK(measure(200.0) == doctest::Approx(1.0 / std::sqrt(1.0 + std::pow(0.2, 4))).epsilon(0.01));
  CHECK(measure(2000.0) == doctest::Approx(1.0 / std::sqrt(1.0 + 16.0)).epsilon(0.02));
  CHECK(measure(4000.0) < 0.1);
}

TEST_CASE("ITD of identical frames is zero") {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> gauss;
  std::vector<double> x(882);
  for (double& v : x) v = std::abs(gauss(rng));
  CHECK(extract_itd(x, x, 44100.0, 48) == 0.0);
}

TEST_CASE("ITD recovers a pure sample delay") {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> gauss;
  std::vector<double> left(882), right(882, 0.0);
  for (double& v : left) v = std::abs(gauss(rng));
  for (int i = 10; i < 882; ++i) right[i] = left[i - 10];
  CHECK(extract_itd(left, right, 44100.0, 48) == doctest::Approx(10.0 / 44100.0));
  CHECK(extract_itd(right, left, 44100.0, 48) == doctest::Approx(-10.0 / 44100.0));
}

TEST_CASE("ITD and ILD antisymmetry on random frames") {
  std::mt19937_64 rng(8);
  std::normal_distribution<double> gauss;
  for (int trial = 0; trial < 10; ++trial) {
    std::vector<double> a(882), b(882);
    for (double& v : a) v = std::abs(gauss(rng));
    for (double& v : b) v = std::abs(gauss(rng));
    CHECK(extract_itd(a, b, 44100.0, 48) ==
          doctest::Approx(-extract_itd(b, a, 44100.0, 48)).epsilon(1e-9));
    CHECK(extract_ild(a, b) == doctest::Approx(-extract_ild(b, a)).epsilon(1e-12));
  }
}

TEST_CASE("ITD and ILD are invariant to a common gain") {
  std::mt19937_64 rng(9);
  std::normal_distribution<double> gauss;
  std::vector<double> a(882), b(882), a2(882), b2(882);
  for (int i = 0; i < 882; ++i) {
    a[i] = std::abs(gauss(rng));
    b[i] = std::abs(gauss(rng));
    a2[i] = 3.7 * a[i];
    b2[i] = 3.7 * b[i];
  }
  CHECK(extract_itd(a2, b2, 44100.0, 48) ==
        doctest::Approx(extract_itd(a, b, 44100.0, 48)).epsilon(1e-9));
  CHECK(extract_ild(a2, b2) == doctest::Approx(extract_ild(a, b)).epsilon(1e-9));
}

TEST_CASE("ILD definition") {
  std::vector<double> left(100, 1.0);
  std::vector<double> right(100, 1.0);
  CHECK(extract_ild(left, right) == doctest::Approx(0.0));
  for (double& v : right) v = 1.0 / std::sqrt(10.0);
  CHECK(extract_ild(left, right) == doctest::Approx(10.0).epsilon(1e-9));
}

TEST_CASE("ratemap of silence is zero") {
  std::vector<double> x(882 * 4, 0.0);
  for (double r : compute_ratemap(x, 44100.0, 0.008, 882)) CHECK(r == 0.0);
}

TEST_CASE("ratemap step response rises monotonically toward the input level") {
  std::vector<double> x(882 * 8, 0.6);
  const auto r = compute_ratemap(x, 44100.0, 0.008, 882);
  for (std::size_t k = 1; k < r.size(); ++k) {
    CHECK(r[k] > r[k - 1] - 1e-12);
    CHECK(r[k] <= 0.6 + 1e-12);
  }
  CHECK(r.back() == doctest::Approx(0.6).epsilon(1e-4));
  // Closed form for the first frame mean of a leaky integrator step response.
  const double a = std::exp(-1.0 / (0.008 * 44100.0));
  double expected = 0.0, y = 0.0;
  for (int i = 0; i < 882; ++i) {
    y = a * y + (1.0 - a) * 0.6;
    expected += y;
  }
  CHECK(r.front() == doctest::Approx(expected / 882.0).epsilon(1e-12));
}

TEST_CASE("spectral features: single active channel") {
  const std::vector<double> fc{100.0, 200.0, 400.0, 800.0};
  const std::vector<double> frame{0.0, 0.0, 2.5, 0.0};
  const auto v = spectral_features(frame, fc);
  CHECK_FALSE(v.degenerate);
  CHECK(v.centroid == doctest::Approx(400.0));
  CHECK(v.spread == doctest::Approx(0.0));
  CHECK(v.flatness < 1e-6);
  CHECK(v.entropy == doctest::Approx(0.0));
  CHECK(v.crest == doctest::Approx(4.0));
}

TEST_CASE("spectral features: uniform frame") {
  const std::vector<double> fc{100.0, 200.0, 400.0, 800.0};
  const std::vector<double> frame{0.3, 0.3, 0.3, 0.3};
  const auto v = spectral_features(frame, fc);
  CHECK(v.flatness == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(v.entropy == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(v.crest == doctest::Approx(1.0));
  CHECK(v.centroid == doctest::Approx(375.0));
}

TEST_CASE("spectral features: two equal peaks average their frequencies") {
  const std::vector<double> fc{100.0, 200.0, 400.0, 800.0};
  const std::vector<double> frame{0.0, 1.0, 0.0, 1.0};
  const auto v = spectral_features(frame, fc);
  CHECK(v.centroid == doctest::Approx(500.0));
  CHECK(v.skewness == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("spectral features are invariant to a common gain") {
  const std::vector<double> fc{100.0, 200.0, 400.0, 800.0};
  const std::vector<double> frame{0.1, 0.7, 0.4, 0.2};
  std::vector<double> scaled(frame);
  for (double& v : scaled) v *= 12.5;
  const auto a = spectral_features(frame, fc).as_array();
  const auto b = spectral_features(scaled, fc).as_array();
  for (int i = 0; i < 7; ++i) CHECK(a[i] == doctest::Approx(b[i]).epsilon(1e-9));
}

TEST_CASE("spectral features: all-zero fallback") {
  const std::vector<double> fc{100.0, 200.0, 400.0, 800.0};
  const std::vector<double> frame(4, 0.0);
  const auto v = spectral_features(frame, fc);
  CHECK(v.degenerate);
  CHECK(v.spread == 0.0);
  CHECK(v.flatness == 1.0);
  CHECK(v.crest == 1.0);
  CHECK(v.entropy == 1.0);
  const double mid = 0.5 * (erb_rate_ref(100.0) + erb_rate_ref(800.0));
  const double expected =
      oracle::bisect_inverse([](double f) { return erb_rate_ref(f); }, mid, 100.0, 800.0);
  CHECK(v.centroid == doctest::Approx(expected).epsilon(1e-6));
}

TEST_CASE("block processing of a diotic tone") {
  FrontendConfig cfg;
  cfg.num_channels = 16;
  AuditoryFrontend frontend(cfg);
  std::vector<double> x(cfg.block_samples());
  for (int i = 0; i < cfg.block_samples(); ++i) {
    x[i] = 0.3 * std::sin(kTwoPi * 1000.0 * i / cfg.sample_rate);
  }
  const auto block = frontend.process_block(x, x, 0.25);
  CHECK(block.num_frames == 25);
  CHECK(block.num_channels == 16);
  CHECK(block.head_orientation == 0.25);
  int valid_count = 0;
  for (int l = 0; l < 16; ++l) {
    for (int k = 0; k < 25; ++k) {
      CHECK(block.ratemap(k, l) >= 0.0);
      const auto& f = block.feature(k, l);
      if (!f.valid) continue;
      ++valid_count;
      CHECK(std::abs(f.itd) < 1e-12);
      CHECK(std::abs(f.ild) < 1e-9);
    }
  }
  CHECK(valid_count > 0);
}

TEST_CASE("silence yields no valid TF units") {
  FrontendConfig cfg;
  cfg.num_channels = 8;
  AuditoryFrontend frontend(cfg);
  std::vector<double> x(cfg.block_samples(), 0.0);
  const auto block = frontend.process_block(x, x);
  for (const auto& f : block.features) CHECK_FALSE(f.valid);
}

TEST_CASE("process partitions the signal into whole blocks") {
  FrontendConfig cfg;
  cfg.num_channels = 4;
  AuditoryFrontend frontend(cfg);
  std::vector<double> x(static_cast<std::size_t>(cfg.block_samples() * 3.2), 0.01);
  CHECK(frontend.process(x, x).size() == 3);
  std::vector<double> shorter(cfg.block_samples() - 1, 0.01);
  CHECK(frontend.process(shorter, shorter).empty());
  CHECK_THROWS_AS(frontend.process_block(shorter, shorter), ConfigError);
}
