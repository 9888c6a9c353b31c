#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "casa/audio.hpp"
#include "casa/classifier.hpp"
#include "casa/errors.hpp"
#include "casa/localization.hpp"
#include "casa/renderer.hpp"

using namespace casa;

namespace {

struct TempPath {
  std::string path;
  explicit TempPath(const std::string& name) : path("/tmp/casa_io_test_" + name) {}
  ~TempPath() { std::remove(path.c_str()); }
};

AudioBuffer tone_buffer(int channels, int frames) {
  AudioBuffer buf;
  buf.sample_rate = 16000.0;
  buf.channels.resize(channels);
  for (int c = 0; c < channels; ++c) {
    buf.channels[c].resize(frames);
    for (int i = 0; i < frames; ++i) {
      buf.channels[c][i] = 0.5 * std::sin(0.01 * i + c);
    }
  }
  return buf;
}

}  // namespace

TEST_CASE("WAV float32 round trip is lossless") {
  TempPath tmp("f32.wav");
  const auto buf = tone_buffer(2, 1000);
  write_wav(tmp.path, buf, WavFormat::Float32);
  const auto back = read_wav(tmp.path);
  REQUIRE(back.channels.size() == 2);
  REQUIRE(back.num_frames() == 1000);
  CHECK(back.sample_rate == doctest::Approx(16000.0));
  for (int c = 0; c < 2; ++c) {
    for (int i = 0; i < 1000; ++i) {
      // float32 keeps ~7 significant digits
      CHECK(back.channels[c][i] == doctest::Approx(buf.channels[c][i]).epsilon(1e-6));
    }
  }
}

TEST_CASE("WAV PCM16 round trip is within one quantization step") {
  TempPath tmp("pcm16.wav");
  const auto buf = tone_buffer(1, 500);
  write_wav(tmp.path, buf, WavFormat::Pcm16);
  const auto back = read_wav(tmp.path);
  REQUIRE(back.channels.size() == 1);
  REQUIRE(back.num_frames() == 500);
  for (int i = 0; i < 500; ++i) {
    CHECK(std::abs(back.channels[0][i] - buf.channels[0][i]) <= 1.0 / 32767.0);
  }
}

TEST_CASE("reading a non-WAV file fails") {
  TempPath tmp("junk.wav");
  std::ofstream(tmp.path) << "this is not a RIFF container";
  CHECK_THROWS_AS(read_wav(tmp.path), IoError);
  CHECK_THROWS_AS(read_wav("/tmp/casa_io_test_definitely_missing.wav"), IoError);
}

TEST_CASE("azimuth bank persistence round trip") {
  FrontendConfig cfg;
  cfg.num_channels = 4;
  SphericalHeadRenderer renderer(cfg.sample_rate);
  LocalizationTrainConfig train_cfg;
  train_cfg.grid_size = 6;
  train_cfg.noise_duration = 1.0;
  train_cfg.seed = 77;
  const auto bank = train_bank(renderer, cfg, train_cfg);

  TempPath tmp("bank.json");
  bank.save(tmp.path);
  const auto back = GaussianAzimuthBank::load(tmp.path);

  CHECK(back.config_hash == bank.config_hash);
  CHECK(back.config_hash == frontend_config_hash(cfg));
  REQUIRE(back.azimuth_grid == bank.azimuth_grid);
  CHECK(back.num_channels == bank.num_channels);
  REQUIRE(back.models.size() == bank.models.size());
  for (std::size_t i = 0; i < bank.models.size(); ++i) {
    CHECK(back.models[i].mean_itd_ms == bank.models[i].mean_itd_ms);
    CHECK(back.models[i].mean_ild_db == bank.models[i].mean_ild_db);
    CHECK(back.models[i].cov_tt == bank.models[i].cov_tt);
    CHECK(back.models[i].cov_td == bank.models[i].cov_td);
    CHECK(back.models[i].cov_dd == bank.models[i].cov_dd);
    // The cached inverse must be rebuilt on load.
    CHECK(back.models[i].log_norm == bank.models[i].log_norm);
  }
  CHECK(back.frontend_config.num_channels == cfg.num_channels);
  CHECK(back.frontend_config.f_low == cfg.f_low);
  CHECK(back.frontend_config.f_high == cfg.f_high);
}

TEST_CASE("source model persistence round trip") {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::map<std::string, Eigen::MatrixXd> frames;
  for (const std::string label : {"a", "b"}) {
    Eigen::MatrixXd m(300, 7);
    for (int i = 0; i < 300; ++i) {
      for (int j = 0; j < 7; ++j) m(i, j) = gauss(rng) + (label == "a" ? 0.0 : 4.0);
    }
    frames[label] = m;
  }
  ClassifierTrainConfig cfg;
  cfg.num_components = 2;
  cfg.seed = 5;
  auto models = train_source_models(frames, cfg);
  models.config_hash = 0xdeadbeef;

  TempPath tmp("models.json");
  models.save(tmp.path);
  const auto back = SourceModelSet::load(tmp.path);

  CHECK(back.config_hash == models.config_hash);
  REQUIRE(back.num_classes() == 2);
  for (int s = 0; s < 2; ++s) {
    CHECK(back.models[s].label == models.models[s].label);
    CHECK(back.models[s].norm_mean == models.models[s].norm_mean);
    CHECK(back.models[s].norm_std == models.models[s].norm_std);
    REQUIRE(back.models[s].gmm.num_components() == models.models[s].gmm.num_components());
    CHECK(back.models[s].gmm.weights() == models.models[s].gmm.weights());
    for (int c = 0; c < 2; ++c) {
      CHECK(back.models[s].gmm.means()[c] == models.models[s].gmm.means()[c]);
      CHECK(back.models[s].gmm.covariances()[c] == models.models[s].gmm.covariances()[c]);
    }
  }

  // A loaded set scores frames identically to the trained one.
  SpectralFeatureVector v;
  v.centroid = 4.0;
  v.spread = 4.0;
  v.skewness = 4.0;
  v.kurtosis = 4.0;
  v.flatness = 4.0;
  v.crest = 4.0;
  v.entropy = 4.0;
  const auto p1 = frame_posterior(v, models);
  const auto p2 = frame_posterior(v, back);
  REQUIRE(p1.size() == p2.size());
  for (std::size_t i = 0; i < p1.size(); ++i) CHECK(p1[i] == doctest::Approx(p2[i]).epsilon(1e-12));
}

TEST_CASE("persistence rejects wrong formats") {
  TempPath tmp("wrong.json");
  std::ofstream(tmp.path) << R"({"format": "something-else", "version": 1})";
  CHECK_THROWS_AS(GaussianAzimuthBank::load(tmp.path), IoError);
  CHECK_THROWS_AS(SourceModelSet::load(tmp.path), IoError);

  TempPath garbled("garbled.json");
  std::ofstream(garbled.path) << "not json at all {{{";
  CHECK_THROWS_AS(GaussianAzimuthBank::load(garbled.path), IoError);
  CHECK_THROWS_AS(SourceModelSet::load(garbled.path), IoError);

  CHECK_THROWS_AS(GaussianAzimuthBank::load("/tmp/casa_io_test_missing.json"), IoError);
}
