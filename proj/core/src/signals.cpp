#include "casa/signals.hpp"

#include <array>
#include <cmath>
#include <random>

#include "casa/angles.hpp"
#include "casa/errors.hpp"

namespace casa {
namespace {

// Two-pole resonator, peak gain roughly unity.
struct Resonator {
  double r = 0.0, cos_theta = 0.0, gain = 0.0;
  double y1 = 0.0, y2 = 0.0;

  void set(double freq, double bandwidth, double fs) {
    r = std::exp(-kPi * bandwidth / fs);
    cos_theta = std::cos(kTwoPi * freq / fs);
    gain = (1.0 - r * r) * 0.5;
  }
  double step(double x) {
    const double y = gain * x + 2.0 * r * cos_theta * y1 - r * r * y2;
    y2 = y1;
    y1 = y;
    return y;
  }
};

void normalize_rms(std::vector<double>& x, double target = 0.1) {
  double acc = 0.0;
  for (double v : x) acc += v * v;
  const double rms = std::sqrt(acc / x.size());
  if (rms > 0.0) {
    for (double& v : x) v *= target / rms;
  }
}

std::vector<double> speech_like(std::size_t n, double fs, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  std::normal_distribution<double> gauss(0.0, 1.0);

  // Vowel-ish formant targets (F1, F2, F3).
  static constexpr std::array<std::array<double, 3>, 4> kTargets{{
      {730.0, 1090.0, 2440.0},
      {270.0, 2290.0, 3010.0},
      {440.0, 1020.0, 2240.0},
      {570.0, 840.0, 2410.0},
  }};

  std::vector<double> out(n, 0.0);
  std::array<Resonator, 3> formants;
  double pitch = 140.0 + 60.0 * uni(rng);
  double phase = 0.0;
  auto current = kTargets[rng() % kTargets.size()];
  auto next = kTargets[rng() % kTargets.size()];
  const auto segment = static_cast<std::size_t>(0.18 * fs);

  for (std::size_t i = 0; i < n; ++i) {
    if (i % segment == 0) {
      current = next;
      next = kTargets[rng() % kTargets.size()];
      pitch = std::clamp(pitch + 20.0 * gauss(rng), 120.0, 220.0);
    }
    const double t = static_cast<double>(i % segment) / segment;
    for (int f = 0; f < 3; ++f) {
      const double freq = current[f] + (next[f] - current[f]) * t;
      formants[f].set(freq, 60.0 + 30.0 * f, fs);
    }
    // Glottal-ish excitation: impulse train plus weak aspiration noise.
    phase += pitch / fs;
    double excitation = 0.02 * gauss(rng);
    if (phase >= 1.0) {
      phase -= 1.0;
      excitation += 1.0;
    }
    double v = 0.0;
    for (auto& f : formants) v += f.step(excitation);
    // Syllable-rate energy modulation plus a trace of fricative hiss.
    const double syllable = 0.55 + 0.45 * std::sin(kTwoPi * 3.1 * i / fs);
    out[i] = syllable * (v + 0.015 * gauss(rng));
  }
  return out;
}

std::vector<double> siren(std::size_t n, double fs, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  // Endpoints sit below ~1 kHz so the tone's period stays longer than the
  // plausible ITD window; a faster sweep would leave the narrowband
  // cross-correlation with several equally tall peaks per channel.
  const double f_lo = 450.0, f_hi = 900.0;
  const double sweep_period = 0.9 + 0.2 * uni(rng);
  double sweep_phase = uni(rng);
  double phase = kTwoPi * uni(rng);

  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    sweep_phase += 1.0 / (sweep_period * fs);
    if (sweep_phase >= 1.0) sweep_phase -= 1.0;
    const double tri = sweep_phase < 0.5 ? 2.0 * sweep_phase : 2.0 - 2.0 * sweep_phase;
    const double freq = f_lo + (f_hi - f_lo) * tri;
    phase += kTwoPi * freq / fs;
    // A horn is harmonic-rich; the 1/h^2 rolloff keeps the zero-crossing
    // rate pinned to the fundamental while the overtones spread the energy
    // across several auditory channels.
    double v = 0.0;
    for (int h = 1; h <= 6; ++h) v += std::sin(h * phase) / (h * h);
    out[i] = v;
  }
  return out;
}

std::vector<double> dog_bark(std::size_t n, double fs, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  std::normal_distribution<double> gauss(0.0, 1.0);

  std::vector<double> out(n, 0.0);
  Resonator body;
  body.set(900.0, 700.0, fs);
  double env = 0.0;
  std::size_t next_burst = static_cast<std::size_t>(0.05 * fs * uni(rng));
  double tone_phase = 0.0;
  const double attack = std::exp(-1.0 / (0.004 * fs));
  const double decay = std::exp(-1.0 / (0.060 * fs));
  bool attacking = false;
  for (std::size_t i = 0; i < n; ++i) {
    if (i >= next_burst) {
      attacking = true;
      next_burst = i + static_cast<std::size_t>((0.18 + 0.18 * uni(rng)) * fs);
    }
    if (attacking) {
      env = 1.0 + (env - 1.0) * attack;
      if (env > 0.95) attacking = false;
    } else {
      env *= decay;
    }
    tone_phase += kTwoPi * 340.0 / fs;
    const double growl = 0.03 * body.step(gauss(rng));  // keeps the signal silence-free
    out[i] = env * (body.step(gauss(rng)) + 0.4 * std::sin(tone_phase)) + growl;
  }
  return out;
}

std::vector<double> engine(std::size_t n, double fs, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  std::normal_distribution<double> gauss(0.0, 1.0);

  // The fundamental sits inside the lowest auditory channel; a lower f0
  // would put a beating pair of harmonics there instead, whose envelope
  // nulls make the interaural correlation unreliable.
  const double f0 = 65.0 + 20.0 * uni(rng);
  const int harmonics = static_cast<int>(350.0 / f0);
  std::vector<double> out(n);
  double phase = kTwoPi * uni(rng);
  double lp = 0.0;
  const double lp_a = std::exp(-kTwoPi * 110.0 / fs);
  double am_phase = kTwoPi * uni(rng);
  const double firing_rate = 9.0 + 5.0 * uni(rng);  // cylinder pulses
  double firing_phase = kTwoPi * uni(rng);
  for (std::size_t i = 0; i < n; ++i) {
    phase += kTwoPi * f0 / fs;
    am_phase += kTwoPi * 2.3 / fs;
    firing_phase += kTwoPi * firing_rate / fs;
    double v = 0.0;
    for (int h = 1; h <= harmonics; ++h) v += std::sin(h * phase) / h;
    lp = lp_a * lp + (1.0 - lp_a) * gauss(rng);
    // Firing pulses modulate the whole signal; the weak wideband hiss keeps
    // an exhaust-like floor in the upper channels.
    const double firing = 0.55 + 0.45 * std::sin(firing_phase);
    out[i] = firing * ((0.85 + 0.15 * std::sin(am_phase)) * v + 2.0 * lp +
                       0.15 * gauss(rng));
  }
  return out;
}

std::vector<double> piano(std::size_t n, double fs, std::mt19937_64& rng) {
  static constexpr std::array<double, 8> kNotes{220.0, 261.6, 329.6, 392.0,
                                               440.0, 523.3, 659.3, 784.0};
  std::vector<double> out(n, 0.0);
  const auto note_len = static_cast<std::size_t>(1.4 * fs);
  const auto hop = static_cast<std::size_t>(0.35 * fs);
  for (std::size_t start = 0; start < n; start += hop) {
    const double f = kNotes[rng() % kNotes.size()];
    const std::size_t len = std::min(note_len, n - start);
    for (std::size_t i = 0; i < len; ++i) {
      const double t = i / fs;
      double v = 0.0;
      for (int h = 1; h <= 6; ++h) {
        v += std::exp(-t * (1.8 + 1.1 * h)) * std::sin(kTwoPi * h * f * t) / h;
      }
      // 10 ms attack ramp avoids clicks at note onsets.
      const double att = std::min(1.0, t / 0.010);
      out[start + i] += att * v;
    }
  }
  return out;
}

}  // namespace

const std::string& sound_class_name(SoundClass c) {
  static const std::array<std::string, kNumSoundClasses> names{
      "speech", "siren", "bark", "engine", "piano"};
  return names[static_cast<int>(c)];
}

SoundClass sound_class_from_name(const std::string& name) {
  for (int i = 0; i < kNumSoundClasses; ++i) {
    if (sound_class_name(static_cast<SoundClass>(i)) == name) {
      return static_cast<SoundClass>(i);
    }
  }
  throw ConfigError("unknown sound class: " + name);
}

std::vector<double> synth_class_signal(SoundClass sound_class, double duration,
                                       double sample_rate, std::uint64_t seed) {
  const auto n = static_cast<std::size_t>(duration * sample_rate);
  std::mt19937_64 rng(seed);
  std::vector<double> out;
  switch (sound_class) {
    case SoundClass::SpeechLike: out = speech_like(n, sample_rate, rng); break;
    case SoundClass::Siren: out = siren(n, sample_rate, rng); break;
    case SoundClass::DogBark: out = dog_bark(n, sample_rate, rng); break;
    case SoundClass::Engine: out = engine(n, sample_rate, rng); break;
    case SoundClass::Piano: out = piano(n, sample_rate, rng); break;
  }
  normalize_rms(out);
  return out;
}

}  // namespace casa
