#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace casa {

enum class SoundClass { SpeechLike = 0, Siren, DogBark, Engine, Piano };

inline constexpr int kNumSoundClasses = 5;

const std::string& sound_class_name(SoundClass c);
SoundClass sound_class_from_name(const std::string& name);

/// Deterministic seeded generator per class; silence-free by construction
/// and normalized to a common RMS.
std::vector<double> synth_class_signal(SoundClass sound_class, double duration,
                                       double sample_rate, std::uint64_t seed);

}  // namespace casa
