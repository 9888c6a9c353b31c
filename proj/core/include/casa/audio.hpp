#pragma once

#include <string>
#include <vector>

namespace casa {

struct AudioBuffer {
  double sample_rate = 44100.0;
  std::vector<std::vector<double>> channels;  // deinterleaved, [-1, 1] nominal

  std::size_t num_frames() const { return channels.empty() ? 0 : channels[0].size(); }
};

/// Reads a RIFF/WAVE file; supports 16-bit PCM and 32-bit IEEE float.
AudioBuffer read_wav(const std::string& path);

enum class WavFormat { Pcm16, Float32 };

void write_wav(const std::string& path, const AudioBuffer& buffer,
               WavFormat format = WavFormat::Pcm16);

}  // namespace casa
