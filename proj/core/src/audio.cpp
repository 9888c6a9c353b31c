#include "casa/audio.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>

#include "casa/errors.hpp"

namespace casa {
namespace {

std::uint32_t read_u32(const unsigned char* p) {
  return p[0] | (p[1] << 8) | (p[2] << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}
std::uint16_t read_u16(const unsigned char* p) {
  return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}

void put_u32(std::string& s, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) s.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}
void put_u16(std::string& s, std::uint16_t v) {
  for (int i = 0; i < 2; ++i) s.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

}  // namespace

AudioBuffer read_wav(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open WAV file: " + path);
  std::vector<unsigned char> data((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  if (data.size() < 44 || std::memcmp(data.data(), "RIFF", 4) != 0 ||
      std::memcmp(data.data() + 8, "WAVE", 4) != 0) {
    throw IoError("not a RIFF/WAVE file: " + path);
  }

  std::uint16_t format = 0, num_channels = 0, bits = 0;
  std::uint32_t sample_rate = 0;
  const unsigned char* samples = nullptr;
  std::size_t sample_bytes = 0;

  std::size_t pos = 12;
  while (pos + 8 <= data.size()) {
    const std::uint32_t chunk_size = read_u32(&data[pos + 4]);
    const unsigned char* body = &data[pos + 8];
    if (pos + 8 + chunk_size > data.size()) break;
    if (std::memcmp(&data[pos], "fmt ", 4) == 0 && chunk_size >= 16) {
      format = read_u16(body);
      num_channels = read_u16(body + 2);
      sample_rate = read_u32(body + 4);
      bits = read_u16(body + 14);
    } else if (std::memcmp(&data[pos], "data", 4) == 0) {
      samples = body;
      sample_bytes = chunk_size;
    }
    pos += 8 + chunk_size + (chunk_size & 1);
  }
  if (!samples || num_channels == 0) throw IoError("malformed WAV file: " + path);

  AudioBuffer buf;
  buf.sample_rate = sample_rate;
  buf.channels.resize(num_channels);
  if (format == 1 && bits == 16) {
    const std::size_t frames = sample_bytes / (2 * num_channels);
    for (auto& ch : buf.channels) ch.resize(frames);
    for (std::size_t f = 0; f < frames; ++f) {
      for (int c = 0; c < num_channels; ++c) {
        const auto* p = samples + 2 * (f * num_channels + c);
        const auto v = static_cast<std::int16_t>(read_u16(p));
        buf.channels[c][f] = v / 32768.0;
      }
    }
  } else if (format == 3 && bits == 32) {
    const std::size_t frames = sample_bytes / (4 * num_channels);
    for (auto& ch : buf.channels) ch.resize(frames);
    for (std::size_t f = 0; f < frames; ++f) {
      for (int c = 0; c < num_channels; ++c) {
        const std::uint32_t raw = read_u32(samples + 4 * (f * num_channels + c));
        float v;
        std::memcpy(&v, &raw, 4);
        buf.channels[c][f] = v;
      }
    }
  } else {
    throw IoError("unsupported WAV encoding (want PCM16 or float32): " + path);
  }
  return buf;
}

void write_wav(const std::string& path, const AudioBuffer& buffer, WavFormat format) {
  const int num_channels = static_cast<int>(buffer.channels.size());
  if (num_channels == 0) throw IoError("write_wav: no channels");
  const std::size_t frames = buffer.num_frames();
  for (const auto& ch : buffer.channels) {
    if (ch.size() != frames) throw IoError("write_wav: channel length mismatch");
  }

  const int bytes_per_sample = format == WavFormat::Pcm16 ? 2 : 4;
  const std::uint32_t data_size =
      static_cast<std::uint32_t>(frames * num_channels * bytes_per_sample);

  std::string out;
  out.reserve(44 + data_size);
  out += "RIFF";
  put_u32(out, 36 + data_size);
  out += "WAVEfmt ";
  put_u32(out, 16);
  put_u16(out, format == WavFormat::Pcm16 ? 1 : 3);
  put_u16(out, static_cast<std::uint16_t>(num_channels));
  put_u32(out, static_cast<std::uint32_t>(buffer.sample_rate));
  put_u32(out, static_cast<std::uint32_t>(buffer.sample_rate) * num_channels *
                   bytes_per_sample);
  put_u16(out, static_cast<std::uint16_t>(num_channels * bytes_per_sample));
  put_u16(out, static_cast<std::uint16_t>(8 * bytes_per_sample));
  out += "data";
  put_u32(out, data_size);

  for (std::size_t f = 0; f < frames; ++f) {
    for (int c = 0; c < num_channels; ++c) {
      const double v = buffer.channels[c][f];
      if (format == WavFormat::Pcm16) {
        const double clipped = std::clamp(v, -1.0, 1.0);
        put_u16(out, static_cast<std::uint16_t>(
                         static_cast<std::int16_t>(std::lrint(clipped * 32767.0))));
      } else {
        const float fv = static_cast<float>(v);
        std::uint32_t raw;
        std::memcpy(&raw, &fv, 4);
        put_u32(out, raw);
      }
    }
  }

  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("cannot write WAV file: " + path);
  os.write(out.data(), static_cast<std::streamsize>(out.size()));
}

}  // namespace casa
