#include "psforge/wav.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>
#include <string>

namespace psforge {
namespace {

std::uint32_t read_u32(const unsigned char* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

std::uint16_t read_u16(const unsigned char* p) {
  return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}

void put_u32(std::ofstream& out, std::uint32_t v) {
  const std::array<char, 4> b{static_cast<char>(v & 0xff), static_cast<char>((v >> 8) & 0xff),
                              static_cast<char>((v >> 16) & 0xff),
                              static_cast<char>((v >> 24) & 0xff)};
  out.write(b.data(), 4);
}

void put_u16(std::ofstream& out, std::uint16_t v) {
  const std::array<char, 2> b{static_cast<char>(v & 0xff), static_cast<char>((v >> 8) & 0xff)};
  out.write(b.data(), 2);
}

constexpr std::uint16_t kFormatPcm = 1;
constexpr std::uint16_t kFormatExtensible = 0xFFFE;

}  // namespace

Waveform read_wav(const std::filesystem::path& path, const WavReadOptions& opts) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  const std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)),
                                         std::istreambuf_iterator<char>());
  const std::string name = path.string();
  if (bytes.size() < 12 || std::memcmp(bytes.data(), "RIFF", 4) != 0 ||
      std::memcmp(bytes.data() + 8, "WAVE", 4) != 0) {
    throw IoError(name + ": not a RIFF/WAVE file");
  }

  int channels = 0, bits = 0, rate = 0;
  std::uint16_t format = 0;
  const unsigned char* data = nullptr;
  std::size_t data_size = 0;
  std::size_t pos = 12;
  while (pos + 8 <= bytes.size()) {
    const unsigned char* chunk = bytes.data() + pos;
    const std::size_t size = read_u32(chunk + 4);
    const std::size_t body = pos + 8;
    const std::size_t avail = std::min(size, bytes.size() - body);
    if (std::memcmp(chunk, "fmt ", 4) == 0) {
      if (avail < 16) throw IoError(name + ": truncated fmt chunk");
      format = read_u16(chunk + 8);
      channels = read_u16(chunk + 10);
      rate = static_cast<int>(read_u32(chunk + 12));
      bits = read_u16(chunk + 22);
      if (format == kFormatExtensible && avail >= 26) {
        format = read_u16(chunk + 8 + 24);  // first two bytes of the subformat GUID
      }
    } else if (std::memcmp(chunk, "data", 4) == 0) {
      data = bytes.data() + body;
      data_size = avail;
    }
    pos = body + size + (size & 1);
  }
  if (channels == 0) throw IoError(name + ": missing fmt chunk");
  if (data == nullptr) throw IoError(name + ": missing data chunk");
  if (format != kFormatPcm || bits != 16) {
    throw InvalidInput(name + ": only 16-bit PCM is supported");
  }
  if (channels != 1) throw InvalidInput(name + ": only mono audio is supported");
  if (rate <= 0) throw IoError(name + ": invalid sample rate");

  Waveform wave;
  wave.sample_rate = rate;
  wave.bit_depth_origin = 16;
  wave.samples.resize(data_size / 2);
  for (std::size_t i = 0; i < wave.samples.size(); ++i) {
    const auto raw = static_cast<std::int16_t>(read_u16(data + 2 * i));
    wave.samples[i] = static_cast<double>(raw) / 32768.0;
  }
  if (wave.samples.empty()) throw InvalidInput(name + ": no samples");

  if (rate != opts.expected_sample_rate) {
    if (!opts.resample) {
      throw InvalidInput(name + ": sample rate " + std::to_string(rate) + " Hz, expected " +
                         std::to_string(opts.expected_sample_rate) +
                         " Hz (enable resampling to convert)");
    }
    wave = resample_linear(wave, opts.expected_sample_rate);
  }
  return wave;
}

void write_wav(const std::filesystem::path& path, const Waveform& wave) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  const auto n_bytes = static_cast<std::uint32_t>(wave.samples.size() * 2);
  out.write("RIFF", 4);
  put_u32(out, 36 + n_bytes);
  out.write("WAVEfmt ", 8);
  put_u32(out, 16);
  put_u16(out, kFormatPcm);
  put_u16(out, 1);
  put_u32(out, static_cast<std::uint32_t>(wave.sample_rate));
  put_u32(out, static_cast<std::uint32_t>(wave.sample_rate) * 2);
  put_u16(out, 2);
  put_u16(out, 16);
  out.write("data", 4);
  put_u32(out, n_bytes);
  for (double s : wave.samples) {
    const double clipped = std::clamp(s, -1.0, 1.0);
    const auto q = static_cast<std::int16_t>(
        std::clamp(std::lround(clipped * 32768.0), -32768L, 32767L));
    put_u16(out, static_cast<std::uint16_t>(q));
  }
  if (!out) throw IoError("write failed: " + path.string());
}

Waveform resample_linear(const Waveform& wave, int target_rate) {
  if (target_rate <= 0) throw InvalidInput("target sample rate must be positive");
  if (wave.samples.empty()) throw InvalidInput("empty waveform");
  if (target_rate == wave.sample_rate) return wave;
  const double ratio = static_cast<double>(wave.sample_rate) / target_rate;
  const auto n_out = static_cast<std::size_t>(
      std::floor(static_cast<double>(wave.samples.size() - 1) / ratio)) + 1;
  Waveform out;
  out.sample_rate = target_rate;
  out.bit_depth_origin = wave.bit_depth_origin;
  out.samples.resize(n_out);
  const std::size_t last = wave.samples.size() - 1;
  for (std::size_t i = 0; i < n_out; ++i) {
    const double src = static_cast<double>(i) * ratio;
    const auto i0 = std::min(static_cast<std::size_t>(src), last);
    const std::size_t i1 = std::min(i0 + 1, last);
    const double frac = src - static_cast<double>(i0);
    out.samples[i] = (1.0 - frac) * wave.samples[i0] + frac * wave.samples[i1];
  }
  return out;
}

}  // namespace psforge
