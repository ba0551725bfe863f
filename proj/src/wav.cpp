#include "srp/wav.hpp"

#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>
#include <stdexcept>

namespace srp {
namespace {

constexpr std::uint16_t kFormatPcm = 1;
constexpr std::uint16_t kFormatFloat = 3;
constexpr std::uint16_t kFormatExtensible = 0xFFFE;

template <typename T>
T read_le(const unsigned char* p) {
  T v{};
  std::memcpy(&v, p, sizeof(T));  // host is little-endian
  return v;
}

template <typename T>
void write_le(std::ofstream& out, T v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

}  // namespace

WavData read_wav(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open WAV file: " + path);
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)),
                                   std::istreambuf_iterator<char>());
  if (bytes.size() < 12 || std::memcmp(bytes.data(), "RIFF", 4) != 0 ||
      std::memcmp(bytes.data() + 8, "WAVE", 4) != 0)
    throw std::runtime_error("not a RIFF/WAVE file: " + path);

  std::uint16_t format = 0, channels = 0, bits = 0;
  std::uint32_t rate = 0;
  const unsigned char* data = nullptr;
  std::size_t data_size = 0;

  std::size_t pos = 12;
  while (pos + 8 <= bytes.size()) {
    const unsigned char* chunk = bytes.data() + pos;
    const auto size = read_le<std::uint32_t>(chunk + 4);
    const std::size_t body = pos + 8;
    if (body + size > bytes.size()) throw std::runtime_error("truncated WAV chunk: " + path);
    if (std::memcmp(chunk, "fmt ", 4) == 0 && size >= 16) {
      format = read_le<std::uint16_t>(bytes.data() + body);
      channels = read_le<std::uint16_t>(bytes.data() + body + 2);
      rate = read_le<std::uint32_t>(bytes.data() + body + 4);
      bits = read_le<std::uint16_t>(bytes.data() + body + 14);
      if (format == kFormatExtensible && size >= 26)
        format = read_le<std::uint16_t>(bytes.data() + body + 24);
    } else if (std::memcmp(chunk, "data", 4) == 0) {
      data = bytes.data() + body;
      data_size = size;
    }
    pos = body + size + (size & 1u);
  }
  if (channels == 0 || rate == 0) throw std::runtime_error("WAV file lacks a fmt chunk: " + path);
  if (!data) throw std::runtime_error("WAV file lacks a data chunk: " + path);

  const bool pcm16 = format == kFormatPcm && bits == 16;
  const bool float32 = format == kFormatFloat && bits == 32;
  if (!pcm16 && !float32)
    throw std::runtime_error("unsupported WAV encoding (need PCM16 or float32): " + path);

  const std::size_t sample_bytes = bits / 8;
  const std::size_t frame_bytes = sample_bytes * channels;
  const std::size_t frames = data_size / frame_bytes;

  WavData out;
  out.sample_rate = rate;
  out.channels = channels;
  out.first_channel.resize(frames);
  for (std::size_t n = 0; n < frames; ++n) {
    const unsigned char* p = data + n * frame_bytes;
    out.first_channel[n] = pcm16 ? read_le<std::int16_t>(p) / 32768.0
                                 : static_cast<double>(read_le<float>(p));
  }
  return out;
}

void write_wav_float(const std::string& path, const std::vector<double>& samples,
                     double sample_rate, std::size_t channels) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write WAV file: " + path);
  const auto frames = static_cast<std::uint32_t>(samples.size());
  const auto ch = static_cast<std::uint16_t>(channels);
  const std::uint32_t data_size = frames * 4u * ch;
  out.write("RIFF", 4);
  write_le<std::uint32_t>(out, 36 + data_size);
  out.write("WAVE", 4);
  out.write("fmt ", 4);
  write_le<std::uint32_t>(out, 16);
  write_le<std::uint16_t>(out, kFormatFloat);
  write_le<std::uint16_t>(out, ch);
  write_le<std::uint32_t>(out, static_cast<std::uint32_t>(sample_rate));
  write_le<std::uint32_t>(out, static_cast<std::uint32_t>(sample_rate) * 4u * ch);
  write_le<std::uint16_t>(out, static_cast<std::uint16_t>(4 * ch));
  write_le<std::uint16_t>(out, 32);
  out.write("data", 4);
  write_le<std::uint32_t>(out, data_size);
  for (double s : samples)
    for (std::size_t c = 0; c < channels; ++c) write_le<float>(out, static_cast<float>(s));
}

}  // namespace srp
