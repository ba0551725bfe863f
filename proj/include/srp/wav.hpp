// Minimal RIFF/WAVE reader for 16-bit PCM and 32-bit float files.
#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace srp {

struct WavData {
  double sample_rate = 0.0;
  std::size_t channels = 0;
  std::vector<double> first_channel;  // scaled to [-1, 1) for PCM
};

/// Throws std::runtime_error on unreadable or unsupported files.
WavData read_wav(const std::string& path);

/// Writes mono 32-bit float; used by tests and for dumping signals.
void write_wav_float(const std::string& path, const std::vector<double>& samples,
                     double sample_rate, std::size_t channels = 1);

}  // namespace srp
