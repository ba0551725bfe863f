// STFT analysis and weighted cross-spectra (frequency-domain GCC).
#pragma once

#include <complex>
#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "srp/geometry.hpp"

namespace srp {

using Signals = std::vector<std::vector<double>>;  // M channels x L samples

enum class Window { sqrt_hann, rectangular };

struct FrameSpec {
  double sample_rate = 16000.0;
  std::size_t frame_length = 2048;
  std::size_t hop_length = 1024;
  Window window = Window::sqrt_hann;

  /// Hop defaults to half the frame.
  static FrameSpec make(double sample_rate, std::size_t frame_length,
                        Window window = Window::sqrt_hann, std::size_t hop_length = 0);

  /// One-sided bin count K = frame_length / 2 (Nyquist bin dropped).
  std::size_t bins() const { return frame_length / 2; }
  /// Radial frequency of bin k, 2*pi*k*fs/frame_length.
  double bin_frequency(std::size_t k) const;
  std::vector<double> bin_frequencies() const;
  void validate() const;
};

std::vector<double> make_window(Window window, std::size_t length);

struct SpectralFrame {
  Eigen::MatrixXcd spectra;  // M x K
  std::vector<double> bin_frequencies;
  std::size_t index = 0;

  std::size_t channels() const { return static_cast<std::size_t>(spectra.rows()); }
  std::size_t bins() const { return static_cast<std::size_t>(spectra.cols()); }
};

/// floor((L - frame_length) / hop) + 1 windowed, one-sided frames.
std::vector<SpectralFrame> stft_analyze(const Signals& signals, const FrameSpec& spec);

enum class Weighting { phat, identity };

/// psi_{m,m'}(w_k) for every pair (m > m'), P x K.
struct CrossSpectra {
  Eigen::MatrixXcd values;
  std::vector<double> bin_frequencies;
  Weighting weighting = Weighting::phat;
  double phat_floor = 0.0;
  std::size_t frame_index = 0;

  std::size_t pair_count() const { return static_cast<std::size_t>(values.rows()); }
  std::size_t bins() const { return static_cast<std::size_t>(values.cols()); }
};

/// 1e-12 times the frame's mean |y_m|^2, the scale of the raw products.
double default_phat_floor(const SpectralFrame& frame);

/// psi = gamma * y_m * conj(y_m'); gamma = 1 / max(|y_m y_m'^*|, floor) under
/// PHAT, 1 otherwise. Exactly-zero products stay zero. Without an explicit
/// floor, default_phat_floor() is used.
CrossSpectra cross_spectrum(const SpectralFrame& frame, std::span<const MicPair> pairs,
                            Weighting weighting = Weighting::phat,
                            std::optional<double> phat_floor = std::nullopt);

/// PHAT-normalizes a single complex value with the given floor.
std::complex<double> phat_normalize(std::complex<double> raw, double floor);

}  // namespace srp
