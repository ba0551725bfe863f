#include "srp/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <unsupported/Eigen/FFT>

namespace srp {

FrameSpec FrameSpec::make(double sample_rate, std::size_t frame_length, Window window,
                          std::size_t hop_length) {
  FrameSpec spec{sample_rate, frame_length, hop_length ? hop_length : frame_length / 2, window};
  spec.validate();
  return spec;
}

double FrameSpec::bin_frequency(std::size_t k) const {
  return 2.0 * std::numbers::pi * static_cast<double>(k) * sample_rate /
         static_cast<double>(frame_length);
}

std::vector<double> FrameSpec::bin_frequencies() const {
  std::vector<double> freqs(bins());
  for (std::size_t k = 0; k < freqs.size(); ++k) freqs[k] = bin_frequency(k);
  return freqs;
}

void FrameSpec::validate() const {
  if (!(sample_rate > 0.0)) throw InvalidInput("sample rate must be positive");
  if (frame_length < 2 || frame_length % 2 != 0)
    throw InvalidInput("frame length must be even and at least 2");
  if (hop_length == 0 || hop_length > frame_length)
    throw InvalidInput("hop length must lie in (0, frame_length]");
}

std::vector<double> make_window(Window window, std::size_t length) {
  std::vector<double> w(length, 1.0);
  if (window == Window::sqrt_hann) {
    // periodic Hann, so that squared windows at 50% hop sum to one
    for (std::size_t n = 0; n < length; ++n) {
      double hann = 0.5 * (1.0 - std::cos(2.0 * std::numbers::pi * static_cast<double>(n) /
                                          static_cast<double>(length)));
      w[n] = std::sqrt(hann);
    }
  }
  return w;
}

std::vector<SpectralFrame> stft_analyze(const Signals& signals, const FrameSpec& spec) {
  spec.validate();
  if (signals.empty()) throw InvalidInput("no input channels");
  const std::size_t length = signals.front().size();
  for (const auto& ch : signals)
    if (ch.size() != length) throw InvalidInput("channels differ in length");
  if (length < spec.frame_length) throw InvalidInput("signal shorter than one frame");

  const std::size_t frames = (length - spec.frame_length) / spec.hop_length + 1;
  const std::size_t bins = spec.bins();
  const auto window = make_window(spec.window, spec.frame_length);
  const auto freqs = spec.bin_frequencies();

  Eigen::FFT<double> fft;
  std::vector<double> buffer(spec.frame_length);
  std::vector<std::complex<double>> spectrum;

  std::vector<SpectralFrame> out;
  out.reserve(frames);
  for (std::size_t f = 0; f < frames; ++f) {
    SpectralFrame frame;
    frame.index = f;
    frame.bin_frequencies = freqs;
    frame.spectra.resize(static_cast<Eigen::Index>(signals.size()),
                         static_cast<Eigen::Index>(bins));
    const std::size_t start = f * spec.hop_length;
    for (std::size_t m = 0; m < signals.size(); ++m) {
      for (std::size_t n = 0; n < spec.frame_length; ++n)
        buffer[n] = signals[m][start + n] * window[n];
      fft.fwd(spectrum, buffer);
      for (std::size_t k = 0; k < bins; ++k)
        frame.spectra(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(k)) = spectrum[k];
    }
    // bin 0 of a real frame is real; drop the rounding residue
    for (Eigen::Index m = 0; m < frame.spectra.rows(); ++m)
      frame.spectra(m, 0) = frame.spectra(m, 0).real();
    out.push_back(std::move(frame));
  }
  return out;
}

double default_phat_floor(const SpectralFrame& frame) {
  if (frame.spectra.size() == 0) return 0.0;
  return 1e-12 * frame.spectra.cwiseAbs2().mean();
}

std::complex<double> phat_normalize(std::complex<double> raw, double floor) {
  const double mag = std::abs(raw);
  if (mag == 0.0) return {0.0, 0.0};
  return raw / std::max(mag, floor);
}

CrossSpectra cross_spectrum(const SpectralFrame& frame, std::span<const MicPair> pairs,
                            Weighting weighting, std::optional<double> phat_floor) {
  CrossSpectra out;
  out.weighting = weighting;
  out.phat_floor = phat_floor.value_or(default_phat_floor(frame));
  out.bin_frequencies = frame.bin_frequencies;
  out.frame_index = frame.index;
  const auto bins = frame.spectra.cols();
  out.values.resize(static_cast<Eigen::Index>(pairs.size()), bins);
  for (std::size_t p = 0; p < pairs.size(); ++p) {
    const auto m = static_cast<Eigen::Index>(pairs[p].m);
    const auto mp = static_cast<Eigen::Index>(pairs[p].m_prime);
    if (m >= frame.spectra.rows() || mp >= frame.spectra.rows())
      throw InvalidInput("pair references a missing channel");
    for (Eigen::Index k = 0; k < bins; ++k) {
      std::complex<double> raw = frame.spectra(m, k) * std::conj(frame.spectra(mp, k));
      out.values(static_cast<Eigen::Index>(p), k) =
          weighting == Weighting::phat ? phat_normalize(raw, out.phat_floor) : raw;
    }
  }
  return out;
}

}  // namespace srp
