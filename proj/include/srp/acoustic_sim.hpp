// Shoebox-room scene simulation: image-source impulse responses, source
// signals and noise mixing.
#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <vector>

#include "srp/geometry.hpp"
#include "srp/spectral.hpp"

namespace srp {

/// Walls are ordered x=0, x=Lx, y=0, y=Ly, z=0, z=Lz.
struct RoomSpec {
  Vec3 dimensions = Vec3(6.0, 7.0, 3.5);
  int reflection_order = 0;
  std::array<double, 6> absorption{1.0, 1.0, 1.0, 1.0, 1.0, 1.0};
  double sample_rate = 16000.0;
  double speed_of_sound = 340.0;

  /// Uniform absorption from Sabine's formula for the target T60.
  static RoomSpec with_t60(const Vec3& dimensions, double t60, int reflection_order,
                           double sample_rate, double speed_of_sound);

  void validate() const;
  bool contains(const Vec3& point) const;
};

/// Sabine absorption 0.161 V / (S T60), clamped to [0, 1].
double sabine_absorption(const Vec3& dimensions, double t60);

/// Half-width of the Hann-windowed sinc used for fractional delays (81 taps).
inline constexpr int kFractionalDelayHalfWidth = 40;

/// Adds amplitude * delta(t - delay) to `out`, band-limited by the
/// windowed-sinc kernel. Taps falling outside `out` are dropped.
void add_fractional_impulse(std::span<double> out, double delay_samples, double amplitude);

/// Image-source room impulse response from `source` to `mic`, including all
/// images with at most reflection_order wall reflections.
std::vector<double> image_source_rir(const RoomSpec& room, const Vec3& source, const Vec3& mic,
                                     std::size_t length);

enum class NoiseKind { white, diffuse_isotropic };

struct SceneSpec {
  RoomSpec room;
  MicArray array;
  Vec3 source_position = Vec3::Zero();
  std::vector<double> source_signal;
  double snr_db = std::numeric_limits<double>::infinity();  // +inf: no noise
  NoiseKind noise_kind = NoiseKind::diffuse_isotropic;
  std::uint64_t noise_seed = 0;
  std::size_t noise_directions = 64;
  std::size_t rir_length = 4800;
};

struct RenderedScene {
  Signals mixture;
  Signals clean;
  Signals noise;  // empty when no noise was added
};

/// Microphone signals without noise: the source convolved with each
/// microphone's RIR, truncated to the source length.
Signals render_clean(const SceneSpec& scene);

/// Adds noise to `clean` as configured in `scene` (nothing for snr_db = +inf).
RenderedScene mix_noise(Signals clean, const SceneSpec& scene);

/// Convolves the source with each microphone's RIR (output truncated to the
/// source length) and adds noise scaled so the mean-over-mics SNR matches.
RenderedScene render_scene(const SceneSpec& scene);

/// Superposition of independent white plane waves from `directions`
/// quasi-uniformly spread directions (Fibonacci sphere); each channel is
/// scaled to unit mean square.
Signals diffuse_noise(std::span<const Vec3> positions, double speed_of_sound, std::size_t length,
                      double sample_rate, std::uint64_t seed, std::size_t directions = 64);

/// Independent unit-variance Gaussian channels.
Signals white_noise(std::size_t channels, std::size_t length, std::uint64_t seed);

std::vector<double> white_signal(std::size_t length, std::uint64_t seed);

/// Amplitude-modulated, formant-filtered noise, unit RMS.
std::vector<double> speech_like_signal(std::size_t length, double sample_rate,
                                       std::uint64_t seed);

/// 10 log10(mean_m P_signal / mean_m P_noise) with P the mean square.
double measured_snr_db(const Signals& signal, const Signals& noise);

/// Full linear convolution, computed with FFTs.
std::vector<double> convolve(std::span<const double> a, std::span<const double> b);

}  // namespace srp
