#include "srp/acoustic_sim.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <random>
#include <string>

#include <unsupported/Eigen/FFT>

namespace srp {
namespace {

constexpr double kPi = std::numbers::pi;

std::size_t next_pow2(std::size_t n) {
  std::size_t p = 1;
  while (p < n) p <<= 1;
  return p;
}

double mean_square(std::span<const double> x) {
  if (x.empty()) return 0.0;
  double s = 0.0;
  for (double v : x) s += v * v;
  return s / static_cast<double>(x.size());
}

// RBJ band-pass (constant 0 dB peak gain).
struct Biquad {
  double b0 = 0, b1 = 0, b2 = 0, a1 = 0, a2 = 0;
  double x1 = 0, x2 = 0, y1 = 0, y2 = 0;

  static Biquad bandpass(double center_hz, double q, double fs) {
    const double w = 2.0 * kPi * center_hz / fs;
    const double alpha = std::sin(w) / (2.0 * q);
    const double a0 = 1.0 + alpha;
    Biquad f;
    f.b0 = alpha / a0;
    f.b1 = 0.0;
    f.b2 = -alpha / a0;
    f.a1 = -2.0 * std::cos(w) / a0;
    f.a2 = (1.0 - alpha) / a0;
    return f;
  }

  double operator()(double x) {
    const double y = b0 * x + b1 * x1 + b2 * x2 - a1 * y1 - a2 * y2;
    x2 = x1;
    x1 = x;
    y2 = y1;
    y1 = y;
    return y;
  }
};

std::vector<Vec3> fibonacci_sphere(std::size_t count) {
  std::vector<Vec3> dirs;
  dirs.reserve(count);
  const double golden = kPi * (3.0 - std::sqrt(5.0));
  for (std::size_t i = 0; i < count; ++i) {
    const double z = 1.0 - 2.0 * (static_cast<double>(i) + 0.5) / static_cast<double>(count);
    const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
    const double phi = golden * static_cast<double>(i);
    dirs.emplace_back(r * std::cos(phi), r * std::sin(phi), z);
  }
  return dirs;
}

std::string describe(const Vec3& v) {
  return "(" + std::to_string(v.x()) + ", " + std::to_string(v.y()) + ", " +
         std::to_string(v.z()) + ")";
}

}  // namespace

double sabine_absorption(const Vec3& dimensions, double t60) {
  if (!(t60 > 0.0)) throw InvalidInput("reverberation time must be positive");
  const double volume = dimensions.prod();
  const double surface = 2.0 * (dimensions.x() * dimensions.y() + dimensions.x() * dimensions.z() +
                                dimensions.y() * dimensions.z());
  return std::clamp(0.161 * volume / (surface * t60), 0.0, 1.0);
}

RoomSpec RoomSpec::with_t60(const Vec3& dimensions, double t60, int reflection_order,
                            double sample_rate, double speed_of_sound) {
  RoomSpec room;
  room.dimensions = dimensions;
  room.reflection_order = reflection_order;
  room.absorption.fill(sabine_absorption(dimensions, t60));
  room.sample_rate = sample_rate;
  room.speed_of_sound = speed_of_sound;
  room.validate();
  return room;
}

void RoomSpec::validate() const {
  if (!(dimensions.minCoeff() > 0.0)) throw InvalidInput("room dimensions must be positive");
  if (reflection_order < 0) throw InvalidInput("reflection order must be nonnegative");
  for (double a : absorption)
    if (!(a >= 0.0 && a <= 1.0)) throw InvalidInput("absorption must lie in [0, 1]");
  if (!(sample_rate > 0.0)) throw InvalidInput("sample rate must be positive");
  if (!(speed_of_sound > 0.0)) throw InvalidInput("speed of sound must be positive");
}

bool RoomSpec::contains(const Vec3& point) const {
  for (int a = 0; a < 3; ++a)
    if (!(point[a] > 0.0 && point[a] < dimensions[a])) return false;
  return true;
}

void add_fractional_impulse(std::span<double> out, double delay_samples, double amplitude) {
  const auto center = static_cast<long>(std::lround(delay_samples));
  const double width = kFractionalDelayHalfWidth + 1.0;
  for (long t = center - kFractionalDelayHalfWidth; t <= center + kFractionalDelayHalfWidth;
       ++t) {
    if (t < 0 || t >= static_cast<long>(out.size())) continue;
    const double x = static_cast<double>(t) - delay_samples;
    if (std::abs(x) >= width) continue;
    double s = 1.0;
    if (x == std::nearbyint(x)) s = x == 0.0 ? 1.0 : 0.0;
    else s = std::sin(kPi * x) / (kPi * x);
    const double w = 0.5 * (1.0 + std::cos(kPi * x / width));
    out[static_cast<std::size_t>(t)] += amplitude * w * s;
  }
}

std::vector<double> image_source_rir(const RoomSpec& room, const Vec3& source, const Vec3& mic,
                                     std::size_t length) {
  room.validate();
  if (length == 0) throw InvalidInput("impulse response length must be positive");
  if (!room.contains(source)) throw InvalidInput("source " + describe(source) + " lies outside the room");
  if (!room.contains(mic)) throw InvalidInput("microphone " + describe(mic) + " lies outside the room");
  if ((source - mic).norm() < 1e-9) throw InvalidInput("source coincides with a microphone");

  std::array<double, 6> beta{};
  for (std::size_t w = 0; w < 6; ++w) beta[w] = std::sqrt(1.0 - room.absorption[w]);

  std::vector<double> h(length, 0.0);
  const double samples_per_meter = room.sample_rate / room.speed_of_sound;
  const double max_delay = static_cast<double>(length) + kFractionalDelayHalfWidth;
  const int order = room.reflection_order;

  // Image along one axis: (1 - 2q) s + 2 n L, hitting wall 0 |n - q| times and
  // wall L |n| times.
  for (int nx = -order; nx <= order; ++nx)
    for (int qx = 0; qx <= 1; ++qx) {
      const int rx = std::abs(nx - qx) + std::abs(nx);
      if (rx > order) continue;
      for (int ny = -order; ny <= order; ++ny)
        for (int qy = 0; qy <= 1; ++qy) {
          const int ry = std::abs(ny - qy) + std::abs(ny);
          if (rx + ry > order) continue;
          for (int nz = -order; nz <= order; ++nz)
            for (int qz = 0; qz <= 1; ++qz) {
              const int rz = std::abs(nz - qz) + std::abs(nz);
              if (rx + ry + rz > order) continue;
              const Vec3 image((1 - 2 * qx) * source.x() + 2.0 * nx * room.dimensions.x(),
                               (1 - 2 * qy) * source.y() + 2.0 * ny * room.dimensions.y(),
                               (1 - 2 * qz) * source.z() + 2.0 * nz * room.dimensions.z());
              const double dist = (image - mic).norm();
              const double delay = dist * samples_per_meter;
              if (delay >= max_delay) continue;
              const double gain =
                  std::pow(beta[0], std::abs(nx - qx)) * std::pow(beta[1], std::abs(nx)) *
                  std::pow(beta[2], std::abs(ny - qy)) * std::pow(beta[3], std::abs(ny)) *
                  std::pow(beta[4], std::abs(nz - qz)) * std::pow(beta[5], std::abs(nz));
              if (gain == 0.0) continue;
              add_fractional_impulse(h, delay, gain / (4.0 * kPi * dist));
            }
        }
    }
  return h;
}

std::vector<double> convolve(std::span<const double> a, std::span<const double> b) {
  if (a.empty() || b.empty()) return {};
  const std::size_t out_len = a.size() + b.size() - 1;
  const std::size_t n = next_pow2(out_len);
  Eigen::FFT<double> fft;
  fft.SetFlag(Eigen::FFT<double>::HalfSpectrum);
  std::vector<double> pa(n, 0.0), pb(n, 0.0);
  std::copy(a.begin(), a.end(), pa.begin());
  std::copy(b.begin(), b.end(), pb.begin());
  std::vector<std::complex<double>> fa, fb;
  fft.fwd(fa, pa);
  fft.fwd(fb, pb);
  for (std::size_t k = 0; k < fa.size(); ++k) fa[k] *= fb[k];
  std::vector<double> out;
  fft.inv(out, fa, static_cast<Eigen::Index>(n));
  out.resize(out_len);
  return out;
}

std::vector<double> white_signal(std::size_t length, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<double> x(length);
  for (auto& v : x) v = normal(rng);
  return x;
}

Signals white_noise(std::size_t channels, std::size_t length, std::uint64_t seed) {
  Signals out;
  out.reserve(channels);
  std::mt19937_64 rng(seed);
  for (std::size_t m = 0; m < channels; ++m) out.push_back(white_signal(length, rng()));
  return out;
}

std::vector<double> speech_like_signal(std::size_t length, double sample_rate,
                                       std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  auto excitation = white_signal(length, rng());

  // three formant-like resonances with a decaying spectral tilt
  std::array<Biquad, 3> formants{Biquad::bandpass(500.0 + 200.0 * uniform(rng), 3.0, sample_rate),
                                 Biquad::bandpass(1500.0 + 400.0 * uniform(rng), 4.0, sample_rate),
                                 Biquad::bandpass(2600.0 + 500.0 * uniform(rng), 5.0, sample_rate)};
  const std::array<double, 3> weights{1.0, 0.5, 0.25};
  const double syllable_hz = 3.0 + 2.0 * uniform(rng);
  const double phase = 2.0 * kPi * uniform(rng);
  const double wobble_hz = 0.5 + 0.5 * uniform(rng);

  std::vector<double> x(length);
  for (std::size_t n = 0; n < length; ++n) {
    double v = 0.05 * excitation[n];
    for (std::size_t f = 0; f < formants.size(); ++f) v += weights[f] * formants[f](excitation[n]);
    const double t = static_cast<double>(n) / sample_rate;
    const double s = std::max(0.0, std::sin(2.0 * kPi * syllable_hz * t + phase));
    const double env = 0.1 + 0.9 * s * s * (0.75 + 0.25 * std::sin(2.0 * kPi * wobble_hz * t));
    x[n] = env * v;
  }
  const double rms = std::sqrt(mean_square(x));
  if (rms > 0.0)
    for (auto& v : x) v /= rms;
  return x;
}

Signals diffuse_noise(std::span<const Vec3> positions, double speed_of_sound, std::size_t length,
                      double sample_rate, std::uint64_t seed, std::size_t directions) {
  if (length == 0) throw InvalidInput("noise length must be positive");
  if (positions.empty()) throw InvalidInput("no microphone positions");
  if (directions == 0) throw InvalidInput("diffuse noise needs at least one direction");

  const std::size_t n = next_pow2(length);
  const std::size_t half = n / 2 + 1;
  Eigen::FFT<double> fft;
  fft.SetFlag(Eigen::FFT<double>::HalfSpectrum);

  const auto dirs = fibonacci_sphere(directions);
  std::vector<std::vector<std::complex<double>>> acc(positions.size(),
                                                     std::vector<std::complex<double>>(half));
  std::mt19937_64 rng(seed);
  std::vector<std::complex<double>> spectrum;
  for (const auto& u : dirs) {
    const auto wave = white_signal(n, rng());
    fft.fwd(spectrum, wave);
    for (std::size_t m = 0; m < positions.size(); ++m) {
      // a plane wave from u reaches p at -p.u / c
      const double arrival = -positions[m].dot(u) / speed_of_sound;
      for (std::size_t k = 0; k + 1 < half; ++k) {
        const double w = 2.0 * kPi * static_cast<double>(k) * sample_rate / static_cast<double>(n);
        acc[m][k] += spectrum[k] * std::polar(1.0, -w * arrival);
      }
    }
  }

  Signals out;
  out.reserve(positions.size());
  for (auto& spec : acc) {
    spec.back() = 0.0;  // Nyquist
    std::vector<double> x;
    fft.inv(x, spec, static_cast<Eigen::Index>(n));
    x.resize(length);
    const double ms = mean_square(x);
    if (ms > 0.0)
      for (auto& v : x) v /= std::sqrt(ms);
    out.push_back(std::move(x));
  }
  return out;
}

double measured_snr_db(const Signals& signal, const Signals& noise) {
  if (signal.size() != noise.size() || signal.empty())
    throw InvalidInput("signal and noise channel counts differ");
  double ps = 0.0, pn = 0.0;
  for (std::size_t m = 0; m < signal.size(); ++m) {
    ps += mean_square(signal[m]);
    pn += mean_square(noise[m]);
  }
  return 10.0 * std::log10(ps / pn);
}

static void validate_scene(const SceneSpec& scene) {
  scene.room.validate();
  if (scene.source_signal.empty()) throw InvalidInput("source signal is empty");
  if (std::isnan(scene.snr_db) || scene.snr_db == -std::numeric_limits<double>::infinity())
    throw InvalidInput("SNR must be finite or +inf");
  if (!scene.room.contains(scene.source_position))
    throw InvalidInput("source " + describe(scene.source_position) + " lies outside the room");
  for (const auto& p : scene.array.positions())
    if (!scene.room.contains(p))
      throw InvalidInput("microphone " + describe(p) + " lies outside the room");
}

Signals render_clean(const SceneSpec& scene) {
  validate_scene(scene);
  const std::size_t length = scene.source_signal.size();
  Signals clean;
  clean.reserve(scene.array.size());
  for (const auto& p : scene.array.positions()) {
    const auto rir = image_source_rir(scene.room, scene.source_position, p, scene.rir_length);
    auto y = convolve(scene.source_signal, rir);
    y.resize(length);
    clean.push_back(std::move(y));
  }
  return clean;
}

RenderedScene mix_noise(Signals clean, const SceneSpec& scene) {
  if (std::isnan(scene.snr_db) || scene.snr_db == -std::numeric_limits<double>::infinity())
    throw InvalidInput("SNR must be finite or +inf");
  if (clean.empty()) throw InvalidInput("no channels to mix");
  RenderedScene out;
  out.clean = std::move(clean);
  out.mixture = out.clean;
  if (std::isinf(scene.snr_db)) return out;

  const std::size_t length = out.clean.front().size();
  double signal_power = 0.0;
  for (const auto& ch : out.clean) signal_power += mean_square(ch);
  signal_power /= static_cast<double>(out.clean.size());
  if (!(signal_power > 0.0))
    throw InvalidInput("source signal is silent; SNR is undefined");

  out.noise = scene.noise_kind == NoiseKind::white
                  ? white_noise(out.clean.size(), length, scene.noise_seed)
                  : diffuse_noise(scene.array.positions(), scene.room.speed_of_sound, length,
                                  scene.room.sample_rate, scene.noise_seed,
                                  scene.noise_directions);
  double noise_power = 0.0;
  for (const auto& ch : out.noise) noise_power += mean_square(ch);
  noise_power /= static_cast<double>(out.noise.size());
  const double gain = std::sqrt(signal_power / (noise_power * std::pow(10.0, scene.snr_db / 10.0)));
  for (std::size_t m = 0; m < out.noise.size(); ++m)
    for (std::size_t n = 0; n < length; ++n) {
      out.noise[m][n] *= gain;
      out.mixture[m][n] += out.noise[m][n];
    }
  return out;
}

RenderedScene render_scene(const SceneSpec& scene) {
  return mix_noise(render_clean(scene), scene);
}

}  // namespace srp
