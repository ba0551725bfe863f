#include <cmath>
#include <complex>
#include <numbers>
#include <random>

#include <unsupported/Eigen/FFT>

#include "doctest.h"
#include "srp/acoustic_sim.hpp"

using srp::MicArray;
using srp::RoomSpec;
using srp::SceneSpec;
using srp::Signals;
using srp::Vec3;

namespace {

constexpr double kPi = std::numbers::pi;

double mean_square(const std::vector<double>& x) {
  double s = 0;
  for (double v : x) s += v * v;
  return s / static_cast<double>(x.size());
}

// Real part of the averaged normalized cross-spectrum at bin k (Welch, rectangular frames).
std::vector<double> coherence(const std::vector<double>& a, const std::vector<double>& b, std::size_t frame) {
  Eigen::FFT<double> fft;
  std::vector<std::complex<double>> fa, fb;
  std::vector<std::complex<double>> sab(frame / 2);
  std::vector<double> saa(frame / 2), sbb(frame / 2);
  for (std::size_t start = 0; start + frame <= a.size(); start += frame) {
    std::vector<double> xa(a.begin() + static_cast<long>(start), a.begin() + static_cast<long>(start + frame));
    std::vector<double> xb(b.begin() + static_cast<long>(start), b.begin() + static_cast<long>(start + frame));
    fft.fwd(fa, xa);
    fft.fwd(fb, xb);
    for (std::size_t k = 0; k < frame / 2; ++k) {
      sab[k] += fa[k] * std::conj(fb[k]);
      saa[k] += std::norm(fa[k]);
      sbb[k] += std::norm(fb[k]);
    }
  }
  std::vector<double> out(frame / 2);
  for (std::size_t k = 0; k < frame / 2; ++k) out[k] = sab[k].real() / std::sqrt(saa[k] * sbb[k]);
  return out;
}

SceneSpec small_scene(double snr, srp::NoiseKind noise = srp::NoiseKind::diffuse_isotropic) {
  SceneSpec s{RoomSpec::with_t60(Vec3(4, 5, 3), 0.3, 3, 16000.0, 340.0),
              MicArray::circular(4, 0.05, Vec3(2, 2.5, 1.5), 340.0), Vec3(1, 1, 1),
              srp::white_signal(4000, 9)};
  s.snr_db = snr;
  s.noise_kind = noise;
  s.noise_seed = 77;
  s.rir_length = 1600;
  return s;
}

}  // namespace

TEST_CASE("Sabine absorption") {
  const double v = 6.0 * 7.0 * 3.5, area = 2.0 * (42.0 + 21.0 + 24.5);
  CHECK(srp::sabine_absorption(Vec3(6, 7, 3.5), 0.6) == doctest::Approx(0.161 * v / (area * 0.6)));
  const auto room = RoomSpec::with_t60(Vec3(6, 7, 3.5), 0.6, 5, 16000.0, 340.0);
  for (double a : room.absorption) CHECK(a == doctest::Approx(0.161 * v / (area * 0.6)));
  CHECK_THROWS_AS(srp::sabine_absorption(Vec3(6, 7, 3.5), 0.0), srp::InvalidInput);
  RoomSpec bad;
  bad.absorption[2] = 1.5;
  CHECK_THROWS_AS(bad.validate(), srp::InvalidInput);
  bad = RoomSpec{};
  bad.dimensions = Vec3(0, 1, 1);
  CHECK_THROWS_AS(bad.validate(), srp::InvalidInput);
}

TEST_CASE("fractional impulse at an integer delay is a single tap") {
  std::vector<double> h(200, 0.0);
  srp::add_fractional_impulse(h, 50.0, 0.7);
  for (std::size_t t = 0; t < h.size(); ++t) CHECK(h[t] == (t == 50 ? 0.7 : 0.0));
}

TEST_CASE("fractional impulse keeps unit DC gain and its centre of mass") {
  std::vector<double> h(300, 0.0);
  srp::add_fractional_impulse(h, 120.37, 1.0);
  double sum = 0, moment = 0;
  for (std::size_t t = 0; t < h.size(); ++t) sum += h[t], moment += h[t] * static_cast<double>(t);
  CHECK(sum == doctest::Approx(1.0).epsilon(2e-3));
  CHECK(moment / sum == doctest::Approx(120.37).epsilon(1e-3));
  // taps outside the buffer are dropped
  std::vector<double> edge(10, 0.0);
  srp::add_fractional_impulse(edge, 2.5, 1.0);
  for (double v : edge) CHECK(std::isfinite(v));
}

TEST_CASE("anechoic impulse response is the delayed spherical spreading term") {
  auto room = RoomSpec::with_t60(Vec3(6, 7, 3.5), 0.6, 0, 16000.0, 340.0);
  const Vec3 src(1, 1, 1), mic(1 + 340.0 * 100.0 / 16000.0, 1, 1);  // exactly 100 samples
  const auto h = srp::image_source_rir(room, src, mic, 400);
  const double d = (mic - src).norm();
  for (std::size_t t = 0; t < h.size(); ++t)
    CHECK(h[t] == doctest::Approx(t == 100 ? 1.0 / (4.0 * kPi * d) : 0.0).epsilon(1e-9));
}

TEST_CASE("a single reflecting wall adds its image source") {
  RoomSpec room;
  room.dimensions = Vec3(6, 7, 3.5);
  room.reflection_order = 3;
  room.absorption = {1.0, 1.0, 1.0, 1.0, 0.36, 1.0};  // only the floor reflects, beta = 0.8
  const Vec3 src(2, 3, 1.5), mic(4, 3.5, 2);
  auto direct_only = room;
  direct_only.reflection_order = 0;
  const auto h = srp::image_source_rir(room, src, mic, 800);
  const auto h0 = srp::image_source_rir(direct_only, src, mic, 800);
  const Vec3 img(src.x(), src.y(), -src.z());
  const double dist = (img - mic).norm();
  std::vector<double> expected = h0;
  srp::add_fractional_impulse(expected, dist * 16000.0 / 340.0, 0.8 / (4.0 * kPi * dist));
  for (std::size_t t = 0; t < h.size(); ++t) CHECK(h[t] == doctest::Approx(expected[t]).epsilon(1e-12));
}

TEST_CASE("impulse responses are reproducible and validate geometry") {
  const auto room = RoomSpec::with_t60(Vec3(6, 7, 3.5), 0.4, 6, 16000.0, 340.0);
  const auto a = srp::image_source_rir(room, Vec3(1, 2, 1), Vec3(3, 3, 2), 3000);
  const auto b = srp::image_source_rir(room, Vec3(1, 2, 1), Vec3(3, 3, 2), 3000);
  CHECK(a == b);
  CHECK_THROWS_AS(srp::image_source_rir(room, Vec3(7, 2, 1), Vec3(3, 3, 2), 3000), srp::InvalidInput);
  CHECK_THROWS_AS(srp::image_source_rir(room, Vec3(1, 2, 1), Vec3(3, 3, -1), 3000), srp::InvalidInput);
  CHECK_THROWS_AS(srp::image_source_rir(room, Vec3(1, 2, 1), Vec3(1, 2, 1), 3000), srp::InvalidInput);
}

TEST_CASE("fft convolution matches direct convolution") {
  std::mt19937_64 rng(1);
  std::normal_distribution<double> n;
  std::vector<double> a(37), b(91);
  for (auto& v : a) v = n(rng);
  for (auto& v : b) v = n(rng);
  const auto y = srp::convolve(a, b);
  REQUIRE(y.size() == a.size() + b.size() - 1);
  for (std::size_t t = 0; t < y.size(); ++t) {
    double s = 0;
    for (std::size_t i = 0; i < a.size(); ++i)
      if (t >= i && t - i < b.size()) s += a[i] * b[t - i];
    CHECK(y[t] == doctest::Approx(s).epsilon(1e-10));
  }
}

TEST_CASE("generated signals") {
  const auto w = srp::white_signal(100000, 3);
  CHECK(mean_square(w) == doctest::Approx(1.0).epsilon(0.02));
  CHECK(w == srp::white_signal(100000, 3));
  const auto s = srp::speech_like_signal(32000, 16000.0, 5);
  CHECK(mean_square(s) == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(s == srp::speech_like_signal(32000, 16000.0, 5));
  const auto noise = srp::white_noise(3, 5000, 8);
  CHECK(noise.size() == 3);
  CHECK(noise[0] != noise[1]);
}

TEST_CASE("diffuse noise has unit power and the isotropic coherence") {
  const double c = 340.0, fs = 16000.0;
  const std::vector<Vec3> pos{Vec3(0, 0, 0), Vec3(0.1, 0, 0), Vec3(0.1, 0, 0)};
  const auto noise = srp::diffuse_noise(pos, c, 1 << 17, fs, 11, 64);
  for (const auto& ch : noise) CHECK(mean_square(ch) == doctest::Approx(1.0).epsilon(1e-12));
  const std::size_t frame = 256;
  const auto coh = coherence(noise[0], noise[1], frame);
  double worst = 0;
  for (std::size_t k = 1; k < frame / 2; ++k) {
    const double f = fs * static_cast<double>(k) / static_cast<double>(frame);
    const double x = 2.0 * kPi * f * 0.1 / c;
    worst = std::max(worst, std::abs(coh[k] - std::sin(x) / x));
  }
  CHECK(worst < 0.1);
  const auto same = coherence(noise[1], noise[2], frame);
  for (std::size_t k = 1; k < frame / 2; ++k) CHECK(same[k] == doctest::Approx(1.0).epsilon(1e-9));

  const auto single = srp::diffuse_noise(std::vector<Vec3>{Vec3::Zero()}, c, 4096, fs, 2, 64);
  CHECK(mean_square(single[0]) == doctest::Approx(1.0));
}

TEST_CASE("scene mixing hits the requested SNR") {
  for (double snr : {-3.0, 0.0, 6.0}) {
    for (auto kind : {srp::NoiseKind::white, srp::NoiseKind::diffuse_isotropic}) {
      const auto r = srp::render_scene(small_scene(snr, kind));
      CHECK(std::abs(srp::measured_snr_db(r.clean, r.noise) - snr) < 0.01);
      CHECK(r.mixture.size() == 4);
      CHECK(r.mixture[0].size() == 4000);
    }
  }
  const auto clean = srp::render_scene(small_scene(std::numeric_limits<double>::infinity()));
  CHECK(clean.noise.empty());
  CHECK(clean.mixture == clean.clean);
}

TEST_CASE("scene rendering is reproducible and validates its inputs") {
  const auto a = srp::render_scene(small_scene(3.0));
  const auto b = srp::render_scene(small_scene(3.0));
  CHECK(a.mixture == b.mixture);

  auto outside = small_scene(0.0);
  outside.source_position = Vec3(10, 1, 1);
  CHECK_THROWS_AS(srp::render_scene(outside), srp::InvalidInput);
  auto silent = small_scene(0.0);
  silent.source_signal.assign(4000, 0.0);
  CHECK_THROWS_AS(srp::render_scene(silent), srp::InvalidInput);
  auto nan_snr = small_scene(std::nan(""));
  CHECK_THROWS_AS(srp::render_scene(nan_snr), srp::InvalidInput);
}
