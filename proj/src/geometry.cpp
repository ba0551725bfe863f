#include "srp/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace srp {
namespace {

constexpr double kUnitTolerance = 1e-9;

double deg2rad(double deg) { return deg * std::numbers::pi / 180.0; }

// Number of inclusive steps lo, lo+step, ..., <= hi.
std::size_t step_count(const AngleRange& r, double step) {
  if (!(r.hi >= r.lo)) throw InvalidInput("angle range is empty");
  return static_cast<std::size_t>(std::floor((r.hi - r.lo) / step + 1e-9)) + 1;
}

bool is_pole(double polar_deg) {
  double rem = std::fmod(std::abs(polar_deg), 180.0);
  return rem < 1e-9 || 180.0 - rem < 1e-9;
}

}  // namespace

MicArray::MicArray(std::vector<Vec3> positions, double speed_of_sound)
    : positions_(std::move(positions)), speed_of_sound_(speed_of_sound) {
  if (positions_.size() < 2) throw InvalidInput("array needs at least two microphones");
  if (!(speed_of_sound_ > 0.0) || !std::isfinite(speed_of_sound_))
    throw InvalidInput("speed of sound must be positive");
  for (const auto& p : positions_)
    if (!p.allFinite()) throw InvalidInput("microphone position is not finite");
  pairs_ = enumerate_pairs(*this);
  for (const auto& pair : pairs_)
    if (!(pair.distance > 0.0))
      throw InvalidInput("microphones " + std::to_string(pair.m_prime) + " and " +
                         std::to_string(pair.m) + " coincide");
}

MicArray MicArray::circular(std::size_t count, double radius, const Vec3& center,
                            double speed_of_sound) {
  if (!(radius > 0.0)) throw InvalidInput("array radius must be positive");
  std::vector<Vec3> positions;
  positions.reserve(count);
  for (std::size_t m = 0; m < count; ++m) {
    double phi = 2.0 * std::numbers::pi * static_cast<double>(m) / static_cast<double>(count);
    positions.push_back(center + radius * Vec3(std::cos(phi), std::sin(phi), 0.0));
  }
  return MicArray(std::move(positions), speed_of_sound);
}

Vec3 MicArray::centroid() const {
  Vec3 sum = Vec3::Zero();
  for (const auto& p : positions_) sum += p;
  return sum / static_cast<double>(positions_.size());
}

double MicArray::aperture() const {
  double best = 0.0;
  for (const auto& pair : pairs_) best = std::max(best, pair.distance);
  return best;
}

std::vector<MicPair> enumerate_pairs(const MicArray& array) {
  const std::size_t mics = array.size();
  std::vector<MicPair> pairs;
  pairs.reserve(mics * (mics - 1) / 2);
  for (std::size_t mp = 0; mp < mics; ++mp) {
    for (std::size_t m = mp + 1; m < mics; ++m) {
      double d = (array.position(m) - array.position(mp)).norm();
      pairs.push_back({m, mp, d, d / array.speed_of_sound()});
    }
  }
  return pairs;
}

double tdoa_nearfield(const MicArray& array, const MicPair& pair, const Vec3& point) {
  const double c = array.speed_of_sound();
  double t = ((array.position(pair.m) - point).norm() -
              (array.position(pair.m_prime) - point).norm()) / c;
  // Rounding can push collinear points a hair past the bound.
  return std::clamp(t, -pair.tdoa_bound, pair.tdoa_bound);
}

double tdoa_farfield(const MicArray& array, const MicPair& pair, const Vec3& direction) {
  if (std::abs(direction.norm() - 1.0) > kUnitTolerance)
    throw InvalidInput("far-field direction must have unit length");
  double t = (array.position(pair.m) - array.position(pair.m_prime)).dot(direction) /
             array.speed_of_sound();
  return std::clamp(t, -pair.tdoa_bound, pair.tdoa_bound);
}

CandidateGrid CandidateGrid::far_field(std::vector<Vec3> directions) {
  if (directions.empty()) throw InvalidInput("grid has no candidates");
  for (auto& r : directions) {
    if (!r.allFinite() || std::abs(r.norm() - 1.0) > kUnitTolerance)
      throw InvalidInput("far-field candidate is not a unit vector");
    r.normalize();
  }
  return CandidateGrid(GridMode::far_field, std::move(directions));
}

CandidateGrid CandidateGrid::near_field(std::vector<Vec3> points) {
  if (points.empty()) throw InvalidInput("grid has no candidates");
  for (const auto& q : points)
    if (!q.allFinite()) throw InvalidInput("near-field candidate is not finite");
  return CandidateGrid(GridMode::near_field, std::move(points));
}

double CandidateGrid::tdoa_of(const MicArray& array, const MicPair& pair,
                              std::size_t candidate) const {
  const Vec3& e = entries_.at(candidate);
  return mode_ == GridMode::far_field ? tdoa_farfield(array, pair, e)
                                      : tdoa_nearfield(array, pair, e);
}

CandidateGrid build_spherical_grid(AngleRange polar, AngleRange azimuth, double step_deg) {
  if (!(step_deg > 0.0)) throw InvalidInput("grid step must be positive");
  const std::size_t n_polar = step_count(polar, step_deg);
  const std::size_t n_azimuth = step_count(azimuth, step_deg);

  std::vector<Vec3> directions;
  directions.reserve(n_polar * n_azimuth);
  for (std::size_t a = 0; a < n_polar; ++a) {
    const double theta_deg = polar.lo + static_cast<double>(a) * step_deg;
    const double theta = deg2rad(theta_deg);
    if (is_pole(theta_deg)) {
      directions.push_back(Vec3(0.0, 0.0, -std::cos(theta)).normalized());
      continue;
    }
    for (std::size_t b = 0; b < n_azimuth; ++b) {
      const double phi = deg2rad(azimuth.lo + static_cast<double>(b) * step_deg);
      Vec3 r = -Vec3(std::sin(theta) * std::cos(phi), std::sin(theta) * std::sin(phi),
                     std::cos(theta));
      directions.push_back(r.normalized());
    }
  }
  return CandidateGrid::far_field(std::move(directions));
}

CandidateGrid build_tdoa_table(const MicArray& array, CandidateGrid grid) {
  const auto pairs = array.pairs();
  grid.pair_count_ = pairs.size();
  grid.tdoa_.assign(grid.size() * pairs.size(), 0.0);
  for (std::size_t i = 0; i < grid.size(); ++i)
    for (std::size_t p = 0; p < pairs.size(); ++p)
      grid.tdoa_[i * pairs.size() + p] = grid.tdoa_of(array, pairs[p], i);
  return grid;
}

}  // namespace srp
