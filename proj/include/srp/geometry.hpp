// Microphone arrays, candidate grids and time-differences of arrival.
#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace srp {

using Vec3 = Eigen::Vector3d;

/// Raised for any violated precondition on user-supplied data.
class InvalidInput : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// An unordered microphone pair stored as (m, m') with m > m'.
/// `tdoa_bound` is the largest attainable |TDOA|, distance / c.
struct MicPair {
  std::size_t m = 0;
  std::size_t m_prime = 0;
  double distance = 0.0;
  double tdoa_bound = 0.0;

  MicPair swapped() const { return {m_prime, m, distance, tdoa_bound}; }
};

/// Immutable set of M >= 2 distinct microphone positions (meters) plus the
/// speed of sound. The pair table is derived once at construction.
class MicArray {
 public:
  MicArray(std::vector<Vec3> positions, double speed_of_sound);

  /// M microphones equally spaced on a horizontal circle.
  static MicArray circular(std::size_t count, double radius, const Vec3& center,
                           double speed_of_sound);

  std::size_t size() const { return positions_.size(); }
  const Vec3& position(std::size_t m) const { return positions_.at(m); }
  std::span<const Vec3> positions() const { return positions_; }
  double speed_of_sound() const { return speed_of_sound_; }
  std::span<const MicPair> pairs() const { return pairs_; }
  std::size_t pair_count() const { return pairs_.size(); }

  Vec3 centroid() const;
  /// Largest inter-microphone distance.
  double aperture() const;

 private:
  std::vector<Vec3> positions_;
  double speed_of_sound_;
  std::vector<MicPair> pairs_;
};

/// All M(M-1)/2 pairs, ordered by (m', m) with m > m'.
std::vector<MicPair> enumerate_pairs(const MicArray& array);

/// (|p_m - q| - |p_m' - q|) / c for a source at `point`.
double tdoa_nearfield(const MicArray& array, const MicPair& pair, const Vec3& point);

/// (p_m - p_m')^T r / c for a unit propagation direction r. Throws
/// InvalidInput when |r| deviates from 1 by more than 1e-9.
double tdoa_farfield(const MicArray& array, const MicPair& pair, const Vec3& direction);

enum class GridMode { far_field, near_field };

struct AngleRange {
  double lo = 0.0;  // degrees
  double hi = 0.0;  // degrees, inclusive
};

/// J candidate locations with an optional J x P TDOA table (row-major,
/// pairs in MicArray order).
class CandidateGrid {
 public:
  /// Directions are renormalized; inputs off unit length by more than 1e-9
  /// are rejected.
  static CandidateGrid far_field(std::vector<Vec3> directions);
  static CandidateGrid near_field(std::vector<Vec3> points);

  GridMode mode() const { return mode_; }
  std::size_t size() const { return entries_.size(); }
  const Vec3& entry(std::size_t i) const { return entries_.at(i); }
  std::span<const Vec3> entries() const { return entries_; }

  bool has_tdoa_table() const { return pair_count_ > 0; }
  std::size_t pair_count() const { return pair_count_; }
  double tdoa(std::size_t candidate, std::size_t pair) const {
    return tdoa_[candidate * pair_count_ + pair];
  }
  std::span<const double> tdoa_row(std::size_t candidate) const {
    return {tdoa_.data() + candidate * pair_count_, pair_count_};
  }

  /// TDOA of a candidate for an arbitrary ordered microphone pair, computed
  /// directly from geometry (does not consult the table).
  double tdoa_of(const MicArray& array, const MicPair& pair, std::size_t candidate) const;

 private:
  friend CandidateGrid build_tdoa_table(const MicArray& array, CandidateGrid grid);

  CandidateGrid(GridMode mode, std::vector<Vec3> entries)
      : mode_(mode), entries_(std::move(entries)) {}

  GridMode mode_;
  std::vector<Vec3> entries_;
  std::size_t pair_count_ = 0;
  std::vector<double> tdoa_;
};

/// Far-field grid r = -(sin t cos f, sin t sin f, cos t) over inclusive polar
/// and azimuth ranges. Polar angles with zero sine (the poles) contribute a
/// single direction regardless of the azimuth range.
CandidateGrid build_spherical_grid(AngleRange polar, AngleRange azimuth, double step_deg);

/// Populates the J x P table for `array`'s pair ordering.
CandidateGrid build_tdoa_table(const MicArray& array, CandidateGrid grid);

/// Far-field propagation vector for a source seen from the array along
/// `toward_source`.
inline Vec3 propagation_from_source_direction(const Vec3& toward_source) {
  return -toward_source.normalized();
}

}  // namespace srp
