// Approximation and localization error measures, with quartile summaries.
#pragma once

#include <cstddef>
#include <span>

#include "srp/geometry.hpp"
#include "srp/srp.hpp"

namespace srp {

/// Value reported instead of -inf when the two maps coincide.
inline constexpr double kErrorFloorDb = -300.0;

struct ErrorSummary {
  double median = 0.0;
  double first_quartile = 0.0;
  double third_quartile = 0.0;
  std::size_t count = 0;
};

/// 10 log10( sum (ref - approx)^2 / sum ref^2 ), floored at kErrorFloorDb.
double approximation_error_db(const SrpMap& reference, const SrpMap& approx);
double approximation_error_db(std::span<const double> reference, std::span<const double> approx);

/// Angle between two unit vectors in degrees, in [0, 180].
double localization_error_deg(const Vec3& true_direction, const Vec3& estimated);

/// Linear interpolation between order statistics at (n - 1) q.
double quantile(std::span<const double> values, double q);

ErrorSummary summarize(std::span<const double> values);

}  // namespace srp
