#include "srp/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

namespace srp {

double approximation_error_db(std::span<const double> reference, std::span<const double> approx) {
  if (reference.size() != approx.size()) throw InvalidInput("maps differ in length");
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < reference.size(); ++i) {
    const double d = reference[i] - approx[i];
    num += d * d;
    den += reference[i] * reference[i];
  }
  if (!(den > 0.0)) throw InvalidInput("reference map has zero energy");
  if (num == 0.0) return kErrorFloorDb;
  return std::max(kErrorFloorDb, 10.0 * std::log10(num / den));
}

double approximation_error_db(const SrpMap& reference, const SrpMap& approx) {
  return approximation_error_db(std::span<const double>(reference.values),
                                std::span<const double>(approx.values));
}

double localization_error_deg(const Vec3& true_direction, const Vec3& estimated) {
  constexpr double kTol = 1e-9;
  if (std::abs(true_direction.norm() - 1.0) > kTol || std::abs(estimated.norm() - 1.0) > kTol)
    throw InvalidInput("localization error needs unit vectors");
  const double c = std::clamp(true_direction.dot(estimated), -1.0, 1.0);
  return std::acos(c) * 180.0 / std::numbers::pi;
}

double quantile(std::span<const double> values, double q) {
  if (values.empty()) throw InvalidInput("quantile of an empty sample");
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

ErrorSummary summarize(std::span<const double> values) {
  if (values.empty()) throw InvalidInput("cannot summarize an empty sample");
  return {quantile(values, 0.5), quantile(values, 0.25), quantile(values, 0.75), values.size()};
}

}  // namespace srp
