#include <cmath>
#include <random>

#include "doctest.h"
#include "srp/metrics.hpp"

using srp::Vec3;

TEST_CASE("approximation error reference values") {
  const std::vector<double> ref{1.0, -2.0, 3.5, 0.25};
  CHECK(srp::approximation_error_db(ref, ref) == srp::kErrorFloorDb);
  CHECK(srp::approximation_error_db(ref, std::vector<double>(4, 0.0)) == doctest::Approx(0.0));
  std::vector<double> off = ref;
  for (auto& v : off) v *= 1.1;
  CHECK(srp::approximation_error_db(ref, off) == doctest::Approx(-20.0).epsilon(1e-12));
  CHECK_THROWS_AS(srp::approximation_error_db(std::vector<double>(3, 0.0), std::vector<double>(3, 1.0)),
                  srp::InvalidInput);
  CHECK_THROWS_AS(srp::approximation_error_db(ref, std::vector<double>(3, 1.0)), srp::InvalidInput);
}

TEST_CASE("approximation error is invariant to a common positive scale") {
  std::mt19937_64 rng(1);
  std::normal_distribution<double> n;
  std::vector<double> a(100), b(100);
  for (std::size_t i = 0; i < a.size(); ++i) a[i] = n(rng), b[i] = a[i] + 0.05 * n(rng);
  const double e = srp::approximation_error_db(a, b);
  for (double s : {1e-6, 0.3, 17.0, 4e5}) {
    auto as = a, bs = b;
    for (auto& v : as) v *= s;
    for (auto& v : bs) v *= s;
    CHECK(srp::approximation_error_db(as, bs) == doctest::Approx(e).epsilon(1e-10));
  }
}

TEST_CASE("localization error basics") {
  const Vec3 x(1, 0, 0), y(0, 1, 0);
  CHECK(srp::localization_error_deg(x, x) == 0.0);
  CHECK(srp::localization_error_deg(x, y) == doctest::Approx(90.0));
  CHECK(srp::localization_error_deg(x, -x) == doctest::Approx(180.0));
  CHECK_THROWS_AS(srp::localization_error_deg(x, 2.0 * y), srp::InvalidInput);
}

TEST_CASE("localization error is symmetric and obeys the triangle inequality") {
  std::mt19937_64 rng(2);
  std::normal_distribution<double> n;
  auto unit = [&] { return Vec3(n(rng), n(rng), n(rng)).normalized(); };
  for (int t = 0; t < 1000; ++t) {
    const Vec3 a = unit(), b = unit(), c = unit();
    const double ab = srp::localization_error_deg(a, b);
    CHECK(ab == srp::localization_error_deg(b, a));
    CHECK(ab >= 0.0);
    CHECK(ab <= 180.0);
    CHECK(ab <= srp::localization_error_deg(a, c) + srp::localization_error_deg(c, b) + 1e-9);
  }
}

TEST_CASE("summaries use linearly interpolated quartiles") {
  const auto s = srp::summarize(std::vector<double>{5, 1, 4, 2, 3});
  CHECK(s.median == 3.0);
  CHECK(s.first_quartile == 2.0);
  CHECK(s.third_quartile == 4.0);
  CHECK(s.count == 5);
  const auto one = srp::summarize(std::vector<double>{7.5});
  CHECK(one.median == 7.5);
  CHECK(one.first_quartile == 7.5);
  CHECK(one.third_quartile == 7.5);
  const auto even = srp::summarize(std::vector<double>{1, 2, 3, 4});
  CHECK(even.median == 2.5);
  CHECK(even.first_quartile == 1.75);
  CHECK(even.third_quartile == 3.25);
  CHECK_THROWS_AS(srp::summarize(std::vector<double>{}), srp::InvalidInput);
}

TEST_CASE("quartiles of a large uniform sample") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> v(200000);
  for (auto& x : v) x = u(rng);
  const auto s = srp::summarize(v);
  CHECK(s.first_quartile <= s.median);
  CHECK(s.median <= s.third_quartile);
  CHECK(std::abs(s.first_quartile - 0.25) < 0.005);
  CHECK(std::abs(s.median - 0.5) < 0.005);
  CHECK(std::abs(s.third_quartile - 0.75) < 0.005);
}
