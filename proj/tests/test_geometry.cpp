#include <cmath>
#include <random>

#include "doctest.h"
#include "srp/geometry.hpp"

using srp::CandidateGrid;
using srp::MicArray;
using srp::Vec3;

namespace {

MicArray random_array(std::mt19937_64& rng, std::size_t mics) {
  std::uniform_real_distribution<double> u(-0.3, 0.3);
  std::vector<Vec3> pos;
  for (std::size_t m = 0; m < mics; ++m) pos.emplace_back(u(rng), u(rng), u(rng));
  return MicArray(pos, 343.0);
}

Vec3 random_unit(std::mt19937_64& rng) {
  std::normal_distribution<double> n;
  return Vec3(n(rng), n(rng), n(rng)).normalized();
}

}  // namespace

TEST_CASE("pair enumeration order and count") {
  const auto six = MicArray::circular(6, 0.1, Vec3::Zero(), 340.0);
  CHECK(six.pair_count() == 15);
  CHECK(MicArray::circular(4, 0.1, Vec3::Zero(), 340.0).pair_count() == 6);
  const MicArray two({Vec3(0, 0, 0), Vec3(0.1, 0, 0)}, 340.0);
  REQUIRE(two.pair_count() == 1);
  CHECK(two.pairs()[0].m == 1);
  CHECK(two.pairs()[0].m_prime == 0);

  // (m', m) lexicographic with m > m'
  const auto pairs = six.pairs();
  std::size_t k = 0;
  for (std::size_t mp = 0; mp < 6; ++mp)
    for (std::size_t m = mp + 1; m < 6; ++m, ++k) {
      CHECK(pairs[k].m_prime == mp);
      CHECK(pairs[k].m == m);
    }
  for (const auto& p : pairs) {
    CHECK(p.distance > 0.0);
    CHECK(p.tdoa_bound == p.distance / 340.0);
  }
}

TEST_CASE("tdoa bound of a 0.1 m pair") {
  const MicArray two({Vec3(0, 0, 0), Vec3(0.1, 0, 0)}, 340.0);
  CHECK(two.pairs()[0].tdoa_bound == doctest::Approx(2.941176470588235e-4).epsilon(1e-12));
}

TEST_CASE("circular array chord distances") {
  const auto a = MicArray::circular(6, 0.1, Vec3(1, 2, 3), 340.0);
  int d1 = 0, d2 = 0, d3 = 0;
  for (const auto& p : a.pairs()) {
    if (std::abs(p.distance - 0.1) < 1e-12) ++d1;
    else if (std::abs(p.distance - 0.1 * std::sqrt(3.0)) < 1e-12) ++d2;
    else if (std::abs(p.distance - 0.2) < 1e-12) ++d3;
  }
  CHECK(d1 == 6);
  CHECK(d2 == 6);
  CHECK(d3 == 3);
  CHECK((a.centroid() - Vec3(1, 2, 3)).norm() < 1e-12);
  CHECK(a.aperture() == doctest::Approx(0.2));
}

TEST_CASE("invalid arrays are rejected") {
  CHECK_THROWS_AS(MicArray({Vec3::Zero()}, 340.0), srp::InvalidInput);
  CHECK_THROWS_AS(MicArray({Vec3::Zero(), Vec3::Zero()}, 340.0), srp::InvalidInput);
  CHECK_THROWS_AS(MicArray({Vec3::Zero(), Vec3(1, 0, 0)}, 0.0), srp::InvalidInput);
  CHECK_THROWS_AS(MicArray({Vec3::Zero(), Vec3(1, 0, 0)}, -340.0), srp::InvalidInput);
}

TEST_CASE("far-field tdoa rejects non-unit directions") {
  const auto a = MicArray::circular(4, 0.1, Vec3::Zero(), 340.0);
  CHECK_THROWS_AS(srp::tdoa_farfield(a, a.pairs()[0], Vec3(0, 0, 2)), srp::InvalidInput);
  CHECK_THROWS_AS(CandidateGrid::far_field({Vec3(0, 0, 0)}), srp::InvalidInput);
}

TEST_CASE("grid cardinality with pole deduplication") {
  const auto grid = srp::build_spherical_grid({90, 180}, {0, 358}, 2.0);
  // 46 polar rings x 180 azimuths, with the 180 pole entries collapsed to one
  CHECK(grid.size() == 46 * 180 - 179);
  CHECK(grid.size() == 8101);
  for (const auto& r : grid.entries()) CHECK(std::abs(r.norm() - 1.0) < 1e-12);
  // propagation vectors point up (sources below the array plane)
  for (const auto& r : grid.entries()) CHECK(r.z() >= -1e-12);
  CHECK_THROWS_AS(srp::build_spherical_grid({10, 5}, {0, 358}, 2.0), srp::InvalidInput);
}

TEST_CASE("pole grid gives zero tdoa for a horizontal array") {
  const auto a = MicArray::circular(6, 0.1, Vec3(2, 2, 1), 340.0);
  const auto grid = srp::build_tdoa_table(a, srp::build_spherical_grid({180, 180}, {0, 358}, 2.0));
  REQUIRE(grid.size() == 1);
  for (std::size_t p = 0; p < a.pair_count(); ++p) CHECK(std::abs(grid.tdoa(0, p)) < 1e-18);
}

TEST_CASE("tdoa table matches direct computation and stays within the bound") {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 20; ++trial) {
    const auto a = random_array(rng, 3 + trial % 4);
    std::vector<Vec3> dirs, points;
    for (int i = 0; i < 40; ++i) {
      dirs.push_back(random_unit(rng));
      points.push_back(random_unit(rng) * (0.01 + 3.0 * std::uniform_real_distribution<double>()(rng)));
    }
    for (const auto& grid : {srp::build_tdoa_table(a, CandidateGrid::far_field(dirs)),
                             srp::build_tdoa_table(a, CandidateGrid::near_field(points))}) {
      for (std::size_t i = 0; i < grid.size(); ++i)
        for (std::size_t p = 0; p < a.pair_count(); ++p) {
          const auto& pair = a.pairs()[p];
          const double t = grid.tdoa(i, p);
          CHECK(t == grid.tdoa_of(a, pair, i));
          CHECK(std::abs(t) <= pair.tdoa_bound + 1e-15);
          CHECK(grid.tdoa_of(a, pair.swapped(), i) == -t);
        }
    }
  }
}

TEST_CASE("pair tdoa equals the difference of tdoas to a reference microphone") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 50; ++trial) {
    const auto a = random_array(rng, 5);
    const Vec3 q = random_unit(rng) * 2.0;
    const Vec3 r = random_unit(rng);
    for (const auto& pair : a.pairs()) {
      const srp::MicPair to_ref_m{pair.m, 0, 0, 1.0}, to_ref_mp{pair.m_prime, 0, 0, 1.0};
      const auto via_ref = [&](auto f, const Vec3& x) {
        return (pair.m == 0 ? 0.0 : f(a, to_ref_m, x)) - (pair.m_prime == 0 ? 0.0 : f(a, to_ref_mp, x));
      };
      CHECK(std::abs(srp::tdoa_nearfield(a, pair, q) - via_ref(srp::tdoa_nearfield, q)) < 1e-12);
      CHECK(std::abs(srp::tdoa_farfield(a, pair, r) - via_ref(srp::tdoa_farfield, r)) < 1e-12);
    }
  }
}

TEST_CASE("far-field tdoa is the limit of near-field tdoa") {
  std::mt19937_64 rng(3);
  const auto a = MicArray::circular(6, 0.1, Vec3(1, 1, 1), 340.0);
  const double distance = 1e4 * 2.0 * a.aperture();
  for (int trial = 0; trial < 100; ++trial) {
    const Vec3 toward = random_unit(rng);
    const Vec3 source = a.centroid() + distance * toward;
    const Vec3 r = srp::propagation_from_source_direction(toward);
    for (const auto& pair : a.pairs()) {
      const double far = srp::tdoa_farfield(a, pair, r);
      const double near = srp::tdoa_nearfield(a, pair, source);
      if (std::abs(far) > 1e-3 * pair.tdoa_bound)
        CHECK(std::abs(near - far) / std::abs(far) < 1e-4);
      else
        CHECK(std::abs(near - far) < 1e-4 * pair.tdoa_bound);
    }
  }
}

TEST_CASE("grid construction is deterministic") {
  const auto a = MicArray::circular(6, 0.1, Vec3(2.9, 3.4, 3.3), 340.0);
  const auto g1 = srp::build_tdoa_table(a, srp::build_spherical_grid({90, 180}, {0, 358}, 2.0));
  const auto g2 = srp::build_tdoa_table(a, srp::build_spherical_grid({90, 180}, {0, 358}, 2.0));
  REQUIRE(g1.size() == g2.size());
  bool same = true;
  for (std::size_t i = 0; i < g1.size(); ++i) {
    same = same && g1.entry(i) == g2.entry(i);
    for (std::size_t p = 0; p < a.pair_count(); ++p) same = same && g1.tdoa(i, p) == g2.tdoa(i, p);
  }
  CHECK(same);
}

TEST_CASE("spherical grid angles") {
  const auto grid = srp::build_spherical_grid({90, 90}, {0, 90}, 90.0);
  REQUIRE(grid.size() == 2);
  // r = -(sin th cos ph, sin th sin ph, cos th)
  CHECK((grid.entry(0) - Vec3(-1, 0, 0)).norm() < 1e-12);
  CHECK((grid.entry(1) - Vec3(0, -1, 0)).norm() < 1e-12);
}
