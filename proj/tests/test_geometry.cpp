#include <bit>
#include <cmath>

#include "doctest.h"
#include "sttl/geometry.hpp"
#include "sttl/rng.hpp"

using namespace sttl;

namespace {
constexpr double kPi = 3.14159265358979323846;
constexpr double kInvSqrt2 = 0.7071067811865476;
}  // namespace

TEST_CASE("base stations sit on the unit-square corners cyclically") {
  CHECK(sbs_position(1).x == 0.0);
  CHECK(sbs_position(1).y == 0.0);
  CHECK(sbs_position(2).x == 1.0);
  CHECK(sbs_position(2).y == 0.0);
  CHECK(sbs_position(3).x == 1.0);
  CHECK(sbs_position(3).y == 1.0);
  CHECK(sbs_position(4).x == 0.0);
  CHECK(sbs_position(4).y == 1.0);
}

TEST_CASE("home station assignment wraps by file id") {
  CHECK(home_sbs(1, 4) == 2);
  CHECK(home_sbs(4, 4) == 1);
  CHECK(home_sbs(7, 4) == 4);
  CHECK(home_sbs(8, 4) == 1);
  CHECK(home_sbs(3, 2) == 2);
}

TEST_CASE("coverage flags stations within range") {
  // Center of the square is exactly 1/sqrt(2) from every corner.
  const unsigned center = coverage_from_position({0.5, 0.5}, 4, kInvSqrt2);
  CHECK(std::popcount(center) == 4);
  const unsigned near_origin = coverage_from_position({0.1, 0.1}, 4, kInvSqrt2);
  CHECK((near_origin & 1u) != 0);          // SBS 1 at (0,0)
  CHECK(std::popcount(near_origin) == 1);  // all other corners too far
  const unsigned b2 = coverage_from_position({0.9, 0.1}, 2, kInvSqrt2);
  CHECK(b2 == 2u);  // only SBS 2 exists and covers
}

TEST_CASE("minimum range covers the whole square") {
  Rng rng(21);
  for (int i = 0; i < 20000; ++i) {
    Vec2 p{rng.uniform01(), rng.uniform01()};
    CHECK(std::popcount(coverage_from_position(p, 4, kInvSqrt2)) >= 1);
  }
}

TEST_CASE("uniform coverage statistics match quarter-disc areas") {
  for (double r : {kInvSqrt2, 1.0}) {
    PlacementModel model{4, r, true, 0.0};
    Rng rng(55);
    const int n = 200000;
    double per_sbs = 0.0, mean_size = 0.0;
    for (int i = 0; i < n; ++i) {
      const unsigned cov = model.sample_coverage(1, rng);
      per_sbs += (cov & 1u) != 0;
      mean_size += std::popcount(cov);
    }
    const double p_single = kPi * r * r / 4.0;
    const double se = std::sqrt(p_single * (1 - p_single) / n);
    CHECK(std::abs(per_sbs / n - p_single) < 4 * se);
    const double expected_mean = 4.0 * p_single;  // pi/2 or pi
    CHECK(mean_size / n == doctest::Approx(expected_mean).epsilon(0.01));
  }
}

TEST_CASE("heterogeneous placement hits the home station with probability zeta") {
  PlacementModel model{4, kInvSqrt2, false, 0.9};
  Rng rng(77);
  const int n = 200000;
  const int file = 3;  // home = (3 mod 4) + 1 = 4
  const int home = home_sbs(file, 4);
  double hits = 0.0;
  for (int i = 0; i < n; ++i) {
    const unsigned cov = model.sample_coverage(file, rng);
    hits += (cov & (1u << (home - 1))) != 0;
  }
  const double se = std::sqrt(0.9 * 0.1 / n);
  CHECK(std::abs(hits / n - 0.9) < 4 * se);
}

TEST_CASE("zeta equal to the quarter-disc area reduces to uniform") {
  const double r = kInvSqrt2;
  const double area = kPi * r * r / 4.0;
  PlacementModel model{4, r, false, area};
  Rng rng(99);
  const int n = 200000;
  const int file = 2;
  const int home = home_sbs(file, 4);
  double home_hits = 0.0, other_hits = 0.0;
  for (int i = 0; i < n; ++i) {
    const unsigned cov = model.sample_coverage(file, rng);
    home_hits += (cov & (1u << (home - 1))) != 0;
    other_hits += (cov & 1u) != 0;  // SBS 1 is not the home station
  }
  const double se = std::sqrt(area * (1 - area) / n);
  CHECK(std::abs(home_hits / n - area) < 4 * se);
  CHECK(std::abs(other_hits / n - area) < 4 * se);
}
