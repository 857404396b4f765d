#include <cmath>
#include <set>
#include <vector>

#include "doctest.h"
#include "sttl/rng.hpp"

using namespace sttl;

TEST_CASE("identical seeds give identical streams") {
  Rng a(123), b(123);
  for (int i = 0; i < 1000; ++i) CHECK(a.uniform01() == b.uniform01());
  Rng c(124);
  int same = 0;
  Rng a2(123);
  for (int i = 0; i < 1000; ++i) same += a2.uniform01() == c.uniform01();
  CHECK(same < 5);
}

TEST_CASE("uniform01 stays in [0,1) with sane moments") {
  Rng rng(7);
  double sum = 0.0, sumsq = 0.0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    const double u = rng.uniform01();
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
    sum += u;
    sumsq += u * u;
  }
  CHECK(sum / n == doctest::Approx(0.5).epsilon(0.01));
  CHECK(sumsq / n == doctest::Approx(1.0 / 3.0).epsilon(0.01));
}

TEST_CASE("below covers every residue without modulo bias") {
  Rng rng(99);
  std::vector<int> counts(7, 0);
  const int n = 70000;
  for (int i = 0; i < n; ++i) {
    const std::uint64_t v = rng.below(7);
    REQUIRE(v < 7);
    ++counts[static_cast<std::size_t>(v)];
  }
  for (int c : counts) CHECK(std::abs(c - n / 7) < 5 * std::sqrt(n / 7.0));
}

TEST_CASE("normal samples match N(0,1) moments") {
  Rng rng(5);
  double sum = 0.0, sumsq = 0.0, sumcube = 0.0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    const double z = rng.normal();
    sum += z;
    sumsq += z * z;
    sumcube += z * z * z;
  }
  CHECK(sum / n == doctest::Approx(0.0).epsilon(0.02));
  CHECK(std::abs(sum / n) < 0.02);
  CHECK(sumsq / n == doctest::Approx(1.0).epsilon(0.02));
  CHECK(std::abs(sumcube / n) < 0.05);
}

TEST_CASE("weibull mean matches scale * Gamma(1 + 1/shape)") {
  Rng rng(11);
  for (double k : {0.5, 0.6, 1.0}) {
    const double scale = 2.0;
    double sum = 0.0;
    const int n = 400000;
    for (int i = 0; i < n; ++i) sum += rng.weibull(k, scale);
    const double expected = scale * std::tgamma(1.0 + 1.0 / k);
    CHECK(sum / n == doctest::Approx(expected).epsilon(0.02));
  }
}

TEST_CASE("derived seeds separate salt streams") {
  const std::uint64_t base = 42;
  std::set<std::uint64_t> seeds;
  for (std::uint64_t salt = 0; salt < 100; ++salt)
    seeds.insert(derive_seed(base, salt));
  CHECK(seeds.size() == 100);
  CHECK(derive_seed(base, 3) == derive_seed(base, 3));
  CHECK(derive_seed(base, 3) != derive_seed(base + 1, 3));
}
