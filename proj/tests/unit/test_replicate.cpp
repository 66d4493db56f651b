#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "gfx/replicate.hpp"

using namespace gfx;

TEST_CASE("parallel_for visits each index once and rethrows") {
  std::vector<int> hits(1000, 0);
  parallel_for(hits.size(), 4, [&](std::size_t i) { hits[i] += 1; });
  for (int h : hits) CHECK(h == 1);
  CHECK_THROWS_AS(parallel_for(100, 3, [](std::size_t i) {
                    if (i == 17) throw std::runtime_error("boom");
                  }),
                  std::runtime_error);
}

TEST_CASE("replicate does not depend on the thread count") {
  auto task = [](std::size_t, const RandomStream& r) {
    RandomStream s = r;
    return s.normal();
  };
  const auto a = replicate(task, 5000, 42, 1, 1);
  const auto b = replicate(task, 5000, 42, 1, 6);
  CHECK(a.mean == b.mean);
  CHECK(a.se == b.se);
  const auto one = replicate(task, 1, 42, 1, 1);
  RandomStream direct = replica_stream(42, 1, 0);
  CHECK(one.mean == direct.normal());
}

TEST_CASE("NaN results are excluded") {
  const auto s = replicate([](std::size_t i, const RandomStream&) { return i % 2 ? std::nan("") : 1.0; }, 10, 1, 1, 2);
  CHECK(s.n == 5);
  CHECK(s.excluded == 5);
  CHECK(s.mean == 1.0);
}

TEST_CASE("standard errors shrink like 1/sqrt(n)") {
  auto task = [](std::size_t, const RandomStream& r) {
    RandomStream s = r;
    return s.exponential(1.0);
  };
  const auto s3 = replicate(task, 1000, 9, 2, 2);
  const auto s4 = replicate(task, 10000, 9, 2, 2);
  const auto s5 = replicate(task, 100000, 9, 2, 2);
  CHECK(s3.se / s4.se == doctest::Approx(std::sqrt(10.0)).epsilon(0.2));
  CHECK(s4.se / s5.se == doctest::Approx(std::sqrt(10.0)).epsilon(0.2));
}

TEST_CASE("least squares slope") {
  const auto [b, se] = ols_slope({1, 2, 3, 4}, {3, 5, 7, 9});
  CHECK(b == doctest::Approx(2.0));
  CHECK(se == doctest::Approx(0.0));
  const auto [b2, se2] = ols_slope({0, 1, 2}, {0, 1, 0});
  CHECK(b2 == doctest::Approx(0.0));
  CHECK(se2 > 0.0);
  CHECK_THROWS_AS(ols_slope({1, 1, 1}, {1, 2, 3}), std::invalid_argument);
}
