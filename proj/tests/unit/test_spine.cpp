#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "gfx/spine.hpp"

using namespace gfx;

namespace {

const double kLn2 = std::log(2.0);

Characteristics config_a(double alpha = 0.0) {
  return Characteristics::make(0, 0, 0, JumpMeasure::atoms({{-kLn2, 1.0}}), JumpMeasure(), alpha);
}

}  // namespace

TEST_CASE("spine exponent equals the shifted cumulant") {
  const auto ch = Characteristics::make(0.2, 0.7, -0.3, JumpMeasure::atoms({{-0.5, 1.0}, {-2.0, 0.4}}),
                                        JumpMeasure::atoms({{-0.3, 1.1}}));
  for (double q : {0.5, 1.0, 2.5}) {
    const auto spec = make_spine_spec(ch, q);
    CHECK(exponent_gap(spec, {0.25, 0.5, 1.0, 2.0}) < 1e-12);
  }
  const auto spec = make_spine_spec(config_a(), 1.0);
  CHECK(spec.birth_rate == doctest::Approx(1.0));
  CHECK(spec.kappa_q == doctest::Approx(0.5));
}

TEST_CASE("infinite birth intensity is refused") {
  const auto d = Characteristics::make(0, 1, 0, JumpMeasure::power(1.0, 0.5, 1.0), JumpMeasure());
  CHECK_THROWS_AS(make_spine_spec(d, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(make_spine_spec(config_a(), 0.0), std::invalid_argument);
}

TEST_CASE("siblings carry the complementary mass") {
  const auto spec = make_spine_spec(config_a(-1.0), 1.0);
  const auto real = simulate_spine(spec, 1.0, 20.0, -1.0, RandomStream(4, 2));
  REQUIRE(!real.siblings.empty());
  std::size_t j = 0;
  for (const auto& s : real.siblings) {
    while (real.path.knots[j].t < s.chi_time) ++j;
    const auto& k = real.path.knots[j];
    CHECK(std::exp(k.after) + std::exp(s.log_mass) == doctest::Approx(std::exp(k.before)));
    CHECK(s.log_mass == doctest::Approx(std::log(0.5) + k.before));
  }
  CHECK(real.clock.size() == real.path.knots.size());
}

TEST_CASE("birth marks follow the tilted weights") {
  // q = 2: stay weight 1/4, move weight 1/4, so half the births switch
  const auto spec = make_spine_spec(config_a(), 2.0);
  RandomStream r(2, 2);
  int moves = 0;
  const int n = 100000;
  for (int i = 0; i < n; ++i) moves += sample_spine_birth(spec, r).branch;
  CHECK(std::abs(moves / double(n) - 0.5) < 0.01);
}

TEST_CASE("lifetime needs matching signs") {
  const auto ch = config_a(-1.0);
  const auto spec = make_spine_spec(ch, 0.5);  // kappa'(0.5) < 0
  REQUIRE(spec.kappa_dot_q < 0.0);
  const auto real = simulate_spine(spec, 1.0, 200.0, -1.0, RandomStream(1, 1));
  const auto life = spine_lifetime(spec, real);
  CHECK(life.estimate > 0.0);
  CHECK(std::isfinite(life.estimate));
  const auto wrong = simulate_spine(spec, 1.0, 10.0, 1.0, RandomStream(1, 1));
  CHECK_THROWS_AS(spine_lifetime(spec, wrong), std::invalid_argument);
}
