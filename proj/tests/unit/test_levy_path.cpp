#include <doctest.h>

#include <cmath>

#include "gfx/levy_path.hpp"

using namespace gfx;

namespace {

PathSpec mixed_spec() {
  PathSpec s;
  s.sigma2 = 0.5;
  s.drift = -0.3;
  s.jumps = JumpMeasure::sum({JumpMeasure::atoms({{-0.4, 1.5}}), JumpMeasure::power(0.5, 0.6, 0.8)});
  s.path_eps = 1e-3;
  s.step = 1.0 / 256;
  return s;
}

}  // namespace

TEST_CASE("exponential moments match the exponent") {
  const auto s = mixed_spec();
  RandomStream r(1, 1);
  for (double q : {0.5, 1.0, 2.0}) {
    const auto [mean, se] = exponent_check(s, q, 1.0, 40000, r);
    const double target = std::exp(spec_exponent(s, q));
    CHECK(std::abs(mean - target) < 4.0 * se + std::abs(small_jump_bias(s, q)) * target);
  }
}

TEST_CASE("killing rate") {
  PathSpec s;
  s.kill_rate = 1.0;
  s.drift = -1.0;
  const int n = 40000;
  int killed = 0;
  // a path is a function of the stream identity, so each sample gets its own
  for (int i = 0; i < n; ++i) {
    RandomStream r(2, std::uint64_t(i));
    killed += sample_path(s, {}, 0.0, 1.0, r).end == PathEnd::Killed;
  }
  const double p = 1.0 - std::exp(-1.0);
  CHECK(std::abs(killed / double(n) - p) < 4.0 * std::sqrt(p * (1 - p) / n));
}

TEST_CASE("path records are consistent") {
  const auto s = mixed_spec();
  RandomStream r(4, 1);
  const auto p = sample_path(s, {}, 0.25, 3.0, r);
  REQUIRE(p.knots.size() >= 2);
  CHECK(p.knots.front().t == 0.0);
  CHECK(p.knots.front().after == 0.25);
  CHECK(p.end_time() == doctest::Approx(3.0));
  for (std::size_t i = 1; i < p.knots.size(); ++i) CHECK(p.knots[i].t >= p.knots[i - 1].t);
  for (const auto& e : p.events) {
    CHECK(e.y < 0.0);
    CHECK(p.log_mass_at(e.t) - p.log_mass_before(e.t) == doctest::Approx(e.y));
  }
}

TEST_CASE("without a Gaussian part knots sit at events only") {
  PathSpec s;
  s.drift = -0.2;
  s.jumps = JumpMeasure::atoms({{-1.0, 2.0}});
  RandomStream r(9, 0);
  const auto p = sample_path(s, {}, 0.0, 5.0, r);
  CHECK(p.knots.size() == p.events.size() + 2);
  // the exponent's compensator adds int (1 - e^y) jumps(dy) to the drift
  const double slope = -0.2 + 2.0 * (1.0 - std::exp(-1.0));
  CHECK(effective_drift(s) == doctest::Approx(slope));
  CHECK(p.log_mass_at(5.0) == doctest::Approx(slope * 5.0 - double(p.events.size())));
}

TEST_CASE("refining the step keeps coarse grid values") {
  PathSpec s;
  s.sigma2 = 1.0;
  s.drift = 0.1;
  s.step = 1.0 / 16;
  PathSpec fine = s;
  fine.step = 1.0 / 128;
  for (std::uint64_t k = 0; k < 20; ++k) {
    RandomStream r1(77, k), r2(77, k);
    const auto a = sample_path(s, {}, 0.0, 2.0, r1);
    const auto b = sample_path(fine, {}, 0.0, 2.0, r2);
    for (int i = 0; i <= 32; ++i) CHECK(a.log_mass_at(i / 16.0) == doctest::Approx(b.log_mass_at(i / 16.0)).epsilon(1e-12));
  }
}

TEST_CASE("births stop the path without applying the jump") {
  PathSpec s;
  s.drift = -0.5;
  BirthProcess births;
  births.rate = 2.0;
  births.mark = [](RandomStream&) { return BirthMark{-0.7, 1}; };
  births.stop_at_first = true;
  RandomStream r(5, 5);
  const auto p = sample_path(s, births, 0.0, 100.0, r);
  REQUIRE(p.end == PathEnd::Birth);
  CHECK(p.events.back().origin == JumpOrigin::Birth);
  CHECK(p.events.back().y == -0.7);
  CHECK(p.final_after() == p.final_before());
  CHECK(dyadic_step(0.001) == 1.0 / 1024);
}
