#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "gfx/jump_measure.hpp"
#include "gfx/random.hpp"

using namespace gfx;

namespace {

// midpoint rule for int_0^L f(u) u^{-1-beta} du on a graded grid u = L s^4
template <class F>
double power_oracle(F f, double beta, double L, int n) {
  double sum = 0.0;
  for (int i = 0; i < n; ++i) {
    const double s = (i + 0.5) / n;
    const double u = L * s * s * s * s;
    sum += f(u) * std::pow(u, -1.0 - beta) * 4.0 * L * s * s * s / n;
  }
  return sum;
}

}  // namespace

TEST_CASE("atomic measure: masses and moments") {
  const auto m = JumpMeasure::atoms({{-std::log(2.0), 1.0}});
  CHECK(m.total_mass() == doctest::Approx(1.0));
  CHECK(m.frac_moment(1.0) == doctest::Approx(0.5));
  CHECK(m.frac_moment(3.0) == doctest::Approx(0.125));
  CHECK(m.frac_moment_threshold() == 0.0);
  CHECK(m.is_atomic());
  CHECK(m.tail_mass(0.5) == doctest::Approx(1.0));
  CHECK(m.tail_mass(0.7) == 0.0);
  CHECK_THROWS_AS(m.tail_mass(0.0), std::domain_error);
}

TEST_CASE("power measure: quadrature against a graded Riemann sum") {
  const auto m = JumpMeasure::power(1.0, 0.5, 1.0);
  auto f = [](double u) { return std::pow(-std::expm1(-u), 2.0); };
  const double coarse = power_oracle(f, 0.5, 1.0, 200000);
  const double fine = power_oracle(f, 0.5, 1.0, 400000);
  CHECK(std::abs(coarse - fine) / fine < 1e-6);
  CHECK(std::abs(m.frac_moment(2.0) - fine) / fine < 1e-6);
  CHECK(std::isinf(m.frac_moment(0.25)));
  CHECK(std::isinf(m.frac_moment(0.5)));
  CHECK(std::isfinite(m.frac_moment(0.5000001)));
  CHECK(m.frac_moment_threshold() == 0.5);
  CHECK_FALSE(m.threshold_attained());
  CHECK(std::isinf(m.total_mass()));
  // closed form c/beta (eps^-beta - L^-beta)
  CHECK(m.tail_mass(0.01) == doctest::Approx(2.0 * (10.0 - 1.0)));
}

TEST_CASE("restrictions split the measure") {
  const auto m = JumpMeasure::power(2.0, 0.7, 1.5);
  const double eps = 0.05;
  const auto g = Integrand::square();
  CHECK(m.below(eps).integrate(g) + m.above(eps).integrate(g) == doctest::Approx(m.integrate(g)).epsilon(1e-10));
  CHECK(m.below(eps).total_mass() == doctest::Approx(m.tail_mass(eps)));
  const auto t = truncate(m, JumpMeasure(), eps);
  CHECK(t.lambda1_eps.total_mass() == doctest::Approx(m.tail_mass(eps)));
  CHECK(t.lambda2_eps.integrate(g) == doctest::Approx(m.above(eps).integrate(g)).epsilon(1e-10));
}

TEST_CASE("sampling follows the normalized restriction") {
  const auto m = JumpMeasure::power(1.0, 0.5, 1.0);
  const double eps = 0.1;
  RandomStream r(3, 1);
  const int n = 200000;
  double s = 0.0;
  for (int i = 0; i < n; ++i) {
    const double y = m.sample_restricted(eps, r);
    REQUIRE(y < -eps);
    REQUIRE(y >= -1.0);
    s += y;
  }
  // E[y] = -int_eps^1 u u^{-1.5} du / tail = -2(1 - sqrt(eps)) / (2 (eps^-0.5 - 1))
  const double expect = -(1.0 - std::sqrt(eps)) / (1.0 / std::sqrt(eps) - 1.0);
  CHECK(s / n == doctest::Approx(expect).epsilon(0.01));
}

TEST_CASE("tilted measure reweights atoms") {
  const auto m = JumpMeasure::tilted(2.0, JumpMeasure::atoms({{-1.0, 3.0}}));
  CHECK(m.total_mass() == doctest::Approx(3.0 * std::exp(-2.0)));
  const auto atoms = m.flatten_atoms();
  REQUIRE(atoms.size() == 1);
  CHECK(atoms[0].weight == doctest::Approx(3.0 * std::exp(-2.0)));
}

TEST_CASE("invalid measures are rejected") {
  CHECK_THROWS_AS(JumpMeasure::atoms({{0.5, 1.0}}), std::invalid_argument);
  CHECK_THROWS_AS(JumpMeasure::atoms({{-0.5, -1.0}}), std::invalid_argument);
  CHECK_THROWS_AS(JumpMeasure::power(1.0, 2.5, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(JumpMeasure::power(1.0, 0.5, -1.0), std::invalid_argument);
}
