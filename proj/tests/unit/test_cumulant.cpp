#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "gfx/cumulant.hpp"

using namespace gfx;

namespace {

const double kLn2 = std::log(2.0);

Characteristics config_a(double b = 0.0) {
  return Characteristics::make(0, 0, b, JumpMeasure::atoms({{-kLn2, 1.0}}), JumpMeasure());
}

Characteristics config_d() {
  return Characteristics::make(0, 1, 0, JumpMeasure::power(1.0, 0.5, 1.0), JumpMeasure());
}

// kappa for Config A written out by hand: 2^{1-q} - 1 + q/2
double kappa_a(double q) { return 2.0 * std::pow(2.0, -q) - 1.0 + q / 2.0; }

// grid scan then bisection on the hand-written derivative
double oracle_qm() {
  auto d = [](double q) { return -2.0 * kLn2 * std::pow(2.0, -q) + 0.5; };
  double lo = 0.0;
  for (double q = 0.0; q < 10.0; q += 0.01) {
    if (d(q) > 0.0) {
      lo = q - 0.01;
      break;
    }
  }
  double hi = lo + 0.01;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    (d(mid) > 0.0 ? hi : lo) = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace

TEST_CASE("Config A closed forms") {
  const auto ch = config_a();
  CHECK(kappa(ch, 0.0) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(kappa(ch, 1.0) == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(kappa(ch, 2.0) == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(kappa_dot(ch, 0.0) == doctest::Approx(-2.0 * kLn2 + 0.5).epsilon(1e-14));
  for (double q : {0.3, 1.7, 4.2}) CHECK(kappa(ch, q) == doctest::Approx(kappa_a(q)).epsilon(1e-14));
  const auto qm = find_qm(ch);
  REQUIRE(qm);
  CHECK(std::abs(*qm - oracle_qm()) < 1e-9);
  CHECK(std::abs(*qm - 1.471233) < 1e-6);
  CHECK(kappa(ch, *qm) == doctest::Approx(0.456965).epsilon(1e-6));
  CHECK(psi2(ch, 1.0) == doctest::Approx(0.5));  // pure drift int (1-e^y) Lambda_1 = 1/2
}

TEST_CASE("classification of Configs A and B") {
  const auto a = classify(config_a());
  CHECK(a.hypothesis_H);
  CHECK_FALSE(a.indeterminate);
  REQUIRE(a.q_minus);
  REQUIRE(a.q_plus);
  CHECK(*a.q_minus < *a.q_m);
  CHECK(*a.q_plus > *a.q_m);
  CHECK(a.kappa_dot_minus < 0.0);
  CHECK(a.kappa_dot_plus > 0.0);

  const auto chb = config_a(-2.0);
  CHECK(kappa(chb, 1.0) == doctest::Approx(-1.5));
  const auto b = classify(chb);
  CHECK_FALSE(b.hypothesis_H);
  REQUIRE(b.malthusian_witness);
  CHECK(kappa(chb, *b.malthusian_witness) <= 0.0);
  CHECK_FALSE(find_qm(chb));
}

TEST_CASE("validity gate") {
  // no killing and Psi'(0+) = b >= 0
  CHECK_THROWS_AS(Characteristics::make(0, 0, 1.0, JumpMeasure(), JumpMeasure()), std::invalid_argument);
  CHECK_THROWS_AS(Characteristics::make(-1, 0, 0, JumpMeasure(), JumpMeasure()), std::invalid_argument);
  CHECK_NOTHROW(Characteristics::make(1, 0, 1.0, JumpMeasure(), JumpMeasure()));
}

TEST_CASE("Config D: domain and truncation") {
  const auto ch = config_d();
  CHECK(q_bar(ch) == doctest::Approx(0.5));
  CHECK_FALSE(q_bar_attained(ch));
  CHECK(std::isinf(kappa(ch, 0.25)));
  CHECK_THROWS_AS(kappa_dot(ch, 0.25), std::domain_error);
  for (double eps : {0.1, 0.01}) {
    const auto tr = truncated(ch, eps);
    for (double q = 0.55; q < 4.0; q += 0.15) {
      CHECK(kappa(tr, q) <= kappa(ch, q) + 1e-12);
      CHECK(kappa_truncated(ch, eps, q) == doctest::Approx(kappa(tr, q)).epsilon(1e-12));
      CHECK(psi(tr, q) == doctest::Approx(psi(ch, q)).epsilon(1e-10));
    }
  }
}

TEST_CASE("phi is the shifted cumulant") {
  const auto ch = config_a();
  for (double p : {0.5, 1.0}) CHECK(phi(ch, 1.0, p) == doctest::Approx(std::pow(2.0, -p) - 1.0 + p / 2.0));
}
