#include <doctest.h>

#include <cmath>
#include <vector>

#include "gfx/kernels.hpp"
#include "gfx/random.hpp"

using namespace gfx;

namespace {

struct Inputs {
  std::vector<double> x, a, b, dt;
};

Inputs make_inputs(std::size_t n) {
  RandomStream r(5, 5);
  Inputs in;
  for (std::size_t i = 0; i < n; ++i) {
    in.x.push_back(-20.0 + 25.0 * r.uniform());
    in.a.push_back(-30.0 + 40.0 * r.uniform());
    // every fourth segment is flat, to cover the zero-slope branch
    in.b.push_back(i % 4 == 0 ? in.a.back() : in.a.back() + (r.uniform() - 0.5) * (i % 3 == 0 ? 1e-9 : 6.0));
    in.dt.push_back(1e-3 + 2.0 * r.uniform());
  }
  return in;
}

double rel(double u, double v) { return std::abs(u - v) / std::max({std::abs(u), std::abs(v), 1e-300}); }

}  // namespace

TEST_CASE("loglinear integrals against closed form") {
  std::vector<double> a{0.0, 1.0, -2.0, 3.0}, b{0.0, 2.0, -2.0, 1.0}, dt{1.0, 0.5, 2.0, 1.0}, out(4);
  kernels::scalar::loglinear_integrals(a, b, dt, -1.0, out);
  CHECK(out[0] == doctest::Approx(1.0));
  // integral of e^{1 + 2 s} over [0, 0.5]
  CHECK(out[1] == doctest::Approx((std::exp(2.0) - std::exp(1.0)) / 2.0));
  CHECK(out[2] == doctest::Approx(2.0 * std::exp(-2.0)));
  CHECK(out[3] == doctest::Approx((std::exp(3.0) - std::exp(1.0)) / 2.0).epsilon(1e-12));
  kernels::scalar::loglinear_integrals(a, b, dt, 0.0, out);
  CHECK(out[1] == doctest::Approx(0.5));
}

TEST_CASE("avx2 kernels match the scalar reference") {
  if (!kernels::isa_available(kernels::Isa::Avx2)) {
    MESSAGE("AVX2 not available; equivalence not exercised");
    return;
  }
  for (std::size_t n : {0u, 1u, 3u, 4u, 7u, 64u, 1001u}) {
    const auto in = make_inputs(n);
    CHECK(rel(kernels::scalar::sum_exp(in.x, 0.7), kernels::avx2::sum_exp(in.x, 0.7)) < 1e-13);
    std::vector<double> o1(n), o2(n);
    kernels::scalar::exp_scaled(in.x, -1.3, o1);
    kernels::avx2::exp_scaled(in.x, -1.3, o2);
    for (std::size_t i = 0; i < n; ++i) CHECK(rel(o1[i], o2[i]) < 1e-14);
    for (double alpha : {-1.0, 0.0, 0.5, 2.0}) {
      kernels::scalar::loglinear_integrals(in.a, in.b, in.dt, alpha, o1);
      kernels::avx2::loglinear_integrals(in.a, in.b, in.dt, alpha, o2);
      for (std::size_t i = 0; i < n; ++i) CHECK(rel(o1[i], o2[i]) < 1e-12);
    }
  }
}

TEST_CASE("dispatch follows force_isa") {
  const auto saved = kernels::active_isa();
  kernels::force_isa(kernels::Isa::Scalar);
  CHECK(kernels::active_isa() == kernels::Isa::Scalar);
  std::vector<double> x{0.0, 1.0};
  CHECK(kernels::sum_exp(x, 1.0) == doctest::Approx(1.0 + std::exp(1.0)));
  kernels::force_isa(saved);
}
