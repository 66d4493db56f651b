#include <cmath>

#include "gfx/kernels.hpp"

namespace gfx::kernels::scalar {

double sum_exp(std::span<const double> x, double scale) noexcept {
  double acc = 0.0;
  for (double v : x) acc += std::exp(scale * v);
  return acc;
}

void loglinear_integrals(std::span<const double> start, std::span<const double> end,
                         std::span<const double> dt, double alpha,
                         std::span<double> out) noexcept {
  for (std::size_t i = 0; i < out.size(); ++i) {
    // dt * exp(-alpha*l0) * (e^h - 1)/h with h = -alpha*(l1 - l0); the
    // difference form avoids overflow in exp(-alpha*l0) * e^h for large |h|.
    const double h = -alpha * (end[i] - start[i]);
    if (std::abs(h) < 0.5) {
      const double ratio = (h == 0.0) ? 1.0 : std::expm1(h) / h;
      out[i] = dt[i] * std::exp(-alpha * start[i]) * ratio;
    } else {
      out[i] = dt[i] * (std::exp(-alpha * end[i]) - std::exp(-alpha * start[i])) / h;
    }
  }
}

void exp_scaled(std::span<const double> x, double scale, std::span<double> out) noexcept {
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = std::exp(scale * x[i]);
}

}  // namespace gfx::kernels::scalar
