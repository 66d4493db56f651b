#pragma once

// Data-parallel inner loops. Each kernel has a scalar reference built on the
// C library and an AVX2/FMA variant; the variant is chosen once at runtime
// from CPUID and may be pinned with the GFX_ISA environment variable
// ("scalar" or "avx2").

#include <cstddef>
#include <span>

namespace gfx::kernels {

enum class Isa { Scalar, Avx2 };

/// ISA used by the dispatching entry points below.
Isa active_isa() noexcept;
/// Pin the dispatch (tests only). Throws if the CPU lacks the ISA.
void force_isa(Isa isa);
bool isa_available(Isa isa) noexcept;
const char* isa_name(Isa isa) noexcept;

/// sum_i exp(scale * x[i])
double sum_exp(std::span<const double> x, double scale) noexcept;

/// out[i] = integral over [0, dt[i]] of exp(-alpha * l(s)) ds, where l runs
/// linearly from start[i] to end[i]. This is the Lamperti clock increment of a
/// segment whose log-mass is linear in time.
void loglinear_integrals(std::span<const double> start, std::span<const double> end,
                         std::span<const double> dt, double alpha,
                         std::span<double> out) noexcept;

/// out[i] = exp(scale * x[i])
void exp_scaled(std::span<const double> x, double scale, std::span<double> out) noexcept;

namespace scalar {
double sum_exp(std::span<const double> x, double scale) noexcept;
void loglinear_integrals(std::span<const double> start, std::span<const double> end,
                         std::span<const double> dt, double alpha,
                         std::span<double> out) noexcept;
void exp_scaled(std::span<const double> x, double scale, std::span<double> out) noexcept;
}  // namespace scalar

namespace avx2 {
double sum_exp(std::span<const double> x, double scale) noexcept;
void loglinear_integrals(std::span<const double> start, std::span<const double> end,
                         std::span<const double> dt, double alpha,
                         std::span<double> out) noexcept;
void exp_scaled(std::span<const double> x, double scale, std::span<double> out) noexcept;
}  // namespace avx2

}  // namespace gfx::kernels
