#include <atomic>
#include <cstdlib>
#include <stdexcept>
#include <string_view>

#include "gfx/kernels.hpp"

namespace gfx::kernels {

namespace {

bool cpu_has_avx2() noexcept {
#if defined(GFX_HAVE_AVX2_KERNELS) && (defined(__x86_64__) || defined(__i386__))
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

Isa detect() noexcept {
  if (const char* env = std::getenv("GFX_ISA")) {
    if (std::string_view(env) == "scalar") return Isa::Scalar;
  }
  return cpu_has_avx2() ? Isa::Avx2 : Isa::Scalar;
}

std::atomic<Isa>& current() noexcept {
  static std::atomic<Isa> isa{detect()};
  return isa;
}

}  // namespace

Isa active_isa() noexcept { return current().load(std::memory_order_relaxed); }

bool isa_available(Isa isa) noexcept { return isa == Isa::Scalar || cpu_has_avx2(); }

void force_isa(Isa isa) {
  if (!isa_available(isa)) throw std::runtime_error("requested ISA is not available on this CPU");
  current().store(isa, std::memory_order_relaxed);
}

const char* isa_name(Isa isa) noexcept { return isa == Isa::Avx2 ? "avx2" : "scalar"; }

#if defined(GFX_HAVE_AVX2_KERNELS)
#define GFX_DISPATCH(fn, ...) \
  (active_isa() == Isa::Avx2 ? avx2::fn(__VA_ARGS__) : scalar::fn(__VA_ARGS__))
#else
#define GFX_DISPATCH(fn, ...) scalar::fn(__VA_ARGS__)
#endif

double sum_exp(std::span<const double> x, double scale) noexcept {
  return GFX_DISPATCH(sum_exp, x, scale);
}

void loglinear_integrals(std::span<const double> start, std::span<const double> end,
                         std::span<const double> dt, double alpha,
                         std::span<double> out) noexcept {
  GFX_DISPATCH(loglinear_integrals, start, end, dt, alpha, out);
}

void exp_scaled(std::span<const double> x, double scale, std::span<double> out) noexcept {
  GFX_DISPATCH(exp_scaled, x, scale, out);
}

}  // namespace gfx::kernels
