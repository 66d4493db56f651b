// Compiled with -mavx2 -mfma; only reached through the runtime dispatcher.

#include <immintrin.h>

#include <array>
#include <cmath>

#include "gfx/kernels.hpp"

namespace gfx::kernels::avx2 {

namespace {

// exp(x) by Cody-Waite reduction x = n*ln2 + r, |r| <= ln2/2, a degree-13
// Taylor polynomial for e^r and a two-step 2^n scaling that covers the
// subnormal and overflow ranges.
inline __m256d exp_pd(__m256d x) {
  const __m256d log2e = _mm256_set1_pd(1.4426950408889634);
  const __m256d ln2_hi = _mm256_set1_pd(6.93147180369123816490e-01);
  const __m256d ln2_lo = _mm256_set1_pd(1.90821492927058770002e-10);
  x = _mm256_max_pd(_mm256_min_pd(x, _mm256_set1_pd(1400.0)), _mm256_set1_pd(-1400.0));

  const __m256d n = _mm256_round_pd(_mm256_mul_pd(x, log2e),
                                    _MM_FROUND_TO_NEAREST_INT | _MM_FROUND_NO_EXC);
  __m256d r = _mm256_fnmadd_pd(n, ln2_hi, x);
  r = _mm256_fnmadd_pd(n, ln2_lo, r);

  static constexpr std::array<double, 14> c = {
      1.0,
      1.0,
      1.0 / 2.0,
      1.0 / 6.0,
      1.0 / 24.0,
      1.0 / 120.0,
      1.0 / 720.0,
      1.0 / 5040.0,
      1.0 / 40320.0,
      1.0 / 362880.0,
      1.0 / 3628800.0,
      1.0 / 39916800.0,
      1.0 / 479001600.0,
      1.0 / 6227020800.0};
  __m256d p = _mm256_set1_pd(c[13]);
  for (int k = 12; k >= 0; --k) p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(c[k]));

  const __m128i ni = _mm256_cvtpd_epi32(n);
  const __m128i n1 = _mm_srai_epi32(ni, 1);
  const __m128i n2 = _mm_sub_epi32(ni, n1);
  const __m256i bias = _mm256_set1_epi64x(1023);
  const __m256i e1 = _mm256_slli_epi64(_mm256_add_epi64(_mm256_cvtepi32_epi64(n1), bias), 52);
  const __m256i e2 = _mm256_slli_epi64(_mm256_add_epi64(_mm256_cvtepi32_epi64(n2), bias), 52);
  p = _mm256_mul_pd(p, _mm256_castsi256_pd(e1));
  return _mm256_mul_pd(p, _mm256_castsi256_pd(e2));
}

// (e^h - 1)/h for |h| < 0.5
inline __m256d expm1_ratio_pd(__m256d h) {
  // 1/(k+1)! for k = 0..16
  static constexpr std::array<double, 17> c = {
      1.0,
      1.0 / 2.0,
      1.0 / 6.0,
      1.0 / 24.0,
      1.0 / 120.0,
      1.0 / 720.0,
      1.0 / 5040.0,
      1.0 / 40320.0,
      1.0 / 362880.0,
      1.0 / 3628800.0,
      1.0 / 39916800.0,
      1.0 / 479001600.0,
      1.0 / 6227020800.0,
      1.0 / 87178291200.0,
      1.0 / 1307674368000.0,
      1.0 / 20922789888000.0,
      1.0 / 355687428096000.0};
  __m256d p = _mm256_set1_pd(c[16]);
  for (int k = 15; k >= 0; --k) p = _mm256_fmadd_pd(p, h, _mm256_set1_pd(c[k]));
  return p;
}

inline __m256d loglinear_pd(__m256d a, __m256d b, __m256d d, __m256d neg_alpha) {
  const __m256d h = _mm256_mul_pd(neg_alpha, _mm256_sub_pd(b, a));
  const __m256d e0 = exp_pd(_mm256_mul_pd(neg_alpha, a));
  const __m256d e1 = exp_pd(_mm256_mul_pd(neg_alpha, b));
  const __m256d small = _mm256_mul_pd(_mm256_mul_pd(d, e0), expm1_ratio_pd(h));
  const __m256d large = _mm256_div_pd(_mm256_mul_pd(d, _mm256_sub_pd(e1, e0)), h);
  const __m256d abs_h = _mm256_andnot_pd(_mm256_set1_pd(-0.0), h);
  const __m256d use_small = _mm256_cmp_pd(abs_h, _mm256_set1_pd(0.5), _CMP_LT_OQ);
  return _mm256_blendv_pd(large, small, use_small);
}

}  // namespace

double sum_exp(std::span<const double> x, double scale) noexcept {
  const __m256d s = _mm256_set1_pd(scale);
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= x.size(); i += 4) {
    acc = _mm256_add_pd(acc, exp_pd(_mm256_mul_pd(s, _mm256_loadu_pd(x.data() + i))));
  }
  alignas(32) std::array<double, 4> lanes{};
  _mm256_store_pd(lanes.data(), acc);
  double total = (lanes[0] + lanes[1]) + (lanes[2] + lanes[3]);
  if (i < x.size()) {
    alignas(32) std::array<double, 4> tail{};
    const std::size_t rest = x.size() - i;
    for (std::size_t j = 0; j < rest; ++j) tail[j] = x[i + j];
    _mm256_store_pd(tail.data(), exp_pd(_mm256_mul_pd(s, _mm256_load_pd(tail.data()))));
    for (std::size_t j = 0; j < rest; ++j) total += tail[j];
  }
  return total;
}

void loglinear_integrals(std::span<const double> start, std::span<const double> end,
                         std::span<const double> dt, double alpha,
                         std::span<double> out) noexcept {
  const __m256d na = _mm256_set1_pd(-alpha);
  std::size_t i = 0;
  for (; i + 4 <= out.size(); i += 4) {
    _mm256_storeu_pd(out.data() + i,
                     loglinear_pd(_mm256_loadu_pd(start.data() + i),
                                  _mm256_loadu_pd(end.data() + i),
                                  _mm256_loadu_pd(dt.data() + i), na));
  }
  if (i < out.size()) {
    alignas(32) std::array<double, 4> a{}, b{}, d{}, r{};
    const std::size_t rest = out.size() - i;
    for (std::size_t j = 0; j < rest; ++j) {
      a[j] = start[i + j];
      b[j] = end[i + j];
      d[j] = dt[i + j];
    }
    _mm256_store_pd(r.data(), loglinear_pd(_mm256_load_pd(a.data()), _mm256_load_pd(b.data()),
                                           _mm256_load_pd(d.data()), na));
    for (std::size_t j = 0; j < rest; ++j) out[i + j] = r[j];
  }
}

void exp_scaled(std::span<const double> x, double scale, std::span<double> out) noexcept {
  const __m256d s = _mm256_set1_pd(scale);
  std::size_t i = 0;
  for (; i + 4 <= out.size(); i += 4) {
    _mm256_storeu_pd(out.data() + i, exp_pd(_mm256_mul_pd(s, _mm256_loadu_pd(x.data() + i))));
  }
  if (i < out.size()) {
    alignas(32) std::array<double, 4> t{};
    const std::size_t rest = out.size() - i;
    for (std::size_t j = 0; j < rest; ++j) t[j] = x[i + j];
    _mm256_store_pd(t.data(), exp_pd(_mm256_mul_pd(s, _mm256_load_pd(t.data()))));
    for (std::size_t j = 0; j < rest; ++j) out[i + j] = t[j];
  }
}

}  // namespace gfx::kernels::avx2
