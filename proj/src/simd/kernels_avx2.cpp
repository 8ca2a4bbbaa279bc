// Built with -mavx2 -mfma; only reached after a runtime CPU check.

#include <immintrin.h>

#include <algorithm>
#include <bit>
#include <cmath>

#include "reshare/simd/kernels.hpp"

namespace reshare::simd {
namespace {

inline double hsum(__m256d v) {
  const __m128d lo = _mm256_castpd256_pd128(v);
  const __m128d hi = _mm256_extractf128_pd(v, 1);
  const __m128d s = _mm_add_pd(lo, hi);
  return _mm_cvtsd_f64(_mm_add_sd(s, _mm_unpackhi_pd(s, s)));
}

double sum_avx2(const double* x, std::size_t n) {
  __m256d a0 = _mm256_setzero_pd();
  __m256d a1 = _mm256_setzero_pd();
  __m256d a2 = _mm256_setzero_pd();
  __m256d a3 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 16 <= n; i += 16) {
    a0 = _mm256_add_pd(a0, _mm256_loadu_pd(x + i));
    a1 = _mm256_add_pd(a1, _mm256_loadu_pd(x + i + 4));
    a2 = _mm256_add_pd(a2, _mm256_loadu_pd(x + i + 8));
    a3 = _mm256_add_pd(a3, _mm256_loadu_pd(x + i + 12));
  }
  for (; i + 4 <= n; i += 4) a0 = _mm256_add_pd(a0, _mm256_loadu_pd(x + i));
  double s = hsum(_mm256_add_pd(_mm256_add_pd(a0, a1), _mm256_add_pd(a2, a3)));
  for (; i < n; ++i) s += x[i];
  return s;
}

// Natural log for positive normal inputs, fdlibm reduction and minimax
// polynomial (< 1 ulp).
inline __m256d log_pd(__m256d x) {
  const __m256i bits = _mm256_castpd_si256(x);
  const __m256d two52 = _mm256_set1_pd(4503599627370496.0);
  const __m256d biased = _mm256_sub_pd(
      _mm256_castsi256_pd(_mm256_or_si256(_mm256_srli_epi64(bits, 52), _mm256_castpd_si256(two52))),
      two52);
  __m256d k = _mm256_sub_pd(biased, _mm256_set1_pd(1023.0));
  __m256d m = _mm256_castsi256_pd(
      _mm256_or_si256(_mm256_and_si256(bits, _mm256_set1_epi64x(0x000FFFFFFFFFFFFFLL)),
                      _mm256_set1_epi64x(0x3FF0000000000000LL)));
  const __m256d big = _mm256_cmp_pd(m, _mm256_set1_pd(1.4142135623730951), _CMP_GT_OQ);
  m = _mm256_blendv_pd(m, _mm256_mul_pd(m, _mm256_set1_pd(0.5)), big);
  k = _mm256_add_pd(k, _mm256_and_pd(big, _mm256_set1_pd(1.0)));

  const __m256d f = _mm256_sub_pd(m, _mm256_set1_pd(1.0));
  const __m256d s = _mm256_div_pd(f, _mm256_add_pd(_mm256_set1_pd(2.0), f));
  const __m256d z = _mm256_mul_pd(s, s);
  const __m256d w = _mm256_mul_pd(z, z);
  __m256d t1 = _mm256_fmadd_pd(w, _mm256_set1_pd(1.531383769920937332e-01),
                               _mm256_set1_pd(2.222219843214978396e-01));
  t1 = _mm256_fmadd_pd(w, t1, _mm256_set1_pd(3.999999999940941908e-01));
  t1 = _mm256_mul_pd(w, t1);
  __m256d t2 = _mm256_fmadd_pd(w, _mm256_set1_pd(1.479819860511658591e-01),
                               _mm256_set1_pd(1.818357216161805012e-01));
  t2 = _mm256_fmadd_pd(w, t2, _mm256_set1_pd(2.857142874366239149e-01));
  t2 = _mm256_fmadd_pd(w, t2, _mm256_set1_pd(6.666666666666735130e-01));
  t2 = _mm256_mul_pd(z, t2);
  const __m256d r = _mm256_add_pd(t2, t1);
  const __m256d hfsq = _mm256_mul_pd(_mm256_set1_pd(0.5), _mm256_mul_pd(f, f));

  const __m256d ln2_hi = _mm256_set1_pd(6.93147180369123816490e-01);
  const __m256d ln2_lo = _mm256_set1_pd(1.90821492927058770002e-10);
  // k*ln2_hi - ((hfsq - (s*(hfsq+R) + k*ln2_lo)) - f)
  const __m256d inner =
      _mm256_add_pd(_mm256_mul_pd(s, _mm256_add_pd(hfsq, r)), _mm256_mul_pd(k, ln2_lo));
  return _mm256_sub_pd(_mm256_mul_pd(k, ln2_hi), _mm256_sub_pd(_mm256_sub_pd(hfsq, inner), f));
}

// exp for |y| <= 700, fdlibm rational kernel.
inline __m256d exp_pd(__m256d y) {
  y = _mm256_max_pd(_mm256_min_pd(y, _mm256_set1_pd(700.0)), _mm256_set1_pd(-700.0));
  const __m256d n = _mm256_round_pd(_mm256_mul_pd(y, _mm256_set1_pd(1.44269504088896338700e+00)),
                                    _MM_FROUND_TO_NEAREST_INT | _MM_FROUND_NO_EXC);
  const __m256d hi = _mm256_sub_pd(y, _mm256_mul_pd(n, _mm256_set1_pd(6.93147180369123816490e-01)));
  const __m256d lo = _mm256_mul_pd(n, _mm256_set1_pd(1.90821492927058770002e-10));
  const __m256d r = _mm256_sub_pd(hi, lo);
  const __m256d t = _mm256_mul_pd(r, r);
  __m256d p = _mm256_fmadd_pd(t, _mm256_set1_pd(4.13813679705723846039e-08),
                              _mm256_set1_pd(-1.65339022054652515390e-06));
  p = _mm256_fmadd_pd(t, p, _mm256_set1_pd(6.61375632143793436117e-05));
  p = _mm256_fmadd_pd(t, p, _mm256_set1_pd(-2.77777777770155933842e-03));
  p = _mm256_fmadd_pd(t, p, _mm256_set1_pd(1.66666666666666019037e-01));
  const __m256d c = _mm256_sub_pd(r, _mm256_mul_pd(t, p));
  // 1 - ((lo - (r*c)/(2-c)) - hi)
  const __m256d q = _mm256_div_pd(_mm256_mul_pd(r, c), _mm256_sub_pd(_mm256_set1_pd(2.0), c));
  const __m256d e = _mm256_sub_pd(_mm256_set1_pd(1.0), _mm256_sub_pd(_mm256_sub_pd(lo, q), hi));

  const __m128i ni = _mm256_cvtpd_epi32(n);
  const __m256i scale = _mm256_slli_epi64(
      _mm256_cvtepi32_epi64(_mm_add_epi32(ni, _mm_set1_epi32(1023))), 52);
  return _mm256_mul_pd(e, _mm256_castsi256_pd(scale));
}

void recency_weights_avx2(const double* deltas, std::size_t n, double alpha, double floor,
                          double ref, double* out) {
  const __m256d vfloor = _mm256_set1_pd(floor);
  const __m256d vref = _mm256_set1_pd(ref);
  const __m256d vneg = _mm256_set1_pd(-alpha);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d x = _mm256_div_pd(_mm256_max_pd(_mm256_loadu_pd(deltas + i), vfloor), vref);
    _mm256_storeu_pd(out + i, exp_pd(_mm256_mul_pd(vneg, log_pd(x))));
  }
  for (; i < n; ++i) out[i] = std::pow(std::max(deltas[i], floor) / ref, -alpha);
}

void mix_avx2(const double* f, double f_total, const double* r, double r_total, double gamma,
              std::size_t n, double* out) {
  const double rest = 1.0 - gamma;
  const __m256d vg = _mm256_set1_pd(gamma);
  const __m256d vrest = _mm256_set1_pd(rest);
  const __m256d vf = _mm256_set1_pd(f_total);
  const __m256d vr = _mm256_set1_pd(r_total);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d a = _mm256_mul_pd(vg, _mm256_div_pd(_mm256_loadu_pd(f + i), vf));
    const __m256d b = _mm256_mul_pd(vrest, _mm256_div_pd(_mm256_loadu_pd(r + i), vr));
    _mm256_storeu_pd(out + i, _mm256_add_pd(a, b));
  }
  for (; i < n; ++i) out[i] = gamma * (f[i] / f_total) + rest * (r[i] / r_total);
}

std::size_t count_le_avx2(const double* values, std::size_t n, double x) {
  const __m256d vx = _mm256_set1_pd(x);
  std::size_t c = 0;
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const int mask = _mm256_movemask_pd(_mm256_cmp_pd(_mm256_loadu_pd(values + i), vx, _CMP_LE_OQ));
    c += static_cast<std::size_t>(std::popcount(static_cast<unsigned>(mask)));
  }
  for (; i < n; ++i) c += values[i] <= x ? 1 : 0;
  return c;
}

std::size_t count_equal_avx2(const std::uint32_t* a, const std::uint32_t* b, std::size_t n) {
  std::size_t c = 0;
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    const __m256i va = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(a + i));
    const __m256i vb = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(b + i));
    const int mask = _mm256_movemask_ps(_mm256_castsi256_ps(_mm256_cmpeq_epi32(va, vb)));
    c += static_cast<std::size_t>(std::popcount(static_cast<unsigned>(mask)));
  }
  for (; i < n; ++i) c += a[i] == b[i] ? 1 : 0;
  return c;
}

}  // namespace

const KernelTable& avx2_kernels() {
  static const KernelTable table{Isa::Avx2,    sum_avx2,      recency_weights_avx2,
                                 mix_avx2,     count_le_avx2, count_equal_avx2};
  return table;
}

}  // namespace reshare::simd
