// aarch64 only. No vector log/exp here; recency weights use the scalar loop.

#include <arm_neon.h>

#include <algorithm>
#include <cmath>

#include "reshare/simd/kernels.hpp"

namespace reshare::simd {
namespace {

double sum_neon(const double* x, std::size_t n) {
  float64x2_t a0 = vdupq_n_f64(0.0);
  float64x2_t a1 = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    a0 = vaddq_f64(a0, vld1q_f64(x + i));
    a1 = vaddq_f64(a1, vld1q_f64(x + i + 2));
  }
  double s = vaddvq_f64(vaddq_f64(a0, a1));
  for (; i < n; ++i) s += x[i];
  return s;
}

void recency_weights_neon(const double* deltas, std::size_t n, double alpha, double floor,
                          double ref, double* out) {
  for (std::size_t i = 0; i < n; ++i) out[i] = std::pow(std::max(deltas[i], floor) / ref, -alpha);
}

void mix_neon(const double* f, double f_total, const double* r, double r_total, double gamma,
              std::size_t n, double* out) {
  const double rest = 1.0 - gamma;
  const float64x2_t vg = vdupq_n_f64(gamma);
  const float64x2_t vrest = vdupq_n_f64(rest);
  const float64x2_t vf = vdupq_n_f64(f_total);
  const float64x2_t vr = vdupq_n_f64(r_total);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    const float64x2_t a = vmulq_f64(vg, vdivq_f64(vld1q_f64(f + i), vf));
    const float64x2_t b = vmulq_f64(vrest, vdivq_f64(vld1q_f64(r + i), vr));
    vst1q_f64(out + i, vaddq_f64(a, b));
  }
  for (; i < n; ++i) out[i] = gamma * (f[i] / f_total) + rest * (r[i] / r_total);
}

std::size_t count_le_neon(const double* values, std::size_t n, double x) {
  const float64x2_t vx = vdupq_n_f64(x);
  uint64x2_t acc = vdupq_n_u64(0);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) acc = vsubq_u64(acc, vcleq_f64(vld1q_f64(values + i), vx));
  std::size_t c = static_cast<std::size_t>(vaddvq_u64(acc));
  for (; i < n; ++i) c += values[i] <= x ? 1 : 0;
  return c;
}

std::size_t count_equal_neon(const std::uint32_t* a, const std::uint32_t* b, std::size_t n) {
  uint64x2_t total = vdupq_n_u64(0);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const uint32x4_t eq = vceqq_u32(vld1q_u32(a + i), vld1q_u32(b + i));
    total = vaddq_u64(total, vpaddlq_u32(vshrq_n_u32(eq, 31)));
  }
  std::size_t c = static_cast<std::size_t>(vaddvq_u64(total));
  for (; i < n; ++i) c += a[i] == b[i] ? 1 : 0;
  return c;
}

}  // namespace

const KernelTable& neon_kernels() {
  static const KernelTable table{Isa::Neon,    sum_neon,      recency_weights_neon,
                                 mix_neon,     count_le_neon, count_equal_neon};
  return table;
}

}  // namespace reshare::simd
