#include <algorithm>
#include <cmath>

#include "reshare/simd/kernels.hpp"

namespace reshare::simd {
namespace {

double sum_scalar(const double* x, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += x[i];
  return s;
}

void recency_weights_scalar(const double* deltas, std::size_t n, double alpha, double floor,
                            double ref, double* out) {
  for (std::size_t i = 0; i < n; ++i) out[i] = std::pow(std::max(deltas[i], floor) / ref, -alpha);
}

void mix_scalar(const double* f, double f_total, const double* r, double r_total, double gamma,
                std::size_t n, double* out) {
  const double rest = 1.0 - gamma;
  for (std::size_t i = 0; i < n; ++i) out[i] = gamma * (f[i] / f_total) + rest * (r[i] / r_total);
}

std::size_t count_le_scalar(const double* values, std::size_t n, double x) {
  std::size_t c = 0;
  for (std::size_t i = 0; i < n; ++i) c += values[i] <= x ? 1 : 0;
  return c;
}

std::size_t count_equal_scalar(const std::uint32_t* a, const std::uint32_t* b, std::size_t n) {
  std::size_t c = 0;
  for (std::size_t i = 0; i < n; ++i) c += a[i] == b[i] ? 1 : 0;
  return c;
}

}  // namespace

const KernelTable& scalar_kernels() {
  static const KernelTable table{Isa::Scalar,       sum_scalar,       recency_weights_scalar,
                                 mix_scalar,        count_le_scalar,  count_equal_scalar};
  return table;
}

}  // namespace reshare::simd
