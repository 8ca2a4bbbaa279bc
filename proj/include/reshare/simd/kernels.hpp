#pragma once

// Inner loops of parent inference and realization comparison. Each kernel has
// a scalar reference and optional vector variants; the active table is picked
// once per process from the CPU features, or forced with RESHARE_ISA.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

namespace reshare::simd {

enum class Isa { Scalar, Avx2, Neon };

std::string_view to_string(Isa isa);
std::optional<Isa> parse_isa(std::string_view name);

struct KernelTable {
  Isa isa;

  double (*sum)(const double* x, std::size_t n);

  // out[j] = (max(deltas[j], floor) / ref)^(-alpha)
  void (*recency_weights)(const double* deltas, std::size_t n, double alpha, double floor,
                          double ref, double* out);

  // out[j] = gamma * (f[j] / f_total) + (1 - gamma) * (r[j] / r_total)
  void (*mix)(const double* f, double f_total, const double* r, double r_total, double gamma,
              std::size_t n, double* out);

  // Number of entries with values[j] <= x.
  std::size_t (*count_le)(const double* values, std::size_t n, double x);

  // Number of positions where a[j] == b[j].
  std::size_t (*count_equal)(const std::uint32_t* a, const std::uint32_t* b, std::size_t n);
};

const KernelTable& scalar_kernels();

/// Tables usable on this CPU, scalar first.
std::vector<const KernelTable*> available_kernels();

/// The process-wide table. Throws if a forced ISA is unavailable.
const KernelTable& active();
void force_isa(Isa isa);

// Span front-ends over the active table.
inline double sum(std::span<const double> x) { return active().sum(x.data(), x.size()); }

inline std::size_t count_le(std::span<const double> values, double x) {
  return active().count_le(values.data(), values.size(), x);
}

inline std::size_t count_equal(std::span<const std::uint32_t> a,
                               std::span<const std::uint32_t> b) {
  return active().count_equal(a.data(), b.data(), a.size() < b.size() ? a.size() : b.size());
}

}  // namespace reshare::simd
