#include <atomic>
#include <cstdlib>
#include <string>

#include "reshare/error.hpp"
#include "reshare/simd/kernels.hpp"

namespace reshare::simd {

#if defined(RESHARE_HAVE_AVX2)
const KernelTable& avx2_kernels();
#endif
#if defined(RESHARE_HAVE_NEON)
const KernelTable& neon_kernels();
#endif

std::string_view to_string(Isa isa) {
  switch (isa) {
    case Isa::Scalar: return "scalar";
    case Isa::Avx2: return "avx2";
    case Isa::Neon: return "neon";
  }
  return "unknown";
}

std::optional<Isa> parse_isa(std::string_view name) {
  if (name == "scalar") return Isa::Scalar;
  if (name == "avx2") return Isa::Avx2;
  if (name == "neon") return Isa::Neon;
  return std::nullopt;
}

std::vector<const KernelTable*> available_kernels() {
  std::vector<const KernelTable*> out{&scalar_kernels()};
#if defined(RESHARE_HAVE_AVX2)
  __builtin_cpu_init();
  if (__builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma")) out.push_back(&avx2_kernels());
#endif
#if defined(RESHARE_HAVE_NEON)
  out.push_back(&neon_kernels());
#endif
  return out;
}

namespace {

const KernelTable* find(Isa isa) {
  for (const KernelTable* t : available_kernels())
    if (t->isa == isa) return t;
  return nullptr;
}

const KernelTable* initial_table() {
  if (const char* env = std::getenv("RESHARE_ISA"); env != nullptr && *env != '\0') {
    const auto isa = parse_isa(env);
    if (!isa) throw Error(ErrorCode::InvalidArgument, std::string("unknown RESHARE_ISA ") + env);
    const KernelTable* t = find(*isa);
    if (t == nullptr)
      throw Error(ErrorCode::InvalidArgument, std::string("ISA not available on this CPU: ") + env);
    return t;
  }
  return available_kernels().back();
}

std::atomic<const KernelTable*> g_active{nullptr};

}  // namespace

const KernelTable& active() {
  const KernelTable* t = g_active.load(std::memory_order_acquire);
  if (t == nullptr) {
    const KernelTable* chosen = initial_table();
    g_active.compare_exchange_strong(t, chosen, std::memory_order_acq_rel);
    t = g_active.load(std::memory_order_acquire);
  }
  return *t;
}

void force_isa(Isa isa) {
  const KernelTable* t = find(isa);
  if (t == nullptr)
    throw Error(ErrorCode::InvalidArgument,
                "ISA not available on this CPU: " + std::string(to_string(isa)));
  g_active.store(t, std::memory_order_release);
}

}  // namespace reshare::simd
