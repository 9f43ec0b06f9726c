#include <atomic>
#include <cstdlib>
#include <stdexcept>
#include <string>

#include "dpgnn/simd/kernels.hpp"
#include "simd/variants.hpp"

namespace dpgnn::simd {

namespace {

constexpr KernelTable kScalar{Isa::scalar, detail::dot_scalar, detail::axpy_scalar};
#if defined(DPGNN_HAVE_AVX2)
constexpr KernelTable kAvx2{Isa::avx2, detail::dot_avx2, detail::axpy_avx2};
#endif
#if defined(DPGNN_HAVE_NEON)
constexpr KernelTable kNeon{Isa::neon, detail::dot_neon, detail::axpy_neon};
#endif

const KernelTable* best_table() {
  if (const char* env = std::getenv("DPGNN_ISA")) {
    const std::string wanted(env);
    for (Isa isa : {Isa::scalar, Isa::avx2, Isa::neon}) {
      if (wanted == isa_name(isa) && isa_supported(isa)) return &kernel_table(isa);
    }
  }
  if (isa_supported(Isa::avx2)) return &kernel_table(Isa::avx2);
  if (isa_supported(Isa::neon)) return &kernel_table(Isa::neon);
  return &kScalar;
}

std::atomic<const KernelTable*>& current() {
  static std::atomic<const KernelTable*> table{best_table()};
  return table;
}

}  // namespace

std::string_view isa_name(Isa isa) {
  switch (isa) {
    case Isa::scalar: return "scalar";
    case Isa::avx2: return "avx2";
    case Isa::neon: return "neon";
  }
  return "unknown";
}

bool isa_supported(Isa isa) {
  switch (isa) {
    case Isa::scalar: return true;
    case Isa::avx2:
#if defined(DPGNN_HAVE_AVX2)
      return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
      return false;
#endif
    case Isa::neon:
#if defined(DPGNN_HAVE_NEON)
      return true;
#else
      return false;
#endif
  }
  return false;
}

const KernelTable& kernel_table(Isa isa) {
  if (!isa_supported(isa)) {
    throw std::invalid_argument("kernel variant not available on this machine: " + std::string(isa_name(isa)));
  }
  switch (isa) {
#if defined(DPGNN_HAVE_AVX2)
    case Isa::avx2: return kAvx2;
#endif
#if defined(DPGNN_HAVE_NEON)
    case Isa::neon: return kNeon;
#endif
    default: return kScalar;
  }
}

const KernelTable& active_kernels() { return *current().load(std::memory_order_acquire); }

void select_isa(Isa isa) { current().store(&kernel_table(isa), std::memory_order_release); }

}  // namespace dpgnn::simd
