#pragma once

#include <cassert>
#include <cstddef>
#include <span>
#include <string_view>

namespace dpgnn::simd {

enum class Isa { scalar, avx2, neon };

/// Inner-loop kernels shared by every dense routine. Each instruction set
/// provides one table; the scalar table is the reference the others are
/// tested against.
///
/// axpy is elementwise and must match the scalar result bit for bit (no
/// fused multiply-add). dot reorders its reduction and is only equal to the
/// scalar result within a relative tolerance of a few ulps times the length.
struct KernelTable {
  Isa isa;
  double (*dot)(const double* a, const double* b, std::size_t n);
  void (*axpy)(double* y, double alpha, const double* x, std::size_t n);
};

std::string_view isa_name(Isa isa);
bool isa_supported(Isa isa);

/// Table for a specific instruction set. Throws std::invalid_argument when
/// the variant is not compiled in or the CPU lacks it.
const KernelTable& kernel_table(Isa isa);

/// Currently selected table. On first use this is the best supported ISA,
/// unless DPGNN_ISA=scalar|avx2|neon is set in the environment.
const KernelTable& active_kernels();

/// Overrides the runtime selection. Not meant to be flipped while other
/// threads are inside a kernel.
void select_isa(Isa isa);

inline double dot(std::span<const double> a, std::span<const double> b) {
  assert(a.size() == b.size());
  return active_kernels().dot(a.data(), b.data(), a.size());
}

/// y += alpha * x
inline void axpy(std::span<double> y, double alpha, std::span<const double> x) {
  assert(y.size() == x.size());
  active_kernels().axpy(y.data(), alpha, x.data(), x.size());
}

/// RAII switch used by the equivalence tests.
class ScopedIsa {
 public:
  explicit ScopedIsa(Isa isa) : previous_(active_kernels().isa) { select_isa(isa); }
  ~ScopedIsa() { select_isa(previous_); }
  ScopedIsa(const ScopedIsa&) = delete;
  ScopedIsa& operator=(const ScopedIsa&) = delete;

 private:
  Isa previous_;
};

}  // namespace dpgnn::simd
