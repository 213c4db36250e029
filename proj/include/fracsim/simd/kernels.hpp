#pragma once

// Data-parallel inner loops. Every kernel has a scalar reference version and
// vectorized variants; the active table is chosen once at runtime from CPU
// features, or forced with FRACSIM_ISA=scalar|avx2|avx512.

#include <cstddef>
#include <string_view>
#include <vector>

namespace fracsim::simd {

enum class Isa { scalar, avx2, avx512 };

struct Kernels {
  Isa isa;
  std::string_view name;
  /// sum_i a[i] * b[i]
  double (*dot)(const double* a, const double* b, std::size_t n);
  /// y[i] += alpha * x[i]
  void (*axpy)(double alpha, const double* x, double* y, std::size_t n);
  /// max_j (g_ii + g_jj[j] - 2 g_ij[j]) * w[j], or 0 for n == 0. Exact: no
  /// fused operations, so every variant returns the same bits.
  double (*gram_pair_max)(double g_ii, const double* g_jj, const double* g_ij, const double* w,
                          std::size_t n);
};

bool supported(Isa isa) noexcept;
/// Kernel table for a specific ISA; throws std::runtime_error if unsupported.
const Kernels& kernels(Isa isa);
/// Table selected for this process.
const Kernels& active() noexcept;
std::vector<Isa> available_isas();
std::string_view isa_name(Isa isa) noexcept;

namespace detail {
extern const Kernels scalar_kernels;
#if defined(__x86_64__) || defined(_M_X64)
extern const Kernels avx2_kernels;
extern const Kernels avx512_kernels;
#endif
}  // namespace detail

/// y = L x for a row-major lower-triangular n x n matrix L.
void lower_triangular_matvec(const Kernels& k, const double* lower, const double* x, double* y,
                             std::size_t n);
/// y = A x for a row-major dense n x n matrix A.
void dense_matvec(const Kernels& k, const double* a, const double* x, double* y, std::size_t n);

}  // namespace fracsim::simd
