// Compiled with -mavx512f -mfma; only reached after a runtime CPU check.
#include <immintrin.h>

#include "fracsim/simd/kernels.hpp"

namespace fracsim::simd::detail {
namespace {

double dot(const double* a, const double* b, std::size_t n) {
  __m512d acc0 = _mm512_setzero_pd();
  __m512d acc1 = _mm512_setzero_pd();
  std::size_t i = 0;
  for (; i + 16 <= n; i += 16) {
    acc0 = _mm512_fmadd_pd(_mm512_loadu_pd(a + i), _mm512_loadu_pd(b + i), acc0);
    acc1 = _mm512_fmadd_pd(_mm512_loadu_pd(a + i + 8), _mm512_loadu_pd(b + i + 8), acc1);
  }
  if (i + 8 <= n) {
    acc0 = _mm512_fmadd_pd(_mm512_loadu_pd(a + i), _mm512_loadu_pd(b + i), acc0);
    i += 8;
  }
  if (i < n) {
    const __mmask8 m = static_cast<__mmask8>((1u << (n - i)) - 1u);
    acc1 = _mm512_fmadd_pd(_mm512_maskz_loadu_pd(m, a + i), _mm512_maskz_loadu_pd(m, b + i), acc1);
  }
  return _mm512_reduce_add_pd(_mm512_add_pd(acc0, acc1));
}

void axpy(double alpha, const double* x, double* y, std::size_t n) {
  const __m512d a = _mm512_set1_pd(alpha);
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8)
    _mm512_storeu_pd(y + i, _mm512_fmadd_pd(a, _mm512_loadu_pd(x + i), _mm512_loadu_pd(y + i)));
  if (i < n) {
    const __mmask8 m = static_cast<__mmask8>((1u << (n - i)) - 1u);
    _mm512_mask_storeu_pd(
        y + i, m, _mm512_fmadd_pd(a, _mm512_maskz_loadu_pd(m, x + i), _mm512_maskz_loadu_pd(m, y + i)));
  }
}

double gram_pair_max(double g_ii, const double* g_jj, const double* g_ij, const double* w,
                     std::size_t n) {
  const __m512d gi = _mm512_set1_pd(g_ii);
  __m512d best = _mm512_setzero_pd();
  std::size_t j = 0;
  for (; j + 8 <= n; j += 8) {
    const __m512d gij = _mm512_loadu_pd(g_ij + j);
    const __m512d num = _mm512_sub_pd(_mm512_add_pd(gi, _mm512_loadu_pd(g_jj + j)),
                                      _mm512_add_pd(gij, gij));
    best = _mm512_max_pd(_mm512_mul_pd(num, _mm512_loadu_pd(w + j)), best);
  }
  double b = _mm512_reduce_max_pd(best);
  for (; j < n; ++j) {
    const double v = ((g_ii + g_jj[j]) - (g_ij[j] + g_ij[j])) * w[j];
    b = v > b ? v : b;
  }
  return b;
}

}  // namespace

const Kernels avx512_kernels{Isa::avx512, "avx512", &dot, &axpy, &gram_pair_max};

}  // namespace fracsim::simd::detail
