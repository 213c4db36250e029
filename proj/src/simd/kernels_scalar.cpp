#include "fracsim/simd/kernels.hpp"

namespace fracsim::simd::detail {
namespace {

double dot(const double* a, const double* b, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += a[i] * b[i];
  return s;
}

void axpy(double alpha, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

double gram_pair_max(double g_ii, const double* g_jj, const double* g_ij, const double* w,
                     std::size_t n) {
  double best = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    const double v = ((g_ii + g_jj[j]) - (g_ij[j] + g_ij[j])) * w[j];
    best = v > best ? v : best;
  }
  return best;
}

}  // namespace

const Kernels scalar_kernels{Isa::scalar, "scalar", &dot, &axpy, &gram_pair_max};

}  // namespace fracsim::simd::detail
