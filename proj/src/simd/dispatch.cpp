#include <cstdlib>
#include <stdexcept>
#include <string>

#include "fracsim/simd/kernels.hpp"

namespace fracsim::simd {
namespace {

#if defined(__x86_64__) || defined(_M_X64)
constexpr bool kX86 = true;
#else
constexpr bool kX86 = false;
#endif

const Kernels& select_from_environment() {
  if (const char* forced = std::getenv("FRACSIM_ISA")) {
    const std::string name(forced);
    for (Isa isa : {Isa::scalar, Isa::avx2, Isa::avx512})
      if (name == isa_name(isa) && supported(isa)) return kernels(isa);
  }
  if (supported(Isa::avx2)) return kernels(Isa::avx2);
  return kernels(Isa::scalar);
}

}  // namespace

std::string_view isa_name(Isa isa) noexcept {
  switch (isa) {
    case Isa::scalar: return "scalar";
    case Isa::avx2: return "avx2";
    case Isa::avx512: return "avx512";
  }
  return "unknown";
}

bool supported(Isa isa) noexcept {
  if (isa == Isa::scalar) return true;
  if constexpr (kX86) {
#if defined(__x86_64__) || defined(_M_X64)
    __builtin_cpu_init();
    if (isa == Isa::avx2) return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
    if (isa == Isa::avx512) return __builtin_cpu_supports("avx512f") && __builtin_cpu_supports("fma");
#endif
  }
  return false;
}

const Kernels& kernels(Isa isa) {
  if (!supported(isa))
    throw std::runtime_error("SIMD variant " + std::string(isa_name(isa)) + " not supported here");
  switch (isa) {
#if defined(__x86_64__) || defined(_M_X64)
    case Isa::avx2: return detail::avx2_kernels;
    case Isa::avx512: return detail::avx512_kernels;
#endif
    default: return detail::scalar_kernels;
  }
}

const Kernels& active() noexcept {
  static const Kernels& table = select_from_environment();
  return table;
}

std::vector<Isa> available_isas() {
  std::vector<Isa> out;
  for (Isa isa : {Isa::scalar, Isa::avx2, Isa::avx512})
    if (supported(isa)) out.push_back(isa);
  return out;
}

void lower_triangular_matvec(const Kernels& k, const double* lower, const double* x, double* y,
                             std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] = k.dot(lower + i * n, x, i + 1);
}

void dense_matvec(const Kernels& k, const double* a, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] = k.dot(a + i * n, x, n);
}

}  // namespace fracsim::simd
