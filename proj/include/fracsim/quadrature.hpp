#pragma once

#include <cstddef>
#include <vector>

namespace fracsim {

/// Quadrature rule on the unit interval [0, 1].
struct QuadratureRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

/// n-point Gauss-Legendre rule mapped to [0, 1].
QuadratureRule gauss_legendre(std::size_t n);

/// 15-point Kronrod extension of the 7-point Gauss rule, mapped to [0, 1].
/// gauss_weights is zero at the eight Kronrod-only nodes, so the embedded
/// Gauss estimate shares every function value with the Kronrod one.
struct KronrodRule {
  std::vector<double> nodes;
  std::vector<double> kronrod_weights;
  std::vector<double> gauss_weights;
};

const KronrodRule& gauss_kronrod15();

}  // namespace fracsim
