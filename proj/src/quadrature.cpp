#include "fracsim/quadrature.hpp"

#include <array>
#include <cmath>
#include <numbers>

#include "fracsim/error.hpp"

namespace fracsim {

QuadratureRule gauss_legendre(std::size_t n) {
  detail::require(n >= 1, "Gauss-Legendre rule needs at least one node");
  QuadratureRule rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  const double nd = static_cast<double>(n);
  for (std::size_t i = 0; i < (n + 1) / 2; ++i) {
    double x = std::cos(std::numbers::pi * (static_cast<double>(i) + 0.75) / (nd + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0;
      double p1 = x;
      for (std::size_t k = 2; k <= n; ++k) {
        const double kd = static_cast<double>(k);
        const double p2 = ((2.0 * kd - 1.0) * x * p1 - (kd - 1.0) * p0) / kd;
        p0 = p1;
        p1 = p2;
      }
      dp = nd * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    rule.nodes[i] = 0.5 * (1.0 - x);
    rule.nodes[n - 1 - i] = 0.5 * (1.0 + x);
    rule.weights[i] = 0.5 * w;
    rule.weights[n - 1 - i] = 0.5 * w;
  }
  if (n % 2 == 1) rule.nodes[n / 2] = 0.5;
  return rule;
}

const KronrodRule& gauss_kronrod15() {
  static const KronrodRule rule = [] {
    // Abscissae on [-1, 1] in decreasing order; odd indices are Gauss nodes.
    constexpr std::array<double, 8> xgk = {
        0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
        0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
        0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
        0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
    constexpr std::array<double, 8> wgk = {
        0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
        0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
        0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
        0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
    constexpr std::array<double, 4> wg = {
        0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
        0.381830050505118944950369775488975, 0.417959183673469387755102040816327};
    KronrodRule r;
    auto push = [&](double x, double wk, double wgauss) {
      r.nodes.push_back(0.5 * (1.0 + x));
      r.kronrod_weights.push_back(0.5 * wk);
      r.gauss_weights.push_back(0.5 * wgauss);
    };
    for (std::size_t j = 0; j < 7; ++j) push(-xgk[j], wgk[j], (j % 2 == 1) ? wg[j / 2] : 0.0);
    push(0.0, wgk[7], wg[3]);
    for (std::size_t j = 7; j-- > 0;) push(xgk[j], wgk[j], (j % 2 == 1) ? wg[j / 2] : 0.0);
    return r;
  }();
  return rule;
}

}  // namespace fracsim
