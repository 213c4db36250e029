#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "fracsim/error.hpp"
#include "fracsim/quadrature.hpp"
#include "fracsim/simd/kernels.hpp"
#include "fracsim/spectral.hpp"

namespace fracsim {
namespace {

// Geometric grading ratio for the sub-panel touching s = t_i, where the
// kernel behaves like 1 - c u^rho.
constexpr double kGradingRatio = 0.2;

struct Kernel {
  double rho;
  double lambda;
  std::shared_ptr<const MittagLeffler> mlf;

  double operator()(double u) const {
    if (lambda == 0.0 || u == 0.0) return 1.0;
    return (*mlf)(-lambda * std::pow(u, rho));
  }
};

// Lagrange basis through `nodes`, evaluated at x.
std::vector<double> lagrange_row(const std::vector<double>& nodes, double x) {
  std::vector<double> row(nodes.size(), 1.0);
  for (std::size_t q = 0; q < nodes.size(); ++q)
    for (std::size_t r = 0; r < nodes.size(); ++r)
      if (r != q) row[q] *= (x - nodes[r]) / (nodes[q] - nodes[r]);
  return row;
}

struct Assembly {
  Eigen::MatrixXd R;
  double error = 0.0;
};

// Composite 15-point Gauss-Kronrod assembly with S sub-panels per step.
//
// On a uniform grid R(i, i+d) = sum_{m<=i} P(m, d) with
//   P(m, d) = int_{t_{m-1}}^{t_m} f(u) f(u + d dt) du,
// so the kernel is only ever needed at the quadrature nodes of each step,
// shifted by whole steps. Row m of P is an axpy over d per quadrature node.
Assembly assemble(const Kernel& f, const TimeGrid& grid, std::size_t S) {
  const auto& kr = gauss_kronrod15();
  const std::size_t Q = kr.nodes.size();
  const std::size_t P = Q * S;
  const std::size_t M = grid.steps();
  const double dt = grid.dt();
  const double h = dt / static_cast<double>(S);
  const auto& simd = simd::active();

  // Node-major kernel table: row p holds f(t_n + offset_p) for n = 0..M-1.
  std::vector<double> offsets(P), wk(P), wg(P);
  for (std::size_t s = 0; s < S; ++s)
    for (std::size_t q = 0; q < Q; ++q) {
      offsets[s * Q + q] = (static_cast<double>(s) + kr.nodes[q]) * h;
      wk[s * Q + q] = kr.kronrod_weights[q] * h;
      wg[s * Q + q] = kr.gauss_weights[q] * h;
    }
  std::vector<double> table(P * M);
  for (std::size_t p = 0; p < P; ++p)
    for (std::size_t n = 0; n < M; ++n) table[p * M + n] = f(grid[n] + offsets[p]);

  // Graded rule on [0, h] replacing sub-panel 0 of the first step.
  const double tau = f.lambda > 0.0 ? std::pow(f.lambda, -1.0 / f.rho) : h;
  const double inner = 1e-3 * std::min(tau, h);
  std::size_t J = 1;
  while (h * std::pow(kGradingRatio, static_cast<double>(J - 1)) > inner) ++J;
  std::vector<double> gu, gw, gg;
  // Each graded piece is split S ways as well, so refinement also resolves
  // the layer of width tau near the diagonal.
  for (std::size_t j = 0; j < J; ++j) {
    const double hi = h * std::pow(kGradingRatio, static_cast<double>(j));
    const double lo = (j + 1 == J) ? 0.0 : hi * kGradingRatio;
    const double w = (hi - lo) / static_cast<double>(S);
    for (std::size_t s = 0; s < S; ++s)
      for (std::size_t q = 0; q < Q; ++q) {
        gu.push_back(lo + (static_cast<double>(s) + kr.nodes[q]) * w);
        gw.push_back(kr.kronrod_weights[q] * w);
        gg.push_back(kr.gauss_weights[q] * w);
      }
  }
  std::vector<double> sub0_nodes(offsets.begin(), offsets.begin() + static_cast<long>(Q));
  std::vector<double> shifted_weights(Q, 0.0);  // sum_g w_g f(u_g) L_q(u_g)
  double graded_diag_k = 0.0;
  double graded_diag_g = 0.0;
  for (std::size_t g = 0; g < gu.size(); ++g) {
    const double fg = f(gu[g]);
    graded_diag_k += gw[g] * fg * fg;
    graded_diag_g += gg[g] * fg * fg;
    const auto row = lagrange_row(sub0_nodes, gu[g]);
    for (std::size_t q = 0; q < Q; ++q) shifted_weights[q] += gw[g] * fg * row[q];
  }

  Assembly out;
  out.R.resize(static_cast<long>(M), static_cast<long>(M));
  std::vector<double> acc(M, 0.0);
  double abs_diff = 0.0;
  for (std::size_t n = 0; n < M; ++n) {
    const std::size_t len = M - n;
    double panel_k = 0.0;
    double panel_g = 0.0;
    if (n == 0) {
      acc[0] += graded_diag_k;
      panel_k += graded_diag_k;
      panel_g += graded_diag_g;
      for (std::size_t q = 0; q < Q && M > 1; ++q)
        simd.axpy(shifted_weights[q], &table[q * M + 1], &acc[1], M - 1);
    }
    for (std::size_t p = (n == 0 ? Q : 0); p < P; ++p) {
      const double* row = &table[p * M + n];
      simd.axpy(wk[p] * row[0], row, acc.data(), len);
      panel_k += wk[p] * row[0] * row[0];
      panel_g += wg[p] * row[0] * row[0];
    }
    abs_diff += std::abs(panel_k - panel_g);
    for (std::size_t d = 0; d < len; ++d) {
      out.R(static_cast<long>(n), static_cast<long>(n + d)) = acc[d];
      out.R(static_cast<long>(n + d), static_cast<long>(n)) = acc[d];
    }
  }
  out.error = abs_diff;
  return out;
}

}  // namespace

Eigen::MatrixXd convolution_covariance(double rho, double lambda, const TimeGrid& grid,
                                       const CovarianceOptions& opts, std::size_t* panels_used,
                                       double* error_estimate) {
  detail::require(rho > 0.0 && rho <= 2.0, "kernel order must lie in (0, 2]");
  detail::require(lambda >= 0.0 && std::isfinite(lambda), "eigenvalue must be finite and >= 0");
  detail::require(opts.panels_per_step >= 1, "need at least one quadrature panel per step");
  detail::require(opts.rel_tol > 0.0, "covariance tolerance must be positive");
  const Kernel f{rho, lambda, mlf_evaluator(rho, 1.0, opts.mlf_tol)};
  double last_error = std::numeric_limits<double>::infinity();
  for (std::size_t S = opts.panels_per_step; S <= opts.max_panels_per_step; S *= 2) {
    Assembly a = assemble(f, grid, S);
    const double scale = a.R.diagonal().maxCoeff();
    last_error = a.error / scale;
    if (a.error <= opts.rel_tol * scale) {
      if (panels_used) *panels_used = S;
      if (error_estimate) *error_estimate = a.error;
      return std::move(a.R);
    }
  }
  std::ostringstream os;
  os << "covariance quadrature did not reach relative tolerance " << opts.rel_tol
     << " (rho=" << rho << ", lambda=" << lambda << ")";
  throw AccuracyError(os.str(), last_error);
}

CovarianceFactor mode_covariance(std::size_t k, const SpectralParams& params,
                                 const CovarianceOptions& opts) {
  params.validate();
  if (k < 1 || k > params.modes)
    throw ValidationError("mode index " + std::to_string(k) + " outside 1.." +
                          std::to_string(params.modes));
  CovarianceOptions o = opts;
  o.panels_per_step = std::max(o.panels_per_step, params.panels_per_step());
  o.max_panels_per_step = std::max(o.max_panels_per_step, o.panels_per_step);
  CovarianceFactor cf;
  cf.mode = k;
  try {
    cf.R = convolution_covariance(params.kernel_order(), laplacian_eigenvalue(k), params.grid, o,
                                  &cf.panels_per_step, &cf.quadrature_error);
  } catch (const AccuracyError& e) {
    throw AccuracyError("mode " + std::to_string(k) + ": " + e.what(), e.residual());
  }
  return cf;
}

CovarianceFactor factor_covariance(CovarianceFactor cf) {
  const Eigen::MatrixXd& R = cf.R;
  detail::require(R.rows() > 0 && R.rows() == R.cols(), "covariance must be a nonempty square matrix");
  const double scale = R.cwiseAbs().maxCoeff();
  const double asym = (R - R.transpose()).cwiseAbs().maxCoeff();
  if (asym > 1e-12 * std::max(scale, 1.0))
    throw ValidationError("covariance of mode " + std::to_string(cf.mode) + " is not symmetric");
  if (!(R.diagonal().minCoeff() > 0.0))
    throw ValidationError("covariance of mode " + std::to_string(cf.mode) +
                          " has a non-positive diagonal");

  Eigen::LLT<Eigen::MatrixXd> llt(R);
  if (llt.info() == Eigen::Success) {
    cf.K = llt.matrixL();
    cf.triangular = true;
    cf.clip_count = 0;
    return cf;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(R);
  if (eig.info() != Eigen::Success)
    throw NumericalError("eigendecomposition failed for mode " + std::to_string(cf.mode));
  Eigen::VectorXd values = eig.eigenvalues();
  std::size_t clipped = 0;
  for (long i = 0; i < values.size(); ++i)
    if (values[i] < 0.0) {
      values[i] = 0.0;
      ++clipped;
    }
  cf.K = eig.eigenvectors() * values.cwiseSqrt().asDiagonal();
  cf.triangular = false;
  cf.clip_count = clipped;
  return cf;
}

double factor_residual(const CovarianceFactor& cf) {
  detail::require(cf.factored() && cf.R.size() > 0, "factor_residual needs both R and K");
  const Eigen::MatrixXd K = cf.K;
  return (K * K.transpose() - cf.R).cwiseAbs().maxCoeff();
}

std::vector<double> sample_mode_path(const CovarianceFactor& cf, RngStream& stream) {
  detail::require(cf.factored(), "covariance factor has not been computed");
  const auto M = static_cast<std::size_t>(cf.K.rows());
  std::vector<double> chi(M);
  stream.fill_normal(chi);
  std::vector<double> path(M);
  const auto& k = simd::active();
  if (cf.triangular)
    simd::lower_triangular_matvec(k, cf.K.data(), chi.data(), path.data(), M);
  else
    simd::dense_matvec(k, cf.K.data(), chi.data(), path.data(), M);
  return path;
}

}  // namespace fracsim
