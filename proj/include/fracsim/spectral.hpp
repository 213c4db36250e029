#pragma once

// Spectral Galerkin discretization of the stochastic fractional wave equation
// on (0, 1) with Dirichlet conditions, sampled exactly in time.
//
// In the sine basis e_k(x) = sqrt(2) sin(k pi x) with eigenvalues k^2 pi^2
// every mode decouples: its coefficient at t_m is the resolvent symbol times
// the initial coefficient plus a Gaussian stochastic convolution O_k(t_m).
// The joint law of (O_k(t_1), ..., O_k(t_M)) is N(0, R_k); sampling K_k chi
// with K_k K_k^T = R_k reproduces it without any time-stepping error.

#include <Eigen/Core>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <vector>

#include "fracsim/mlf.hpp"
#include "fracsim/rng.hpp"
#include "fracsim/time_grid.hpp"

namespace fracsim {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Dirichlet Laplacian eigenvalue k^2 pi^2 on (0, 1).
double laplacian_eigenvalue(std::size_t k);

/// Diagonal symbol of the resolvent S^{alpha', beta}(t) on the eigenline lambda:
/// t^{beta-1} E_{alpha', beta}(-lambda t^{alpha'}).
double resolvent_diag(double alpha_prime, double beta, double lambda, double t,
                      double tol = kDefaultMlfTol);

struct SpectralParams {
  double alpha = 0.35;             // Riesz kernel exponent, in (0, 1)
  std::size_t modes = 1;           // retained modes N
  TimeGrid grid{1.0, 1};
  std::vector<double> u0_coeffs;   // (U_0, e_k), k = 1..N
  std::size_t quad_panels = 0;     // covariance panels over [0, T]; 0 means one per step

  /// U_0 = sin(pi x): only (U_0, e_1) = 1/sqrt(2) is nonzero.
  static SpectralParams sine_initial(double alpha, std::size_t modes, TimeGrid grid);

  void validate() const;
  double kernel_order() const noexcept { return alpha + 1.0; }
  std::size_t panels_per_step() const;
};

struct CovarianceOptions {
  std::size_t panels_per_step = 1;      // starting sub-panels per time step
  std::size_t max_panels_per_step = 64;
  double rel_tol = 1e-8;
  double mlf_tol = kDefaultMlfTol;
};

struct CovarianceFactor {
  std::size_t mode = 0;
  Eigen::MatrixXd R;        // M x M covariance of (O_k(t_1), ..., O_k(t_M))
  RowMatrix K;              // K K^T = R; lower-triangular unless the eigen fallback ran
  bool triangular = true;
  std::size_t clip_count = 0;
  std::size_t panels_per_step = 0;   // quadrature resolution actually used
  double quadrature_error = 0.0;     // embedded Gauss-Kronrod estimate on the diagonal

  bool factored() const noexcept { return K.size() > 0; }
};

/// Covariance of the scalar convolution int_0^t f(t - s) dbeta(s) on the grid,
/// with kernel f(u) = E_rho(-lambda u^rho). rho = 1 gives the heat kernel and
/// lambda = 0 the constant kernel.
Eigen::MatrixXd convolution_covariance(double rho, double lambda, const TimeGrid& grid,
                                       const CovarianceOptions& opts,
                                       std::size_t* panels_used = nullptr,
                                       double* error_estimate = nullptr);

CovarianceFactor mode_covariance(std::size_t k, const SpectralParams& params,
                                 const CovarianceOptions& opts = {});

/// Cholesky factor of cf.R, with a clipped symmetric eigendecomposition as
/// fallback when R is numerically semidefinite.
CovarianceFactor factor_covariance(CovarianceFactor cf);

/// Max-norm residual of K K^T - R.
double factor_residual(const CovarianceFactor& cf);

/// One draw of (O_k(t_1), ..., O_k(t_M)) = K chi.
std::vector<double> sample_mode_path(const CovarianceFactor& cf, RngStream& stream);

struct SpectralSolution {
  SpectralParams params;
  RowMatrix coeffs;  // (M+1) x N, entry (m, k-1) = coefficient of e_k at t_m
};

enum class NoiseMode { white, none };

/// Mode k draws from rng.stream(k), so runs with different N share noise in
/// their common modes. Precomputed factors (indexed k-1) are used when given.
SpectralSolution simulate_spectral(const SpectralParams& params, const SampleRng& rng,
                                   NoiseMode noise = NoiseMode::white,
                                   std::span<const CovarianceFactor> factors = {},
                                   const CovarianceOptions& opts = {});

/// H_0 norm of the error of the coupled n-mode solution: the tail of the
/// reference beyond mode n. n == N_ref yields the zero path.
std::vector<double> spectral_error_path(const SpectralSolution& reference, std::size_t n);

/// On-disk cache of covariance factors keyed by (kernel order, grid, mode,
/// quadrature settings). Blobs are versioned and CRC-checked; a corrupt or
/// mismatched blob reads as a miss.
class CovarianceCache {
 public:
  explicit CovarianceCache(std::filesystem::path dir);

  std::optional<CovarianceFactor> load(double rho, const TimeGrid& grid, std::size_t k,
                                       const CovarianceOptions& opts) const;
  void store(double rho, const TimeGrid& grid, const CovarianceFactor& cf,
             const CovarianceOptions& opts) const;
  std::filesystem::path path_for(double rho, const TimeGrid& grid, std::size_t k,
                                 const CovarianceOptions& opts) const;

 private:
  std::filesystem::path dir_;
};

}  // namespace fracsim
