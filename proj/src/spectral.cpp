#include "fracsim/spectral.hpp"

#include <cmath>
#include <cstdio>
#include <numbers>
#include <sstream>

#include "fracsim/blob.hpp"
#include "fracsim/error.hpp"

namespace fracsim {

double laplacian_eigenvalue(std::size_t k) {
  const double kd = static_cast<double>(k);
  return kd * kd * std::numbers::pi * std::numbers::pi;
}

double resolvent_diag(double alpha_prime, double beta, double lambda, double t, double tol) {
  if (!(alpha_prime > 0.0 && alpha_prime < 2.0))
    throw ValidationError("resolvent order alpha' must lie in (0, 2)");
  if (!(beta > 0.5)) throw ValidationError("resolvent beta must exceed 1/2");
  if (!(lambda > 0.0 && std::isfinite(lambda)))
    throw ValidationError("resolvent eigenvalue must be positive");
  if (!(t >= 0.0 && std::isfinite(t))) throw ValidationError("resolvent time must be >= 0");
  if (t == 0.0) {
    if (beta == 1.0) return 1.0;
    if (beta > 1.0) return 0.0;
    throw ValidationError("resolvent symbol is unbounded at t=0 for beta < 1");
  }
  const double e = (*mlf_evaluator(alpha_prime, beta, tol))(-lambda * std::pow(t, alpha_prime));
  return beta == 1.0 ? e : std::pow(t, beta - 1.0) * e;
}

SpectralParams SpectralParams::sine_initial(double alpha, std::size_t modes, TimeGrid grid) {
  SpectralParams p;
  p.alpha = alpha;
  p.modes = modes;
  p.grid = std::move(grid);
  p.u0_coeffs.assign(modes, 0.0);
  if (modes > 0) p.u0_coeffs[0] = 1.0 / std::numbers::sqrt2;
  return p;
}

void SpectralParams::validate() const {
  if (!(alpha > 0.0 && alpha < 1.0))
    throw ValidationError("alpha must lie in (0, 1), got " + std::to_string(alpha));
  detail::require(modes >= 1, "spectral solver needs at least one mode");
  if (u0_coeffs.size() != modes)
    throw ValidationError("u0_coeffs has " + std::to_string(u0_coeffs.size()) +
                          " entries, expected " + std::to_string(modes));
  if (quad_panels != 0 && quad_panels % grid.steps() != 0)
    throw ValidationError("quad_panels must be a multiple of the number of time steps");
}

std::size_t SpectralParams::panels_per_step() const {
  return quad_panels == 0 ? 1 : quad_panels / grid.steps();
}

SpectralSolution simulate_spectral(const SpectralParams& params, const SampleRng& rng,
                                   NoiseMode noise, std::span<const CovarianceFactor> factors,
                                   const CovarianceOptions& opts) {
  params.validate();
  if (!factors.empty() && factors.size() < params.modes)
    throw ValidationError("fewer precomputed covariance factors than modes");
  const std::size_t M = params.grid.steps();
  const std::size_t N = params.modes;
  SpectralSolution sol{params, RowMatrix::Zero(static_cast<long>(M + 1), static_cast<long>(N))};
  const double rho = params.kernel_order();
  for (std::size_t k = 1; k <= N; ++k) {
    const long col = static_cast<long>(k - 1);
    const double u0 = params.u0_coeffs[k - 1];
    const double lambda = laplacian_eigenvalue(k);
    sol.coeffs(0, col) = u0;
    if (u0 != 0.0)
      for (std::size_t m = 1; m <= M; ++m)
        sol.coeffs(static_cast<long>(m), col) = resolvent_diag(rho, 1.0, lambda, params.grid[m]) * u0;
    if (noise == NoiseMode::none) continue;
    std::vector<double> path;
    RngStream stream = rng.stream(static_cast<std::uint32_t>(k));
    try {
      if (!factors.empty()) {
        path = sample_mode_path(factors[k - 1], stream);
      } else {
        const CovarianceFactor cf = factor_covariance(mode_covariance(k, params, opts));
        path = sample_mode_path(cf, stream);
      }
    } catch (const AccuracyError& e) {
      throw AccuracyError("spectral mode " + std::to_string(k) + ": " + e.what(), e.residual());
    }
    for (std::size_t m = 1; m <= M; ++m) sol.coeffs(static_cast<long>(m), col) += path[m - 1];
  }
  return sol;
}

std::vector<double> spectral_error_path(const SpectralSolution& reference, std::size_t n) {
  const auto n_ref = static_cast<std::size_t>(reference.coeffs.cols());
  if (n > n_ref)
    throw ValidationError("error dimension " + std::to_string(n) + " exceeds reference modes " +
                          std::to_string(n_ref));
  const auto rows = static_cast<std::size_t>(reference.coeffs.rows());
  std::vector<double> out(rows, 0.0);
  for (std::size_t m = 0; m < rows; ++m) {
    double s = 0.0;
    for (std::size_t k = n; k < n_ref; ++k) {
      const double c = reference.coeffs(static_cast<long>(m), static_cast<long>(k));
      s += c * c;
    }
    out[m] = std::sqrt(s);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Covariance cache

namespace {

constexpr std::string_view kCovMagic = "FSCOVAR";
constexpr std::uint32_t kCovVersion = 1;

}  // namespace

CovarianceCache::CovarianceCache(std::filesystem::path dir) : dir_(std::move(dir)) {
  std::filesystem::create_directories(dir_);
}

std::filesystem::path CovarianceCache::path_for(double rho, const TimeGrid& grid, std::size_t k,
                                                const CovarianceOptions& opts) const {
  char name[160];
  std::snprintf(name, sizeof name, "cov_r%.17g_T%.17g_M%zu_S%zu_tol%.3g_k%zu.bin", rho,
                grid.horizon(), grid.steps(), opts.panels_per_step, opts.rel_tol, k);
  return dir_ / name;
}

std::optional<CovarianceFactor> CovarianceCache::load(double rho, const TimeGrid& grid,
                                                      std::size_t k,
                                                      const CovarianceOptions& opts) const {
  const auto path = path_for(rho, grid, k, opts);
  if (!std::filesystem::exists(path)) return std::nullopt;
  try {
    BlobReader in(path, kCovMagic, kCovVersion);
    if (in.get<double>() != rho || in.get<double>() != grid.horizon() ||
        in.get<std::uint64_t>() != grid.steps() || in.get<std::uint64_t>() != k ||
        in.get<std::uint64_t>() != opts.panels_per_step || in.get<double>() != opts.rel_tol ||
        in.get<double>() != opts.mlf_tol)
      return std::nullopt;
    CovarianceFactor cf;
    cf.mode = k;
    cf.clip_count = in.get<std::uint64_t>();
    cf.triangular = in.get<std::uint8_t>() != 0;
    cf.panels_per_step = in.get<std::uint64_t>();
    cf.quadrature_error = in.get<double>();
    const auto M = static_cast<long>(grid.steps());
    cf.R.resize(M, M);
    cf.K = RowMatrix::Zero(M, M);
    std::vector<double> row(static_cast<std::size_t>(M));
    for (long i = 0; i < M; ++i) {
      in.get_doubles(std::span(row.data(), static_cast<std::size_t>(i + 1)));
      for (long j = 0; j <= i; ++j) cf.R(i, j) = cf.R(j, i) = row[static_cast<std::size_t>(j)];
    }
    for (long i = 0; i < M; ++i) {
      const long len = cf.triangular ? i + 1 : M;
      in.get_doubles(std::span(&cf.K(i, 0), static_cast<std::size_t>(len)));
    }
    if (!in.exhausted()) return std::nullopt;
    return cf;
  } catch (const BlobError&) {
    return std::nullopt;
  }
}

void CovarianceCache::store(double rho, const TimeGrid& grid, const CovarianceFactor& cf,
                            const CovarianceOptions& opts) const {
  detail::require(cf.factored() && cf.R.rows() == static_cast<long>(grid.steps()),
                  "only complete factors can be cached");
  BlobWriter out(kCovMagic, kCovVersion);
  out.put(rho);
  out.put(grid.horizon());
  out.put<std::uint64_t>(grid.steps());
  out.put<std::uint64_t>(cf.mode);
  out.put<std::uint64_t>(opts.panels_per_step);
  out.put(opts.rel_tol);
  out.put(opts.mlf_tol);
  out.put<std::uint64_t>(cf.clip_count);
  out.put<std::uint8_t>(cf.triangular ? 1 : 0);
  out.put<std::uint64_t>(cf.panels_per_step);
  out.put(cf.quadrature_error);
  const long M = cf.R.rows();
  std::vector<double> row(static_cast<std::size_t>(M));
  for (long i = 0; i < M; ++i) {
    for (long j = 0; j <= i; ++j) row[static_cast<std::size_t>(j)] = cf.R(i, j);
    out.put_doubles(std::span(row.data(), static_cast<std::size_t>(i + 1)));
  }
  for (long i = 0; i < M; ++i)
    out.put_doubles(std::span(&cf.K(i, 0), static_cast<std::size_t>(cf.triangular ? i + 1 : M)));
  out.write(path_for(rho, grid, cf.mode, opts));
}

}  // namespace fracsim
