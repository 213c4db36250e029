#include <gtest/gtest.h>

#include <cmath>
#include <complex>
#include <filesystem>
#include <fstream>
#include <numbers>

#include "fracsim/error.hpp"
#include "fracsim/spectral.hpp"

using namespace fracsim;

namespace {

// Bromwich inversion on the parabola s(u) = mu (1 + iu)^2 with the trapezoid
// rule; F is the Laplace transform of the resolvent symbol.
double inverse_laplace(double rho, double lambda, double t) {
  const int n = 48;
  const double h = 3.0 / n;
  const double mu = std::numbers::pi * n / (12.0 * t);
  std::complex<double> sum = 0.0;
  for (int k = -n; k <= n; ++k) {
    const std::complex<double> iu(0.0, k * h);
    const auto s = mu * (1.0 + iu) * (1.0 + iu);
    const auto ds = 2.0 * mu * std::complex<double>(0.0, 1.0) * (1.0 + iu);
    const auto F = std::pow(s, rho - 1.0) / (std::pow(s, rho) + lambda);
    sum += std::exp(s * t) * F * ds;
  }
  return (sum * h / (2.0 * std::numbers::pi * std::complex<double>(0.0, 1.0))).real();
}

double heat_covariance(double lambda, double ti, double tj) {
  return (std::exp(-lambda * std::abs(ti - tj)) - std::exp(-lambda * (ti + tj))) / (2.0 * lambda);
}

}  // namespace

TEST(Resolvent, Examples) {
  const double pi2 = std::numbers::pi * std::numbers::pi;
  EXPECT_EQ(resolvent_diag(1.325, 1.0, pi2, 0.0), 1.0);
  EXPECT_EQ(resolvent_diag(1.325, 2.0, pi2, 0.0), 0.0);
  EXPECT_NEAR(resolvent_diag(1.0, 1.0, 2.0, 0.5), std::exp(-1.0), 1e-12);
  EXPECT_NEAR(resolvent_diag(1.35, 1.0, pi2, 1.0), inverse_laplace(1.35, pi2, 1.0), 1e-6);
  for (double t : {0.05, 0.3, 0.7, 2.0})
    EXPECT_NEAR(resolvent_diag(1.35, 1.0, pi2, t), inverse_laplace(1.35, pi2, t), 1e-8) << t;
  EXPECT_NEAR(resolvent_diag(1.0, 2.0, 3.0, 0.4), -std::expm1(-1.2) / 3.0, 1e-12);
}

TEST(Resolvent, Validation) {
  EXPECT_THROW(resolvent_diag(2.0, 1.0, 1.0, 1.0), ValidationError);
  EXPECT_THROW(resolvent_diag(0.0, 1.0, 1.0, 1.0), ValidationError);
  EXPECT_THROW(resolvent_diag(1.3, 0.5, 1.0, 1.0), ValidationError);
  EXPECT_THROW(resolvent_diag(1.3, 1.0, 0.0, 1.0), ValidationError);
  EXPECT_THROW(resolvent_diag(1.3, 1.0, 1.0, -1.0), ValidationError);
}

TEST(Spectral, EigenvaluesIncrease) {
  EXPECT_DOUBLE_EQ(laplacian_eigenvalue(1), std::numbers::pi * std::numbers::pi);
  for (std::size_t k = 1; k < 100; ++k) EXPECT_LT(laplacian_eigenvalue(k), laplacian_eigenvalue(k + 1));
}

TEST(Covariance, HeatReductionClosedForm) {
  const TimeGrid grid(1.0, 4);
  const Eigen::MatrixXd R = convolution_covariance(1.0, 1.0, grid, {});
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j)
      EXPECT_NEAR(R(i, j), heat_covariance(1.0, grid[i + 1], grid[j + 1]), 1e-8);
  const Eigen::MatrixXd S = convolution_covariance(1.0, 400.0, TimeGrid(1.0, 50), {});
  for (int i = 0; i < 50; i += 7)
    for (int j = 0; j < 50; j += 5)
      EXPECT_NEAR(S(i, j), heat_covariance(400.0, (i + 1) / 50.0, (j + 1) / 50.0), 1e-8 * S(0, 0));
}

TEST(Covariance, ConstantKernelGivesMinimum) {
  const TimeGrid grid(2.0, 8);
  const Eigen::MatrixXd R = convolution_covariance(1.35, 0.0, grid, {});
  EXPECT_NEAR(R(0, 0), grid[1], 1e-14);
  for (int i = 0; i < 8; ++i)
    for (int j = 0; j < 8; ++j) EXPECT_NEAR(R(i, j), std::min(grid[i + 1], grid[j + 1]), 1e-13);
}

TEST(Covariance, ExactlySymmetric) {
  const auto p = SpectralParams::sine_initial(0.35, 10, TimeGrid(1.0, 30));
  for (std::size_t k : {1u, 4u, 10u}) {
    const auto cf = mode_covariance(k, p);
    EXPECT_EQ(cf.R, cf.R.transpose());
    EXPECT_GT(cf.R.diagonal().minCoeff(), 0.0);
  }
}

TEST(Covariance, ModeRangeAndPanelsValidated) {
  auto p = SpectralParams::sine_initial(0.35, 4, TimeGrid(1.0, 10));
  EXPECT_THROW(mode_covariance(0, p), ValidationError);
  EXPECT_THROW(mode_covariance(5, p), ValidationError);
  p.quad_panels = 15;
  EXPECT_THROW(mode_covariance(1, p), ValidationError);
  p.quad_panels = 40;
  EXPECT_EQ(p.panels_per_step(), 4u);
  EXPECT_GE(mode_covariance(1, p).panels_per_step, 4u);
}

TEST(Covariance, UnreachableToleranceRaisesAccuracyError) {
  CovarianceOptions o;
  o.rel_tol = 1e-30;
  o.max_panels_per_step = 2;
  try {
    convolution_covariance(1.35, 1e5, TimeGrid(1.0, 20), o);
    FAIL();
  } catch (const AccuracyError& e) {
    EXPECT_GT(e.residual(), 0.0);
  }
}

TEST(Factor, HandExamples) {
  CovarianceFactor id;
  id.R = Eigen::MatrixXd::Identity(3, 3);
  const auto a = factor_covariance(id);
  EXPECT_TRUE(a.triangular);
  EXPECT_EQ(Eigen::MatrixXd(a.K), Eigen::MatrixXd::Identity(3, 3));

  CovarianceFactor two;
  two.R.resize(2, 2);
  two.R << 4, 2, 2, 5;
  const auto b = factor_covariance(two);
  Eigen::MatrixXd expect(2, 2);
  expect << 2, 0, 1, 2;
  EXPECT_TRUE(Eigen::MatrixXd(b.K).isApprox(expect, 1e-15));
  EXPECT_EQ(b.clip_count, 0u);
}

TEST(Factor, RejectsAsymmetricOrNonPositive) {
  CovarianceFactor cf;
  cf.R.resize(2, 2);
  cf.R << 1, 0.5, 0.4, 1;
  EXPECT_THROW(factor_covariance(cf), ValidationError);
  cf.R << 1, 0, 0, 0;
  EXPECT_THROW(factor_covariance(cf), ValidationError);
}

TEST(Factor, SemidefiniteFallsBackToClippedEigen) {
  CovarianceFactor cf;
  Eigen::VectorXd v(3);
  v << 1.0, 2.0, -1.0;
  cf.R = v * v.transpose();
  cf.R(2, 2) -= 1e-13;
  const auto f = factor_covariance(cf);
  EXPECT_FALSE(f.triangular);
  EXPECT_GE(f.clip_count, 1u);
  EXPECT_LT(factor_residual(f), 1e-10);
}

TEST(Factor, StiffModesReconstruct) {
  const auto p = SpectralParams::sine_initial(0.35, 64, TimeGrid(1.0, 100));
  for (std::size_t k : {1u, 8u, 64u}) {
    const auto cf = factor_covariance(mode_covariance(k, p));
    const double bound = std::max(1e-10, 1e-8 * cf.R.cwiseAbs().maxCoeff());
    EXPECT_LT(factor_residual(cf), bound) << "mode " << k << ", clipped " << cf.clip_count;
  }
}

TEST(Sampling, ZeroAndIdentityFactors) {
  CovarianceFactor z;
  z.K = RowMatrix::Zero(6, 6);
  RngStream s(1, 2, 3);
  for (double x : sample_mode_path(z, s)) EXPECT_EQ(x, 0.0);

  CovarianceFactor id;
  id.K = RowMatrix::Identity(6, 6);
  RngStream a(1, 2, 3), b(1, 2, 3);
  const auto path = sample_mode_path(id, a);
  std::vector<double> chi(6);
  b.fill_normal(chi);
  EXPECT_EQ(path, chi);
}

TEST(Sampling, SampleCovarianceMatchesR) {
  const auto p = SpectralParams::sine_initial(0.35, 1, TimeGrid(1.0, 5));
  const auto cf = factor_covariance(mode_covariance(1, p));
  const int n = 20000;
  Eigen::MatrixXd sum = Eigen::MatrixXd::Zero(5, 5), sq = Eigen::MatrixXd::Zero(5, 5);
  for (int s = 0; s < n; ++s) {
    RngStream st(99, static_cast<std::uint32_t>(s), 1);
    const auto x = sample_mode_path(cf, st);
    for (int i = 0; i < 5; ++i)
      for (int j = 0; j < 5; ++j) {
        sum(i, j) += x[i] * x[j];
        sq(i, j) += x[i] * x[i] * x[j] * x[j];
      }
  }
  for (int i = 0; i < 5; ++i)
    for (int j = 0; j < 5; ++j) {
      const double mean = sum(i, j) / n;
      const double se = std::sqrt((sq(i, j) / n - mean * mean) / n);
      EXPECT_LT(std::abs(mean - cf.R(i, j)), 3 * se) << i << "," << j;
    }
}

TEST(Sampling, DistinctModesAreUncorrelated) {
  const auto p = SpectralParams::sine_initial(0.35, 2, TimeGrid(1.0, 4));
  const auto f1 = factor_covariance(mode_covariance(1, p));
  const auto f2 = factor_covariance(mode_covariance(2, p));
  const int n = 10000;
  double s = 0.0, s2 = 0.0;
  for (int i = 0; i < n; ++i) {
    const SampleRng rng(5, static_cast<std::uint32_t>(i));
    RngStream a = rng.stream(1), b = rng.stream(2);
    const double x = sample_mode_path(f1, a)[3] * sample_mode_path(f2, b)[3];
    s += x;
    s2 += x * x;
  }
  const double mean = s / n;
  EXPECT_LT(std::abs(mean), 3 * std::sqrt((s2 / n - mean * mean) / n));
}

TEST(SimulateSpectral, DeterministicModeIsExact) {
  auto p = SpectralParams::sine_initial(0.35, 3, TimeGrid(1.0, 20));
  p.u0_coeffs = {1.0, 0.0, 0.0};
  const auto sol = simulate_spectral(p, SampleRng(1, 0), NoiseMode::none);
  const double pi2 = std::numbers::pi * std::numbers::pi;
  for (std::size_t m = 0; m <= 20; ++m) {
    const double t = p.grid[m];
    EXPECT_NEAR(sol.coeffs(m, 0), mlf({1.35, 1.0, -pi2 * std::pow(t, 1.35)}), 1e-12);
    EXPECT_EQ(sol.coeffs(m, 1), 0.0);
    EXPECT_EQ(sol.coeffs(m, 2), 0.0);
  }
}

TEST(SimulateSpectral, SineInitialOnlyFirstMode) {
  const auto p = SpectralParams::sine_initial(0.35, 5, TimeGrid(1.0, 4));
  EXPECT_DOUBLE_EQ(p.u0_coeffs[0], 1.0 / std::sqrt(2.0));
  for (std::size_t k = 1; k < 5; ++k) EXPECT_EQ(p.u0_coeffs[k], 0.0);
  const auto sol = simulate_spectral(p, SampleRng(3, 1));
  for (std::size_t k = 0; k < 5; ++k) EXPECT_EQ(sol.coeffs(0, k), p.u0_coeffs[k]);
  EXPECT_TRUE(sol.coeffs.allFinite());
}

TEST(SimulateSpectral, ZeroInitialEnsembleMeanVanishes) {
  auto p = SpectralParams::sine_initial(0.35, 3, TimeGrid(1.0, 4));
  p.u0_coeffs.assign(3, 0.0);
  std::vector<CovarianceFactor> f;
  for (std::size_t k = 1; k <= 3; ++k) f.push_back(factor_covariance(mode_covariance(k, p)));
  const int n = 2000;
  RowMatrix sum = RowMatrix::Zero(5, 3), sq = RowMatrix::Zero(5, 3);
  for (int s = 0; s < n; ++s) {
    const auto sol = simulate_spectral(p, SampleRng(11, s), NoiseMode::white, f);
    sum += sol.coeffs;
    sq += sol.coeffs.cwiseProduct(sol.coeffs);
  }
  for (int m = 1; m < 5; ++m)
    for (int k = 0; k < 3; ++k) {
      const double mean = sum(m, k) / n;
      EXPECT_LT(std::abs(mean), 3 * std::sqrt((sq(m, k) / n - mean * mean) / n));
    }
}

TEST(ErrorPath, TailFormula) {
  const auto p = SpectralParams::sine_initial(0.35, 8, TimeGrid(1.0, 6));
  const SampleRng rng(21, 4);
  const auto ref = simulate_spectral(p, rng);
  for (double v : spectral_error_path(ref, 8)) EXPECT_EQ(v, 0.0);
  const auto full = spectral_error_path(ref, 0);
  for (int m = 0; m <= 6; ++m) EXPECT_NEAR(full[m], ref.coeffs.row(m).norm(), 1e-14);
  EXPECT_THROW(spectral_error_path(ref, 9), ValidationError);

  auto q = SpectralParams::sine_initial(0.35, 3, TimeGrid(1.0, 6));
  const auto small = simulate_spectral(q, rng);
  EXPECT_EQ(small.coeffs, ref.coeffs.leftCols(3));
  const auto tail = spectral_error_path(ref, 3);
  for (int m = 0; m <= 6; ++m) {
    RowMatrix padded = RowMatrix::Zero(1, 8);
    padded.leftCols(3) = small.coeffs.row(m);
    EXPECT_NEAR((ref.coeffs.row(m) - padded).norm(), tail[m], 1e-12);
  }
}

TEST(CovarianceCache, RoundTripAndMismatch) {
  const auto dir = std::filesystem::temp_directory_path() / "fracsim_cov_cache_test";
  std::filesystem::remove_all(dir);
  const CovarianceCache cache(dir);
  const auto p = SpectralParams::sine_initial(0.35, 4, TimeGrid(1.0, 12));
  const CovarianceOptions o;
  const auto cf = factor_covariance(mode_covariance(3, p, o));
  EXPECT_FALSE(cache.load(1.35, p.grid, 3, o).has_value());
  cache.store(1.35, p.grid, cf, o);
  const auto back = cache.load(1.35, p.grid, 3, o);
  ASSERT_TRUE(back.has_value());
  EXPECT_EQ(back->R, cf.R);
  EXPECT_EQ(back->K, cf.K);
  EXPECT_EQ(back->triangular, cf.triangular);

  CovarianceOptions other = o;
  other.mlf_tol = 1e-10;
  EXPECT_FALSE(cache.load(1.35, p.grid, 3, other).has_value());
  {
    std::fstream f(cache.path_for(1.35, p.grid, 3, o), std::ios::in | std::ios::out | std::ios::binary);
    f.seekp(40);
    f.put('\x55');
  }
  EXPECT_FALSE(cache.load(1.35, p.grid, 3, o).has_value());
  std::filesystem::remove_all(dir);
}
