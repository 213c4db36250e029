#pragma once

// Linear finite elements on a uniform mesh of (0, 1) with first-order Lubich
// convolution quadrature in time, driven by rank-one noise 1_[0, 1/2](x) beta(t).
//
// Each step solves
//   (Mass + dt w_0 Stiff) U_n = Mass U_{n-1} - dt sum_{i=1}^{n-1} w_{n-i} Stiff U_i + J dbeta_n
// with the system matrix factored once.

#include <Eigen/Core>
#include <cstddef>
#include <filesystem>
#include <span>
#include <vector>

#include "fracsim/rng.hpp"
#include "fracsim/spectral.hpp"
#include "fracsim/time_grid.hpp"

namespace fracsim {

class Mesh1D {
 public:
  explicit Mesh1D(std::size_t cells);

  std::size_t cells() const noexcept { return cells_; }
  std::size_t interior() const noexcept { return cells_ - 1; }
  double h() const noexcept { return h_; }
  /// x_i = i / N for i = 0..N.
  double node(std::size_t i) const noexcept;

  bool operator==(const Mesh1D& o) const noexcept { return cells_ == o.cells_; }

 private:
  std::size_t cells_;
  double h_;
};

/// Symmetric tridiagonal matrix: diag has n entries, off has n-1.
struct SymTridiagonal {
  std::vector<double> diag;
  std::vector<double> off;

  std::size_t size() const noexcept { return diag.size(); }
  std::vector<double> multiply(std::span<const double> x) const;
  void multiply_into(const double* x, double* y) const;
};

/// LDL^T factorization of a symmetric tridiagonal matrix (Thomas elimination).
class TridiagonalSolver {
 public:
  /// Throws NumericalError when a pivot vanishes or changes sign.
  explicit TridiagonalSolver(const SymTridiagonal& a);

  void solve_in_place(double* x) const;
  std::vector<double> solve(std::span<const double> b) const;
  std::size_t size() const noexcept { return d_.size(); }

 private:
  std::vector<double> d_;
  std::vector<double> l_;
};

struct FemMatrices {
  Mesh1D mesh{2};
  SymTridiagonal mass;       // (phi_i, phi_j)
  SymTridiagonal stiffness;  // (phi_i', phi_j')
  std::vector<double> load;  // J_k = (1_[0, 1/2], phi_k)
};

FemMatrices assemble(const Mesh1D& mesh);

/// Exact (sin(pi x), phi_k) for the interior hats.
std::vector<double> sine_load(const Mesh1D& mesh);

struct LcqWeights {
  double alpha = 0.5;
  double dt = 1.0;
  std::vector<double> omega;
};

/// Coefficients of dt^alpha (1 - z)^(-alpha); alpha in (0, 1].
LcqWeights lcq_weights(double alpha, double dt, std::size_t steps);

/// max_m |sum_{k<m} w_k - t_m^alpha / Gamma(alpha + 1)|: the quadrature error
/// of the convolution with g = 1.
double lcq_convolve_check(const LcqWeights& weights, const TimeGrid& grid);

enum class InitialDatum { sine_projection, sine_interpolation, zero };

struct FemSolution {
  Mesh1D mesh{2};
  TimeGrid grid{1.0, 1};
  RowMatrix nodal;  // (M+1) x (N-1) interior nodal values
};

/// Scalar Brownian increments N(0, dt) for one sample, drawn from stream 0 so
/// every mesh sees the same driving path.
std::vector<double> brownian_increments(const SampleRng& rng, const TimeGrid& grid);

/// increments may be empty (no noise); otherwise it must hold M entries.
FemSolution simulate_fem(const Mesh1D& mesh, const TimeGrid& grid, double alpha,
                         std::span<const double> increments,
                         InitialDatum initial = InitialDatum::sine_projection);

/// Piecewise-linear prolongation of coarse interior nodal values onto a nested
/// fine mesh.
std::vector<double> prolong(const Mesh1D& coarse, std::span<const double> values,
                            const Mesh1D& fine);

/// ||v||_{L^2(0,1)} of the piecewise-linear function with interior values v.
double fem_l2_norm(const SymTridiagonal& mass, std::span<const double> v);

/// ||fine(t_n) - P coarse(t_n)||_{L^2} for n = 0..M.
std::vector<double> fem_error_path(const FemSolution& coarse, const FemSolution& fine);

/// Binary trace of nodal paths (versioned, CRC-checked).
void write_fem_trace(const std::filesystem::path& path, const FemSolution& sol,
                     std::uint32_t sample_id);
FemSolution read_fem_trace(const std::filesystem::path& path, std::uint32_t* sample_id = nullptr);

}  // namespace fracsim
