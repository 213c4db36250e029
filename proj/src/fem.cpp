#include "fracsim/fem.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "fracsim/blob.hpp"
#include "fracsim/error.hpp"
#include "fracsim/simd/kernels.hpp"

namespace fracsim {

Mesh1D::Mesh1D(std::size_t cells) : cells_(cells), h_(1.0 / static_cast<double>(cells)) {
  if (cells < 2) throw ValidationError("mesh needs at least 2 cells");
}

double Mesh1D::node(std::size_t i) const noexcept {
  return static_cast<double>(i) / static_cast<double>(cells_);
}

void SymTridiagonal::multiply_into(const double* x, double* y) const {
  const std::size_t n = diag.size();
  for (std::size_t i = 0; i < n; ++i) {
    double s = diag[i] * x[i];
    if (i > 0) s += off[i - 1] * x[i - 1];
    if (i + 1 < n) s += off[i] * x[i + 1];
    y[i] = s;
  }
}

std::vector<double> SymTridiagonal::multiply(std::span<const double> x) const {
  detail::require(x.size() == diag.size(), "tridiagonal multiply: size mismatch");
  std::vector<double> y(x.size());
  multiply_into(x.data(), y.data());
  return y;
}

TridiagonalSolver::TridiagonalSolver(const SymTridiagonal& a) {
  const std::size_t n = a.size();
  detail::require(n >= 1 && a.off.size() + 1 == n, "malformed tridiagonal matrix");
  d_.resize(n);
  l_.resize(n > 0 ? n - 1 : 0);
  d_[0] = a.diag[0];
  for (std::size_t i = 1; i < n; ++i) {
    if (!(d_[i - 1] > 0.0) || !std::isfinite(d_[i - 1]))
      throw NumericalError("tridiagonal system is singular or indefinite at row " +
                           std::to_string(i - 1));
    l_[i - 1] = a.off[i - 1] / d_[i - 1];
    d_[i] = a.diag[i] - l_[i - 1] * a.off[i - 1];
  }
  if (!(d_[n - 1] > 0.0) || !std::isfinite(d_[n - 1]))
    throw NumericalError("tridiagonal system is singular or indefinite at row " +
                         std::to_string(n - 1));
}

void TridiagonalSolver::solve_in_place(double* x) const {
  const std::size_t n = d_.size();
  for (std::size_t i = 1; i < n; ++i) x[i] -= l_[i - 1] * x[i - 1];
  for (std::size_t i = 0; i < n; ++i) x[i] /= d_[i];
  for (std::size_t i = n - 1; i-- > 0;) x[i] -= l_[i] * x[i + 1];
}

std::vector<double> TridiagonalSolver::solve(std::span<const double> b) const {
  detail::require(b.size() == d_.size(), "tridiagonal solve: size mismatch");
  std::vector<double> x(b.begin(), b.end());
  solve_in_place(x.data());
  return x;
}

namespace {

// int_{-inf}^{c} of the hat centred at x with half-width h.
double hat_mass_below(double x, double h, double c) {
  if (c <= x - h) return 0.0;
  if (c <= x) {
    const double a = c - (x - h);
    return a * a / (2.0 * h);
  }
  if (c < x + h) {
    const double a = x + h - c;
    return h - a * a / (2.0 * h);
  }
  return h;
}

}  // namespace

FemMatrices assemble(const Mesh1D& mesh) {
  const std::size_t n = mesh.interior();
  const double h = mesh.h();
  FemMatrices f;
  f.mesh = mesh;
  f.mass.diag.assign(n, 2.0 * h / 3.0);
  f.mass.off.assign(n - 1, h / 6.0);
  f.stiffness.diag.assign(n, 2.0 / h);
  f.stiffness.off.assign(n - 1, -1.0 / h);
  f.load.resize(n);
  for (std::size_t k = 0; k < n; ++k) f.load[k] = hat_mass_below(mesh.node(k + 1), h, 0.5);
  return f;
}

std::vector<double> sine_load(const Mesh1D& mesh) {
  const double h = mesh.h();
  const double pi = std::numbers::pi;
  const double factor = 2.0 * (1.0 - std::cos(pi * h)) / (pi * pi * h);
  std::vector<double> b(mesh.interior());
  for (std::size_t k = 0; k < b.size(); ++k) b[k] = std::sin(pi * mesh.node(k + 1)) * factor;
  return b;
}

LcqWeights lcq_weights(double alpha, double dt, std::size_t steps) {
  if (!(alpha > 0.0 && alpha <= 1.0))
    throw ValidationError("LCQ alpha must lie in (0, 1], got " + std::to_string(alpha));
  if (!(dt > 0.0 && std::isfinite(dt))) throw ValidationError("LCQ step must be positive");
  LcqWeights w{alpha, dt, std::vector<double>(steps + 1)};
  double c = 1.0;
  const double scale = std::pow(dt, alpha);
  w.omega[0] = scale;
  for (std::size_t k = 1; k <= steps; ++k) {
    const double kd = static_cast<double>(k);
    c *= (kd - 1.0 + alpha) / kd;
    w.omega[k] = scale * c;
  }
  return w;
}

double lcq_convolve_check(const LcqWeights& weights, const TimeGrid& grid) {
  detail::require(std::abs(weights.dt - grid.dt()) <= 1e-12 * grid.dt(),
                  "LCQ weights do not match the grid step");
  detail::require(weights.omega.size() >= grid.steps() + 1, "too few LCQ weights for the grid");
  const double g = std::tgamma(weights.alpha + 1.0);
  double partial = 0.0;
  double worst = 0.0;
  for (std::size_t m = 1; m <= grid.steps(); ++m) {
    partial += weights.omega[m - 1];
    worst = std::max(worst, std::abs(partial - std::pow(grid[m], weights.alpha) / g));
  }
  return worst;
}

std::vector<double> brownian_increments(const SampleRng& rng, const TimeGrid& grid) {
  RngStream stream = rng.stream(0);
  std::vector<double> inc(grid.steps());
  stream.fill_normal(inc);
  const double s = std::sqrt(grid.dt());
  for (double& v : inc) v *= s;
  return inc;
}

FemSolution simulate_fem(const Mesh1D& mesh, const TimeGrid& grid, double alpha,
                         std::span<const double> increments, InitialDatum initial) {
  if (!(alpha > 0.0 && alpha < 1.0))
    throw ValidationError("alpha must lie in (0, 1), got " + std::to_string(alpha));
  const std::size_t M = grid.steps();
  if (!increments.empty() && increments.size() != M)
    throw ValidationError("expected " + std::to_string(M) + " Brownian increments, got " +
                          std::to_string(increments.size()));
  const FemMatrices fm = assemble(mesh);
  const LcqWeights w = lcq_weights(alpha, grid.dt(), M);
  const std::size_t n = mesh.interior();
  const double dt = grid.dt();

  SymTridiagonal system = fm.mass;
  for (std::size_t i = 0; i < n; ++i) system.diag[i] += dt * w.omega[0] * fm.stiffness.diag[i];
  for (std::size_t i = 0; i + 1 < n; ++i) system.off[i] += dt * w.omega[0] * fm.stiffness.off[i];
  const TridiagonalSolver solver(system);

  FemSolution sol{mesh, grid, RowMatrix::Zero(static_cast<long>(M + 1), static_cast<long>(n))};
  double* u0 = sol.nodal.row(0).data();
  switch (initial) {
    case InitialDatum::sine_projection: {
      const auto b = sine_load(mesh);
      std::copy(b.begin(), b.end(), u0);
      TridiagonalSolver(fm.mass).solve_in_place(u0);
      break;
    }
    case InitialDatum::sine_interpolation:
      for (std::size_t k = 0; k < n; ++k) u0[k] = std::sin(std::numbers::pi * mesh.node(k + 1));
      break;
    case InitialDatum::zero:
      break;
  }

  const auto& simd = simd::active();
  std::vector<double> history(n), stiff_hist(n), rhs(n);
  for (std::size_t step = 1; step <= M; ++step) {
    std::fill(history.begin(), history.end(), 0.0);
    for (std::size_t i = 1; i < step; ++i)
      simd.axpy(w.omega[step - i], sol.nodal.row(static_cast<long>(i)).data(), history.data(), n);
    fm.stiffness.multiply_into(history.data(), stiff_hist.data());
    fm.mass.multiply_into(sol.nodal.row(static_cast<long>(step - 1)).data(), rhs.data());
    const double db = increments.empty() ? 0.0 : increments[step - 1];
    for (std::size_t k = 0; k < n; ++k) rhs[k] += fm.load[k] * db - dt * stiff_hist[k];
    solver.solve_in_place(rhs.data());
    double* row = sol.nodal.row(static_cast<long>(step)).data();
    for (std::size_t k = 0; k < n; ++k) {
      if (!std::isfinite(rhs[k]))
        throw NumericalError("non-finite FEM state at step " + std::to_string(step));
      row[k] = rhs[k];
    }
  }
  return sol;
}

std::vector<double> prolong(const Mesh1D& coarse, std::span<const double> values,
                            const Mesh1D& fine) {
  detail::require(values.size() == coarse.interior(), "prolong: coarse value count mismatch");
  if (fine.cells() % coarse.cells() != 0)
    throw ValidationError("meshes are not nested: " + std::to_string(fine.cells()) +
                          " cells is not a multiple of " + std::to_string(coarse.cells()));
  const std::size_t r = fine.cells() / coarse.cells();
  std::vector<double> out(fine.interior());
  auto coarse_at = [&](std::size_t i) {
    return (i == 0 || i == coarse.cells()) ? 0.0 : values[i - 1];
  };
  for (std::size_t j = 1; j < fine.cells(); ++j) {
    const std::size_t i = j / r;
    const std::size_t rem = j % r;
    if (rem == 0) {
      out[j - 1] = coarse_at(i);
    } else {
      const double theta = static_cast<double>(rem) / static_cast<double>(r);
      out[j - 1] = (1.0 - theta) * coarse_at(i) + theta * coarse_at(i + 1);
    }
  }
  return out;
}

double fem_l2_norm(const SymTridiagonal& mass, std::span<const double> v) {
  const auto mv = mass.multiply(v);
  double s = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) s += v[i] * mv[i];
  return std::sqrt(std::max(s, 0.0));
}

std::vector<double> fem_error_path(const FemSolution& coarse, const FemSolution& fine) {
  if (!(coarse.grid == fine.grid)) throw ValidationError("FEM solutions use different time grids");
  if (fine.mesh.cells() % coarse.mesh.cells() != 0)
    throw ValidationError("fine mesh does not refine the coarse mesh");
  const FemMatrices fm = assemble(fine.mesh);
  const std::size_t rows = static_cast<std::size_t>(fine.nodal.rows());
  const std::size_t nc = coarse.mesh.interior();
  const std::size_t nf = fine.mesh.interior();
  std::vector<double> out(rows);
  std::vector<double> diff(nf);
  for (std::size_t m = 0; m < rows; ++m) {
    const auto p = prolong(coarse.mesh,
                           std::span(coarse.nodal.row(static_cast<long>(m)).data(), nc), fine.mesh);
    const double* f = fine.nodal.row(static_cast<long>(m)).data();
    for (std::size_t k = 0; k < nf; ++k) diff[k] = f[k] - p[k];
    out[m] = fem_l2_norm(fm.mass, diff);
  }
  return out;
}

namespace {
constexpr std::string_view kTraceMagic = "FSTRACE";
constexpr std::uint32_t kTraceVersion = 1;
}  // namespace

void write_fem_trace(const std::filesystem::path& path, const FemSolution& sol,
                     std::uint32_t sample_id) {
  BlobWriter out(kTraceMagic, kTraceVersion);
  out.put<std::uint64_t>(sol.mesh.cells());
  out.put<std::uint64_t>(sol.grid.steps());
  out.put(sol.grid.horizon());
  out.put(sample_id);
  out.put_doubles(std::span(sol.nodal.data(), static_cast<std::size_t>(sol.nodal.size())));
  out.write(path);
}

FemSolution read_fem_trace(const std::filesystem::path& path, std::uint32_t* sample_id) {
  BlobReader in(path, kTraceMagic, kTraceVersion);
  const auto cells = in.get<std::uint64_t>();
  const auto steps = in.get<std::uint64_t>();
  const auto horizon = in.get<double>();
  const auto id = in.get<std::uint32_t>();
  FemSolution sol{Mesh1D(cells), TimeGrid(horizon, steps),
                  RowMatrix(static_cast<long>(steps + 1), static_cast<long>(cells - 1))};
  in.get_doubles(std::span(sol.nodal.data(), static_cast<std::size_t>(sol.nodal.size())));
  if (!in.exhausted()) throw BlobError("trailing bytes in FEM trace " + path.string());
  if (sample_id) *sample_id = id;
  return sol;
}

}  // namespace fracsim
