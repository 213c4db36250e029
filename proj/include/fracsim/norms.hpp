#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <string_view>
#include <vector>

#include "fracsim/time_grid.hpp"

namespace fracsim {

/// Node times and ||e(t_m)|| on a (possibly subsampled) measurement grid.
struct NormedPath {
  std::vector<double> times;
  std::vector<double> values;

  void validate() const;
};

/// ||e(t_i) - e(t_j)|| for node indices i, j of the path.
using DiffNorm = std::function<double(std::size_t, std::size_t)>;

/// max_{i<j} diff(i, j) / (t_j - t_i)^gamma, gamma in (0, 1).
double holder_seminorm(const NormedPath& path, const DiffNorm& diff, double gamma);

/// Path of scalars: the difference norm is |v_i - v_j|.
double holder_seminorm_scalar(const NormedPath& path, double gamma);

double sup_norm(const NormedPath& path);

/// ((1/S) sum x_s^p)^(1/p).
double lp_omega_estimate(std::span<const double> sample_norms, double p);

/// min over consecutive i of -ln(err_i / err_{i+1}) / ln(dim_i / dim_{i+1}).
double empirical_rate(std::span<const double> errors, std::span<const double> dims);

enum class Method { spectral, fem };

std::string_view method_name(Method m) noexcept;

/// Spectral: (1 - 2 gamma) / (1 + alpha) - 1/2. FEM: (1 - 2 gamma) / (1 + alpha).
double theoretical_rate(Method method, double alpha, double gamma);

/// Hoelder seminorms for several exponents from a Gram matrix
/// G_ij = <e(t_i), e(t_j)> of the sampled nodes, row-major n x n. The squared
/// difference norm is G_ii + G_jj - 2 G_ij, clipped at 0. gamma = 0 entries
/// return the sup norm sqrt(max G_ii).
std::vector<double> gram_holder_norms(const double* gram, std::size_t n,
                                      std::span<const double> times,
                                      std::span<const double> gammas);

}  // namespace fracsim
