#include "fracsim/norms.hpp"

#include <algorithm>
#include <cmath>

#include "fracsim/error.hpp"
#include "fracsim/simd/kernels.hpp"

namespace fracsim {

void NormedPath::validate() const {
  detail::require(!values.empty(), "normed path is empty");
  detail::require(times.size() == values.size(), "normed path: times and values differ in length");
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!std::isfinite(values[i]) || values[i] < 0.0)
      throw ValidationError("normed path value " + std::to_string(i) + " is negative or non-finite");
    if (i > 0 && !(times[i] > times[i - 1]))
      throw ValidationError("normed path times must be strictly increasing");
  }
}

double holder_seminorm(const NormedPath& path, const DiffNorm& diff, double gamma) {
  if (!(gamma > 0.0 && gamma < 1.0))
    throw ValidationError("Hoelder exponent must lie in (0, 1); use sup_norm for gamma = 0");
  path.validate();
  double best = 0.0;
  const std::size_t n = path.times.size();
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      best = std::max(best, diff(i, j) / std::pow(path.times[j] - path.times[i], gamma));
  return best;
}

double holder_seminorm_scalar(const NormedPath& path, double gamma) {
  return holder_seminorm(
      path, [&](std::size_t i, std::size_t j) { return std::abs(path.values[i] - path.values[j]); },
      gamma);
}

double sup_norm(const NormedPath& path) {
  path.validate();
  return *std::max_element(path.values.begin(), path.values.end());
}

double lp_omega_estimate(std::span<const double> sample_norms, double p) {
  if (sample_norms.empty()) throw ValidationError("L^p estimate needs at least one sample");
  if (!(p > 0.0 && std::isfinite(p))) throw ValidationError("L^p exponent must be positive");
  double s = 0.0;
  for (double x : sample_norms) {
    if (!(x >= 0.0)) throw ValidationError("sample norms must be nonnegative");
    s += p == 2.0 ? x * x : std::pow(x, p);
  }
  s /= static_cast<double>(sample_norms.size());
  return p == 2.0 ? std::sqrt(s) : std::pow(s, 1.0 / p);
}

double empirical_rate(std::span<const double> errors, std::span<const double> dims) {
  if (errors.size() != dims.size() || errors.size() < 2)
    throw ValidationError("empirical rate needs matching error/dimension lists of length >= 2");
  for (std::size_t i = 0; i < errors.size(); ++i) {
    if (!(errors[i] > 0.0) || !std::isfinite(errors[i]))
      throw ValidationError("error " + std::to_string(i) + " is not strictly positive");
    if (i > 0 && !(dims[i] > dims[i - 1]))
      throw ValidationError("dimensions must be strictly increasing");
  }
  double rate = INFINITY;
  for (std::size_t i = 0; i + 1 < errors.size(); ++i)
    rate = std::min(rate, -std::log(errors[i] / errors[i + 1]) / std::log(dims[i] / dims[i + 1]));
  return rate;
}

std::string_view method_name(Method m) noexcept {
  return m == Method::spectral ? "spectral" : "fem";
}

double theoretical_rate(Method method, double alpha, double gamma) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw ValidationError("alpha must lie in (0, 1)");
  if (!(gamma >= 0.0 && gamma < 0.5)) throw ValidationError("gamma must lie in [0, 1/2)");
  const double r = (1.0 - 2.0 * gamma) / (1.0 + alpha);
  return method == Method::spectral ? r - 0.5 : r;
}

std::vector<double> gram_holder_norms(const double* gram, std::size_t n,
                                      std::span<const double> times,
                                      std::span<const double> gammas) {
  detail::require(n >= 1 && times.size() == n, "Gram matrix and time list disagree");
  const double gap = n > 1 ? times[1] - times[0] : 1.0;
  for (std::size_t i = 1; i < n; ++i)
    if (std::abs(times[i] - times[0] - static_cast<double>(i) * gap) > 1e-9 * times[n - 1])
      throw ValidationError("Gram Hoelder norms need a uniform measurement grid");

  std::vector<double> diag(n);
  for (std::size_t i = 0; i < n; ++i) diag[i] = gram[i * n + i];
  const auto& k = simd::active();
  std::vector<double> out;
  std::vector<double> lag(n);
  for (double gamma : gammas) {
    if (gamma == 0.0) {
      out.push_back(std::sqrt(std::max(0.0, *std::max_element(diag.begin(), diag.end()))));
      continue;
    }
    if (!(gamma > 0.0 && gamma < 1.0)) throw ValidationError("Hoelder exponent must lie in [0, 1)");
    for (std::size_t d = 1; d < n; ++d) lag[d - 1] = std::pow(static_cast<double>(d) * gap, -2.0 * gamma);
    double best = 0.0;
    for (std::size_t i = 0; i + 1 < n; ++i)
      best = std::max(best, k.gram_pair_max(diag[i], &diag[i + 1], &gram[i * n + i + 1], lag.data(),
                                            n - i - 1));
    out.push_back(std::sqrt(best));
  }
  return out;
}

}  // namespace fracsim
