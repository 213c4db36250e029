#pragma once

// Two-parameter Mittag-Leffler function E_{rho,mu}(z) = sum_k z^k / Gamma(rho k + mu)
// for real arguments.
//
// Evaluation is a hybrid: the power series is summed for |z| up to a switch
// radius, and for large negative z the asymptotic expansion (algebraic tail
// plus, for rho >= 1, the oscillating exponential contributions) is used.
// The series picks its working precision from the size of its largest term,
// so catastrophic cancellation is absorbed by long double or MPFR arithmetic.

#include <cstddef>
#include <memory>
#include <span>
#include <vector>

namespace fracsim {

inline constexpr double kDefaultMlfTol = 1e-12;
inline constexpr double kDefaultMlfZMax = 50.0;

struct MlfRequest {
  double rho = 1.0;
  double mu = 1.0;
  double z = 0.0;
  double tol = kDefaultMlfTol;
  double z_max = kDefaultMlfZMax;  // overflow guard for positive arguments
};

/// Which summation path evaluated a given argument.
enum class MlfRegime { series_double, series_extended, series_multiprecision, asymptotic };

/// Evaluator for fixed (rho, mu, tol). Coefficient tables are built once and
/// shared; evaluation is const and thread-safe.
class MittagLeffler {
 public:
  MittagLeffler(double rho, double mu = 1.0, double tol = kDefaultMlfTol,
                double z_max = kDefaultMlfZMax);
  ~MittagLeffler();
  MittagLeffler(MittagLeffler&&) noexcept;
  MittagLeffler& operator=(MittagLeffler&&) noexcept;
  MittagLeffler(const MittagLeffler&) = delete;
  MittagLeffler& operator=(const MittagLeffler&) = delete;

  double operator()(double z) const;

  /// Power series only, at whatever precision the argument needs.
  double series(double z) const;
  /// Asymptotic expansion only; z must be negative. Throws AccuracyError when
  /// the smallest algebraic term is above tol.
  double asymptotic(double z) const;

  MlfRegime regime(double z) const;

  double rho() const noexcept;
  double mu() const noexcept;
  double tol() const noexcept;
  /// |z| at which negative arguments move from the series to the asymptotic path.
  double switch_radius() const noexcept;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

/// Switch radius used for a given rho: 36^rho.
double mlf_switch_radius(double rho);

double mlf(const MlfRequest& req);

/// Element-wise mlf; bit-identical to calling mlf on each argument.
std::vector<double> mlf_grid(double rho, double mu, std::span<const double> args,
                             double tol = kDefaultMlfTol);

/// Shared evaluator for (rho, mu, tol); cached process-wide.
std::shared_ptr<const MittagLeffler> mlf_evaluator(double rho, double mu,
                                                   double tol = kDefaultMlfTol,
                                                   double z_max = kDefaultMlfZMax);

}  // namespace fracsim
