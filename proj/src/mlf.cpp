#include "fracsim/mlf.hpp"

#include <mpfr.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <mutex>
#include <numbers>
#include <sstream>
#include <tuple>

#include "fracsim/error.hpp"

namespace fracsim {
namespace {

// Negative arguments switch to the asymptotic expansion once |z|^(1/rho)
// reaches this value; the smallest algebraic term is then ~exp(-36).
constexpr double kSwitchBase = 36.0;
// Largest log(max term) summed in double / long double before cancellation
// would eat into the tolerance.
constexpr double kDoubleLogLimit = 3.0;
constexpr double kExtendedLogLimit = 8.0;
constexpr double kSeriesHeadroom = 1.25;
constexpr std::size_t kMaxSeriesTerms = 1'000'000;
constexpr std::size_t kMaxAsymptoticTerms = 4000;

class BigFloat {
 public:
  explicit BigFloat(mpfr_prec_t prec) { mpfr_init2(v_, prec); }
  ~BigFloat() { mpfr_clear(v_); }
  BigFloat(const BigFloat&) = delete;
  BigFloat& operator=(const BigFloat&) = delete;
  BigFloat(BigFloat&& o) noexcept {
    mpfr_init2(v_, mpfr_get_prec(o.v_));
    mpfr_swap(v_, o.v_);
  }

  mpfr_ptr get() { return v_; }
  mpfr_srcptr get() const { return v_; }

 private:
  mpfr_t v_;
};

bool is_nonpositive_integer(double x) { return x <= 0.0 && x == std::floor(x); }

// sin(pi*x) with exact zeros at integers and argument reduction mod 2.
double sin_pi(double x) {
  double r = std::fmod(x, 2.0);
  if (r < 0) r += 2.0;
  if (r == 0.0 || r == 1.0) return 0.0;
  if (r > 1.0) return -std::sin(std::numbers::pi * (r - 1.0));
  return std::sin(std::numbers::pi * r);
}

// 1/Gamma(x) for any real x, via reflection for x <= 0.
double rgamma(double x) {
  if (is_nonpositive_integer(x)) return 0.0;
  if (x > 0.0) {
    if (x > 171.0) return std::exp(-std::lgamma(x));
    return 1.0 / std::tgamma(x);
  }
  const double s = sin_pi(x);
  const double g = std::lgamma(1.0 - x);
  return s / std::numbers::pi * std::exp(g);
}

}  // namespace

struct MittagLeffler::Impl {
  double rho;
  double mu;
  double tol;
  double z_max;
  double radius;
  double log_tol;

  // Series tables, sized for |z| <= kSeriesHeadroom * radius so both paths
  // can be compared around the switch.
  std::vector<double> log_gamma;    // lgamma(rho k + mu)
  std::vector<double> coef;         // 1/Gamma(rho k + mu)
  std::vector<long double> coef_ld;
  double log_max_at_radius = 0.0;

  // Asymptotic tables.
  std::vector<double> asym_coef;     // 1/Gamma(mu - rho k), k >= 1 (index k)
  std::vector<double> asym_log_mag;  // log of a bound on |asym_coef|

  mutable std::once_flag mp_once;
  mutable std::vector<BigFloat> coef_mp;
  mutable mpfr_prec_t mp_prec = 0;

  Impl(double r, double m, double t, double zm)
      : rho(r), mu(m), tol(t), z_max(zm), radius(mlf_switch_radius(r)), log_tol(std::log(t)) {
    build_series_tables();
    build_asymptotic_tables();
  }

  double log_term(std::size_t k, double log_abs_z) const {
    return static_cast<double>(k) * log_abs_z - log_gamma[k];
  }

  void build_series_tables() {
    const double lr = std::log(kSeriesHeadroom * radius);
    double peak = -std::numeric_limits<double>::infinity();
    bool past_peak = false;
    double prev = -std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < kMaxSeriesTerms; ++k) {
      const double lg = std::lgamma(rho * static_cast<double>(k) + mu);
      log_gamma.push_back(lg);
      coef.push_back(std::exp(-lg));
      coef_ld.push_back(std::exp(-std::lgamma(static_cast<long double>(rho) * k + mu)));
      const double lt = static_cast<double>(k) * lr - lg;
      peak = std::max(peak, lt);
      if (lt < prev) past_peak = true;
      prev = lt;
      if (past_peak && lt < log_tol - 12.0) break;
    }
    log_max_at_radius = peak;
  }

  void build_asymptotic_tables() {
    asym_coef.assign(1, 0.0);
    asym_log_mag.assign(1, 0.0);
    for (std::size_t k = 1; k <= kMaxAsymptoticTerms; ++k) {
      const double arg = mu - rho * static_cast<double>(k);
      if (1.0 - arg > 170.0) break;
      asym_coef.push_back(rgamma(arg));
      if (arg > 0.0)
        asym_log_mag.push_back(-std::lgamma(arg));
      else
        asym_log_mag.push_back(std::lgamma(1.0 - arg) - std::log(std::numbers::pi));
    }
  }

  void build_multiprecision() const {
    const double terms = static_cast<double>(coef.size());
    const double bits = (log_max_at_radius + std::log(terms) - log_tol + 12.0) / std::numbers::ln2;
    mp_prec = static_cast<mpfr_prec_t>(std::ceil(bits)) + 32;
    BigFloat arg(mp_prec);
    BigFloat tmp(mp_prec);
    coef_mp.reserve(coef.size());
    for (std::size_t k = 0; k < coef.size(); ++k) {
      mpfr_set_d(arg.get(), rho, MPFR_RNDN);
      mpfr_mul_ui(arg.get(), arg.get(), static_cast<unsigned long>(k), MPFR_RNDN);
      mpfr_add_d(arg.get(), arg.get(), mu, MPFR_RNDN);
      mpfr_gamma(tmp.get(), arg.get(), MPFR_RNDN);
      BigFloat c(mp_prec);
      mpfr_ui_div(c.get(), 1, tmp.get(), MPFR_RNDN);
      coef_mp.push_back(std::move(c));
    }
  }

  // Number of series terms needed and the log of the largest term.
  std::pair<std::size_t, double> series_extent(double abs_z) const {
    if (abs_z == 0.0) return {1, log_term(0, 0.0)};
    const double lz = std::log(abs_z);
    double peak = -std::numeric_limits<double>::infinity();
    double prev = peak;
    bool past_peak = false;
    for (std::size_t k = 0; k < log_gamma.size(); ++k) {
      const double lt = log_term(k, lz);
      peak = std::max(peak, lt);
      if (lt < prev) past_peak = true;
      prev = lt;
      if (past_peak && lt < log_tol - 8.0) return {k + 1, peak};
    }
    throw AccuracyError("Mittag-Leffler series table exhausted", std::exp(prev));
  }

  MlfRegime regime(double z) const {
    if (z < 0.0 && -z > radius) return MlfRegime::asymptotic;
    if (z > 0.0) return MlfRegime::series_double;
    const auto [n, peak] = series_extent(-z);
    (void)n;
    if (peak <= kDoubleLogLimit) return MlfRegime::series_double;
    if (peak <= kExtendedLogLimit) return MlfRegime::series_extended;
    return MlfRegime::series_multiprecision;
  }

  double series_positive(double z) const {
    const double lz = std::log(z);
    double sum = 0.0;
    double prev = -std::numeric_limits<double>::infinity();
    bool past_peak = false;
    for (std::size_t k = 0; k < kMaxSeriesTerms; ++k) {
      const double kd = static_cast<double>(k);
      const double lt = kd * lz - std::lgamma(rho * kd + mu);
      const double term = std::exp(lt);
      sum += term;
      if (lt < prev) past_peak = true;
      prev = lt;
      if (!std::isfinite(sum))
        throw AccuracyError("Mittag-Leffler series overflow at z=" + std::to_string(z), sum);
      if (past_peak && term < 1e-3 * tol * std::max(1.0, sum)) return sum;
    }
    throw AccuracyError("Mittag-Leffler series did not converge", std::exp(prev));
  }

  double series(double z) const {
    if (z == 0.0) return coef[0];
    if (z > 0.0) return series_positive(z);
    const auto [n, peak] = series_extent(-z);
    if (peak <= kDoubleLogLimit) {
      double sum = 0.0;
      double power = 1.0;
      for (std::size_t k = 0; k < n; ++k) {
        sum += coef[k] * power;
        power *= z;
      }
      return sum;
    }
    if (peak <= kExtendedLogLimit) {
      long double sum = 0.0L;
      long double power = 1.0L;
      const long double zl = z;
      for (std::size_t k = 0; k < n; ++k) {
        sum += coef_ld[k] * power;
        power *= zl;
      }
      return static_cast<double>(sum);
    }
    std::call_once(mp_once, [this] { build_multiprecision(); });
    BigFloat acc(mp_prec);
    mpfr_set(acc.get(), coef_mp[n - 1].get(), MPFR_RNDN);
    for (std::size_t k = n - 1; k-- > 0;) {
      mpfr_mul_d(acc.get(), acc.get(), z, MPFR_RNDN);
      mpfr_add(acc.get(), acc.get(), coef_mp[k].get(), MPFR_RNDN);
    }
    return mpfr_get_d(acc.get(), MPFR_RNDN);
  }

  double exponential_part(double x) const {
    if (rho < 1.0) return 0.0;
    const double mag = std::pow(x, 1.0 / rho);
    const double theta = std::numbers::pi / rho;
    const double weight = (rho == 1.0) ? 1.0 / rho : 2.0 / rho;
    const double amp = std::exp(mag * std::cos(theta)) * std::pow(mag, 1.0 - mu);
    return weight * amp * std::cos(mag * std::sin(theta) + (1.0 - mu) * theta);
  }

  double asymptotic(double z) const {
    if (!(z < 0.0)) throw ValidationError("asymptotic Mittag-Leffler expansion needs z < 0");
    const double x = -z;
    const double lx = std::log(x);
    const double inv_x = 1.0 / x;
    // E(z) ~ -sum_k z^{-k}/Gamma(mu - rho k) = -sum_k (-1/x)^k c_k.
    double sum = 0.0;
    double power = 1.0;
    double prev_mag = std::numeric_limits<double>::infinity();
    for (std::size_t k = 1; k < asym_coef.size(); ++k) {
      power *= -inv_x;
      const double log_mag = asym_log_mag[k] - static_cast<double>(k) * lx;
      if (log_mag < log_tol - 8.0) return sum + exponential_part(x);
      if (log_mag > prev_mag && k > 2) {
        const double residual = std::exp(prev_mag);
        if (residual > tol)
          throw AccuracyError("Mittag-Leffler asymptotic expansion diverges before reaching tol",
                              residual);
        return sum + exponential_part(x);
      }
      prev_mag = log_mag;
      sum -= power * asym_coef[k];
    }
    throw AccuracyError("Mittag-Leffler asymptotic table exhausted", std::exp(prev_mag));
  }

  double evaluate(double z) const {
    if (!std::isfinite(z)) throw ValidationError("Mittag-Leffler argument must be finite");
    if (z > z_max) {
      std::ostringstream os;
      os << "Mittag-Leffler argument " << z << " exceeds overflow guard z_max=" << z_max;
      throw ValidationError(os.str());
    }
    if (z < 0.0 && -z > radius) return asymptotic(z);
    return series(z);
  }
};

double mlf_switch_radius(double rho) { return std::pow(kSwitchBase, rho); }

MittagLeffler::MittagLeffler(double rho, double mu, double tol, double z_max) {
  if (!(rho > 0.0 && rho <= 2.0))
    throw ValidationError("Mittag-Leffler rho must lie in (0, 2], got " + std::to_string(rho));
  if (!(mu > 0.0 && std::isfinite(mu)))
    throw ValidationError("Mittag-Leffler mu must be positive, got " + std::to_string(mu));
  if (!(tol >= 1e-15 && tol < 1.0))
    throw ValidationError("Mittag-Leffler tol must lie in [1e-15, 1), got " + std::to_string(tol));
  if (!(z_max > 0.0)) throw ValidationError("Mittag-Leffler z_max must be positive");
  impl_ = std::make_unique<Impl>(rho, mu, tol, z_max);
}

MittagLeffler::~MittagLeffler() = default;
MittagLeffler::MittagLeffler(MittagLeffler&&) noexcept = default;
MittagLeffler& MittagLeffler::operator=(MittagLeffler&&) noexcept = default;

double MittagLeffler::operator()(double z) const { return impl_->evaluate(z); }
double MittagLeffler::series(double z) const { return impl_->series(z); }
double MittagLeffler::asymptotic(double z) const { return impl_->asymptotic(z); }
MlfRegime MittagLeffler::regime(double z) const { return impl_->regime(z); }
double MittagLeffler::rho() const noexcept { return impl_->rho; }
double MittagLeffler::mu() const noexcept { return impl_->mu; }
double MittagLeffler::tol() const noexcept { return impl_->tol; }
double MittagLeffler::switch_radius() const noexcept { return impl_->radius; }

std::shared_ptr<const MittagLeffler> mlf_evaluator(double rho, double mu, double tol,
                                                   double z_max) {
  using Key = std::tuple<double, double, double, double>;
  static std::mutex mutex;
  static std::map<Key, std::shared_ptr<const MittagLeffler>> cache;
  const Key key{rho, mu, tol, z_max};
  {
    std::lock_guard lock(mutex);
    if (auto it = cache.find(key); it != cache.end()) return it->second;
  }
  auto eval = std::make_shared<const MittagLeffler>(rho, mu, tol, z_max);
  std::lock_guard lock(mutex);
  return cache.emplace(key, std::move(eval)).first->second;
}

double mlf(const MlfRequest& req) {
  return (*mlf_evaluator(req.rho, req.mu, req.tol, req.z_max))(req.z);
}

std::vector<double> mlf_grid(double rho, double mu, std::span<const double> args, double tol) {
  const auto eval = mlf_evaluator(rho, mu, tol, kDefaultMlfZMax);
  std::vector<double> out;
  out.reserve(args.size());
  for (std::size_t i = 0; i < args.size(); ++i) {
    try {
      out.push_back((*eval)(args[i]));
    } catch (const ValidationError& e) {
      throw ValidationError("mlf_grid index " + std::to_string(i) + ": " + e.what());
    } catch (const AccuracyError& e) {
      throw AccuracyError("mlf_grid index " + std::to_string(i) + ": " + e.what(), e.residual());
    }
  }
  return out;
}

}  // namespace fracsim
