#pragma once

#include <cstdio>
#include <stdexcept>
#include <string>

namespace fracsim {

/// Parameter or input outside the documented domain.
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A numerical routine could not reach its accuracy target.
class AccuracyError : public std::runtime_error {
 public:
  AccuracyError(const std::string& what, double residual)
      : std::runtime_error(what + " (achieved residual " + format(residual) + ")"),
        residual_(residual) {}

  double residual() const noexcept { return residual_; }

 private:
  static std::string format(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3e", v);
    return buf;
  }

  double residual_;
};

/// Unrecoverable numerical failure (singular system, non-finite state).
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace detail {

[[noreturn]] inline void fail_validation(const std::string& msg) { throw ValidationError(msg); }

inline void require(bool cond, const std::string& msg) {
  if (!cond) fail_validation(msg);
}

}  // namespace detail
}  // namespace fracsim
