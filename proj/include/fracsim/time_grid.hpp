#pragma once

#include <cstddef>
#include <vector>

namespace fracsim {

/// Uniform partition 0 = t_0 < ... < t_M = T.
class TimeGrid {
 public:
  TimeGrid(double horizon, std::size_t steps);

  /// Grid with step dt; dt must divide T within 1e-12 relative.
  static TimeGrid from_step(double horizon, double dt);

  double horizon() const noexcept { return horizon_; }
  std::size_t steps() const noexcept { return steps_; }
  std::size_t size() const noexcept { return nodes_.size(); }
  double dt() const noexcept { return dt_; }
  double operator[](std::size_t m) const { return nodes_[m]; }
  const std::vector<double>& nodes() const noexcept { return nodes_; }

  bool operator==(const TimeGrid& other) const noexcept {
    return steps_ == other.steps_ && horizon_ == other.horizon_;
  }

 private:
  double horizon_;
  std::size_t steps_;
  double dt_;
  std::vector<double> nodes_;
};

}  // namespace fracsim
