#include "fracsim/time_grid.hpp"

#include <cmath>
#include <string>

#include "fracsim/error.hpp"

namespace fracsim {

TimeGrid::TimeGrid(double horizon, std::size_t steps) : horizon_(horizon), steps_(steps) {
  detail::require(horizon > 0.0 && std::isfinite(horizon), "time horizon must be positive");
  detail::require(steps >= 1, "time grid needs at least one step");
  dt_ = horizon / static_cast<double>(steps);
  nodes_.resize(steps + 1);
  for (std::size_t m = 0; m <= steps; ++m)
    nodes_[m] = horizon * static_cast<double>(m) / static_cast<double>(steps);
  nodes_[steps] = horizon;
}

TimeGrid TimeGrid::from_step(double horizon, double dt) {
  detail::require(dt > 0.0 && dt <= horizon, "time step must lie in (0, T]");
  const double ratio = horizon / dt;
  const double steps = std::round(ratio);
  if (std::abs(ratio - steps) > 1e-12 * ratio)
    detail::fail_validation("time step " + std::to_string(dt) + " does not divide T=" +
                            std::to_string(horizon));
  return TimeGrid(horizon, static_cast<std::size_t>(steps));
}

}  // namespace fracsim
