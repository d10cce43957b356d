#pragma once

#include <functional>
#include <span>
#include <stdexcept>
#include <vector>

namespace finsler {

struct StepUnderflow : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct FDConfig {
  double base_step = 1e-3;  // relative, scaled by 1 + |point|
  int richardson_levels = 2;
  // vertical derivatives of curvature quantities need larger steps to beat
  // pipeline roundoff; calibrated on the fixtures
  double step_order2 = 3e-3;
  double step_order3 = 1e-2;
};

struct FDResult {
  double value = 0.0;
  double error_estimate = 0.0;
};

/// Central-difference mixed partial d^mu f with Richardson extrapolation.
/// |mu| <= 4 per variable combination; base accuracy O(h^2), each
/// Richardson level gains two orders.
FDResult fd_derivative(const std::function<double(std::span<const double>)>& f,
                       std::span<const double> point, std::span<const int> mu,
                       double h, int richardson_levels);

}  // namespace finsler
