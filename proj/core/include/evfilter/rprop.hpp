#pragma once

#include <span>
#include <vector>

namespace evfilter {

struct RpropConfig {
  double increase = 1.2;  // eta+
  double decrease = 0.5;  // eta-
  double initial_step = 0.1;
  double min_step = 1e-6;
  double max_step = 50.0;

  // Throws Error unless all constants are positive, decrease < 1 < increase
  // and min_step <= initial_step <= max_step.
  void validate() const;
};

// Per-weight adaptation state.
struct RpropState {
  std::vector<double> steps;
  std::vector<double> previous_gradient;
  std::vector<double> previous_update;

  RpropState(std::size_t n, const RpropConfig& config)
      : steps(n, config.initial_step), previous_gradient(n, 0.0), previous_update(n, 0.0) {}
};

// One resilient-backpropagation update with weight backtracking:
//  - gradient sign unchanged: step *= increase (capped), move against the
//    gradient sign;
//  - sign flipped: step *= decrease (floored), undo the previous move and
//    forget the gradient so the next call takes the neutral branch;
//  - either gradient zero: move by the current step.
void rprop_step(std::span<double> weights, std::span<const double> gradient, RpropState& state,
                const RpropConfig& config);

}  // namespace evfilter
