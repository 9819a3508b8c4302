#include "evfilter/rprop.hpp"

#include <algorithm>

#include "evfilter/errors.hpp"

namespace evfilter {
namespace {

double sign(double x) { return x > 0 ? 1.0 : (x < 0 ? -1.0 : 0.0); }

}  // namespace

void RpropConfig::validate() const {
  if (!(increase > 1.0 && decrease > 0.0 && decrease < 1.0)) throw Error("rprop factors need 0 < eta- < 1 < eta+");
  if (!(min_step > 0.0 && min_step <= initial_step && initial_step <= max_step)) {
    throw Error("rprop steps need 0 < min <= initial <= max");
  }
}

void rprop_step(std::span<double> weights, std::span<const double> gradient, RpropState& state,
                const RpropConfig& config) {
  if (gradient.size() != weights.size() || state.steps.size() != weights.size()) {
    throw Error("rprop buffers differ in size");
  }
  for (std::size_t i = 0; i < weights.size(); ++i) {
    const double g = gradient[i];
    const double direction = g * state.previous_gradient[i];
    if (direction > 0) {
      state.steps[i] = std::min(state.steps[i] * config.increase, config.max_step);
      const double update = -sign(g) * state.steps[i];
      weights[i] += update;
      state.previous_update[i] = update;
      state.previous_gradient[i] = g;
    } else if (direction < 0) {
      state.steps[i] = std::max(state.steps[i] * config.decrease, config.min_step);
      weights[i] -= state.previous_update[i];
      state.previous_update[i] = 0.0;
      state.previous_gradient[i] = 0.0;
    } else {
      const double update = -sign(g) * state.steps[i];
      weights[i] += update;
      state.previous_update[i] = update;
      state.previous_gradient[i] = g;
    }
  }
}

}  // namespace evfilter
