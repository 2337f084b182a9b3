#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "swarmkit/error.hpp"

namespace swarmkit {

/// Box-bounded objective to be minimized. `evaluate` must be pure and safe
/// to call from several threads at once.
struct ObjectiveSpec {
  using Function = std::function<double(std::span<const double>)>;

  std::size_t dimension = 0;
  std::vector<double> lower_bound;
  std::vector<double> upper_bound;
  Function evaluate;

  static ObjectiveSpec uniform_box(std::size_t dimension, double lower, double upper,
                                   Function f) {
    ObjectiveSpec spec{dimension, std::vector<double>(dimension, lower),
                       std::vector<double>(dimension, upper), std::move(f)};
    spec.validate();
    return spec;
  }

  void validate() const {
    if (dimension == 0) throw ConfigError("objective dimension must be >= 1");
    if (lower_bound.size() != dimension || upper_bound.size() != dimension) {
      throw ConfigError("objective bounds must have " + std::to_string(dimension) + " entries");
    }
    for (std::size_t i = 0; i < dimension; ++i) {
      if (!std::isfinite(lower_bound[i]) || !std::isfinite(upper_bound[i]) ||
          !(lower_bound[i] < upper_bound[i])) {
        throw ConfigError("objective bounds invalid in dimension " + std::to_string(i));
      }
    }
    if (!evaluate) throw ConfigError("objective has no evaluation function");
  }

  double operator()(std::span<const double> x) const { return evaluate(x); }
};

}  // namespace swarmkit
