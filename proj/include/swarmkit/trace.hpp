#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "swarmkit/error.hpp"

namespace swarmkit {

struct TraceEntry {
  std::int64_t iteration = 0;
  double best_fitness = 0.0;
  std::uint64_t evaluations = 0;  // cumulative objective calls (or tours) so far

  friend bool operator==(const TraceEntry&, const TraceEntry&) = default;
};

/// Best-so-far record of one seeded run. Fitness is minimized.
struct RunTrace {
  std::uint64_t seed = 0;
  std::vector<TraceEntry> entries;
  std::uint64_t evaluations = 0;
  std::uint64_t non_finite_evaluations = 0;

  [[nodiscard]] bool empty() const noexcept { return entries.empty(); }
  [[nodiscard]] std::size_t iterations() const noexcept { return entries.size(); }
  [[nodiscard]] double best_fitness() const { return entries.back().best_fitness; }

  friend bool operator==(const RunTrace&, const RunTrace&) = default;
};

struct TerminationCriteria {
  std::int64_t max_iterations = 1000;
  std::optional<double> target_fitness;  // absolute threshold on the best fitness

  void validate() const {
    if (max_iterations < 1) throw ConfigError("max_iterations must be >= 1");
  }
};

inline bool should_terminate(const RunTrace& trace, const TerminationCriteria& criteria) {
  if (static_cast<std::int64_t>(trace.entries.size()) >= criteria.max_iterations) return true;
  if (criteria.target_fitness && !trace.entries.empty()) {
    return trace.entries.back().best_fitness <= *criteria.target_fitness;
  }
  return false;
}

/// Appends the next entry, flooring best_fitness at the previous best.
/// `evaluations` is the caller's cumulative count after this iteration.
inline RunTrace& record_iteration(RunTrace& trace, std::int64_t iteration, double best,
                                  std::uint64_t evaluations) {
  const std::int64_t expected = trace.entries.empty() ? 0 : trace.entries.back().iteration + 1;
  if (iteration != expected) {
    throw ContractViolation("record_iteration: expected iteration " + std::to_string(expected) +
                            ", got " + std::to_string(iteration));
  }
  // NaN never replaces a recorded value.
  double floored = best;
  if (!trace.entries.empty()) {
    const double previous = trace.entries.back().best_fitness;
    floored = (best < previous) ? best : previous;
  }
  trace.entries.push_back({iteration, floored, evaluations});
  trace.evaluations = evaluations;
  return trace;
}

inline RunTrace& record_iteration(RunTrace& trace, std::int64_t iteration, double best) {
  return record_iteration(trace, iteration, best, trace.evaluations);
}

}  // namespace swarmkit
