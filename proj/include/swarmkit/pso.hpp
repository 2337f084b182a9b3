#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "swarmkit/error.hpp"
#include "swarmkit/objective.hpp"
#include "swarmkit/parallel.hpp"
#include "swarmkit/rng.hpp"
#include "swarmkit/trace.hpp"

namespace swarmkit::pso {

struct Particle {
  std::vector<double> position;
  std::vector<double> velocity;
  std::vector<double> pbest_position;
  double pbest_fitness = std::numeric_limits<double>::infinity();

  friend bool operator==(const Particle&, const Particle&) = default;
};

/// Neighbourhood used to pick each particle's guide.
struct Topology {
  enum class Kind { Global, Ring };

  Kind kind = Kind::Global;
  std::size_t radius = 1;  // ring only: neighbours i-radius .. i+radius

  static constexpr Topology global() noexcept { return {Kind::Global, 0}; }
  static constexpr Topology ring(std::size_t k = 1) noexcept { return {Kind::Ring, k}; }

  friend bool operator==(const Topology&, const Topology&) = default;
};

struct PsoConfig {
  std::size_t swarm_size = 30;
  double c1 = 2.0;  // cognitive learning factor
  double c2 = 2.0;  // social learning factor
  std::optional<double> vmax;  // unset: half the search range, per dimension
  Topology topology = Topology::global();
  TerminationCriteria termination;

  void validate() const {
    if (swarm_size < 1) throw ConfigError("swarm_size must be >= 1");
    if (!(c1 >= 0.0) || !std::isfinite(c1)) throw ConfigError("c1 must be a finite value >= 0");
    if (!(c2 >= 0.0) || !std::isfinite(c2)) throw ConfigError("c2 must be a finite value >= 0");
    if (vmax && !(*vmax > 0.0 && std::isfinite(*vmax))) throw ConfigError("vmax must be > 0");
    if (topology.kind == Topology::Kind::Ring &&
        (topology.radius < 1 || topology.radius >= swarm_size)) {
      throw ConfigError("ring radius k must satisfy 1 <= k < swarm_size");
    }
    termination.validate();
  }
};

struct SwarmState {
  std::vector<Particle> particles;
  std::vector<double> gbest_position;
  double gbest_fitness = std::numeric_limits<double>::infinity();
  std::int64_t iteration = 0;
  std::uint64_t evaluations = 0;
  std::uint64_t non_finite_evaluations = 0;

  friend bool operator==(const SwarmState&, const SwarmState&) = default;
};

/// Per-dimension velocity cap: config.vmax if set, else 0.5 * (upper - lower).
inline std::vector<double> resolve_vmax(const ObjectiveSpec& objective, const PsoConfig& config) {
  std::vector<double> vmax(objective.dimension);
  for (std::size_t i = 0; i < objective.dimension; ++i) {
    vmax[i] = config.vmax ? *config.vmax
                          : 0.5 * (objective.upper_bound[i] - objective.lower_bound[i]);
  }
  return vmax;
}

/// One stream per particle: particle i draws from (seed, i).
inline std::vector<RngStream> make_particle_streams(std::uint64_t seed, std::size_t count) {
  std::vector<RngStream> streams;
  streams.reserve(count);
  for (std::size_t i = 0; i < count; ++i) streams.push_back(derive_stream(seed, i));
  return streams;
}

inline std::vector<double> clamp_velocity(std::span<const double> v, double vmax) {
  if (!(vmax > 0.0)) throw ContractViolation("clamp_velocity: vmax must be > 0");
  std::vector<double> out(v.begin(), v.end());
  for (auto& c : out) c = std::min(vmax, std::max(-vmax, c));
  return out;
}

inline std::vector<double> clamp_velocity(std::span<const double> v,
                                          std::span<const double> vmax) {
  if (v.size() != vmax.size()) throw ContractViolation("clamp_velocity: dimension mismatch");
  std::vector<double> out(v.begin(), v.end());
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = std::min(vmax[i], std::max(-vmax[i], out[i]));
  }
  return out;
}

/// Velocity update followed by clamping. For each dimension in ascending
/// order r1 is drawn before r2.
template <UniformSource Source>
std::vector<double> update_velocity(const Particle& particle, std::span<const double> guide,
                                    double c1, double c2, std::span<const double> vmax,
                                    Source& source) {
  const std::size_t d = particle.position.size();
  if (particle.velocity.size() != d || particle.pbest_position.size() != d ||
      guide.size() != d || vmax.size() != d) {
    throw ContractViolation("update_velocity: dimension mismatch");
  }
  std::vector<double> v(d);
  for (std::size_t i = 0; i < d; ++i) {
    const double r1 = source.next_uniform();
    const double r2 = source.next_uniform();
    const double x = particle.position[i];
    v[i] = particle.velocity[i] + c1 * r1 * (particle.pbest_position[i] - x) +
           c2 * r2 * (guide[i] - x);
  }
  return clamp_velocity(v, vmax);
}

template <UniformSource Source>
std::vector<double> update_velocity(const Particle& particle, std::span<const double> guide,
                                    const PsoConfig& config, std::span<const double> vmax,
                                    Source& source) {
  return update_velocity(particle, guide, config.c1, config.c2, vmax, source);
}

/// Overload for a scalar cap; requires config.vmax to be set.
template <UniformSource Source>
std::vector<double> update_velocity(const Particle& particle, std::span<const double> guide,
                                    const PsoConfig& config, Source& source) {
  if (!config.vmax) throw ConfigError("update_velocity: config.vmax is unset");
  const std::vector<double> vmax(particle.position.size(), *config.vmax);
  return update_velocity(particle, guide, config.c1, config.c2, vmax, source);
}

/// Positions are not clamped to the search box.
inline std::vector<double> update_position(std::span<const double> position,
                                           std::span<const double> velocity) {
  if (position.size() != velocity.size()) {
    throw ContractViolation("update_position: dimension mismatch");
  }
  std::vector<double> out(position.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = position[i] + velocity[i];
  return out;
}

/// Strict improvement only; NaN and infinities never replace the pbest.
/// Returns true when the pbest changed.
inline bool update_pbest(Particle& particle, double new_fitness) {
  if (!std::isfinite(new_fitness) || !(new_fitness < particle.pbest_fitness)) return false;
  particle.pbest_position = particle.position;
  particle.pbest_fitness = new_fitness;
  return true;
}

/// Index of the particle whose pbest guides `particle_index`; ties go to the
/// lowest index.
inline std::size_t guide_index(const SwarmState& state, std::size_t particle_index,
                               const Topology& topology) {
  const std::size_t n = state.particles.size();
  if (particle_index >= n) {
    throw ContractViolation("select_guide: particle index " + std::to_string(particle_index) +
                            " out of range");
  }
  auto better = [&](std::size_t a, std::size_t b) {
    const double fa = state.particles[a].pbest_fitness;
    const double fb = state.particles[b].pbest_fitness;
    return fa < fb || (!(fb < fa) && a < b);
  };

  std::size_t best = particle_index;
  if (topology.kind == Topology::Kind::Global || 2 * topology.radius + 1 >= n) {
    best = 0;
    for (std::size_t j = 1; j < n; ++j) {
      if (better(j, best)) best = j;
    }
    return best;
  }
  const std::size_t k = topology.radius;
  for (std::size_t off = 0; off <= 2 * k; ++off) {
    const std::size_t j = (particle_index + n - k + off) % n;
    if (better(j, best)) best = j;
  }
  return best;
}

/// Global topology returns gbest; Ring(k) returns the lbest of the index
/// ring of radius k around the particle, itself included.
inline std::span<const double> select_guide(const SwarmState& state, std::size_t particle_index,
                                            const Topology& topology) {
  if (particle_index >= state.particles.size()) {
    throw ContractViolation("select_guide: particle index " + std::to_string(particle_index) +
                            " out of range");
  }
  if (topology.kind == Topology::Kind::Global) return state.gbest_position;
  return state.particles[guide_index(state, particle_index, topology)].pbest_position;
}

/// gbest <- argmin of pbest_fitness over the swarm, lowest index on ties.
inline void refresh_gbest(SwarmState& state) {
  if (state.particles.empty()) return;
  const std::size_t best = guide_index(state, 0, Topology::global());
  state.gbest_fitness = state.particles[best].pbest_fitness;
  state.gbest_position = state.particles[best].pbest_position;
}

namespace detail {

inline void evaluate_all(SwarmState& state, const ObjectiveSpec& objective,
                         std::vector<double>& fitness, std::size_t workers) {
  fitness.assign(state.particles.size(), 0.0);
  parallel_for(state.particles.size(), workers, [&](std::size_t i) {
    fitness[i] = objective(state.particles[i].position);
  });
  state.evaluations += state.particles.size();
  for (double f : fitness) {
    if (!std::isfinite(f)) ++state.non_finite_evaluations;
  }
}

inline void check_streams(const PsoConfig& config, std::span<const RngStream> streams) {
  if (streams.size() != config.swarm_size) {
    throw ContractViolation("expected one stream per particle (" +
                            std::to_string(config.swarm_size) + "), got " +
                            std::to_string(streams.size()));
  }
}

}  // namespace detail

/// Positions uniform in the box, velocities uniform in [-vmax, vmax], pbest =
/// initial position. Particle i draws its d position components then its d
/// velocity components from streams[i].
inline SwarmState initialize_swarm(const ObjectiveSpec& objective, const PsoConfig& config,
                                   std::span<RngStream> streams, std::size_t workers = 1) {
  objective.validate();
  config.validate();
  detail::check_streams(config, streams);

  const std::size_t d = objective.dimension;
  const std::vector<double> vmax = resolve_vmax(objective, config);
  SwarmState state;
  state.particles.resize(config.swarm_size);
  for (std::size_t p = 0; p < config.swarm_size; ++p) {
    Particle& particle = state.particles[p];
    RngStream& stream = streams[p];
    particle.position.resize(d);
    particle.velocity.resize(d);
    for (std::size_t i = 0; i < d; ++i) {
      const double lo = objective.lower_bound[i];
      const double hi = objective.upper_bound[i];
      particle.position[i] = std::min(hi, lo + stream.next_uniform() * (hi - lo));
    }
    for (std::size_t i = 0; i < d; ++i) {
      particle.velocity[i] = std::min(vmax[i], -vmax[i] + stream.next_uniform() * 2.0 * vmax[i]);
    }
    particle.pbest_position = particle.position;
  }

  std::vector<double> fitness;
  detail::evaluate_all(state, objective, fitness, workers);
  for (std::size_t p = 0; p < config.swarm_size; ++p) {
    if (std::isfinite(fitness[p])) state.particles[p].pbest_fitness = fitness[p];
  }
  refresh_gbest(state);
  return state;
}

/// One pass of the outer loop: evaluate and update pbests, refresh gbest,
/// then move every particle against the guide snapshot taken after the
/// refresh. Exactly swarm_size objective evaluations.
inline void step(SwarmState& state, const ObjectiveSpec& objective, const PsoConfig& config,
                 std::span<RngStream> streams, std::size_t workers = 1) {
  detail::check_streams(config, streams);
  if (state.particles.size() != config.swarm_size) {
    throw ContractViolation("step: swarm size does not match config");
  }

  std::vector<double> fitness;
  detail::evaluate_all(state, objective, fitness, workers);
  for (std::size_t p = 0; p < state.particles.size(); ++p) {
    update_pbest(state.particles[p], fitness[p]);
  }

  refresh_gbest(state);

  // pbests are frozen during the move phase, so guide spans stay valid.
  const std::vector<double> vmax = resolve_vmax(objective, config);
  std::vector<std::size_t> guides(state.particles.size());
  for (std::size_t p = 0; p < guides.size(); ++p) {
    guides[p] = guide_index(state, p, config.topology);
  }
  parallel_for(state.particles.size(), workers, [&](std::size_t p) {
    Particle& particle = state.particles[p];
    const std::span<const double> guide =
        config.topology.kind == Topology::Kind::Global
            ? std::span<const double>(state.gbest_position)
            : std::span<const double>(state.particles[guides[p]].pbest_position);
    particle.velocity = update_velocity(particle, guide, config, vmax, streams[p]);
    particle.position = update_position(particle.position, particle.velocity);
  });
  ++state.iteration;
}

struct Result {
  std::vector<double> best_position;
  double best_fitness = std::numeric_limits<double>::infinity();
  RunTrace trace;
};

struct RunOptions {
  std::size_t workers = 1;
  std::function<void(const TraceEntry&)> on_iteration;  // called after each recorded entry
};

inline Result optimize(const ObjectiveSpec& objective, const PsoConfig& config,
                       std::uint64_t seed, const RunOptions& options = {}) {
  objective.validate();
  config.validate();

  std::vector<RngStream> streams = make_particle_streams(seed, config.swarm_size);
  SwarmState state = initialize_swarm(objective, config, streams, options.workers);

  Result result;
  result.trace.seed = seed;
  do {
    step(state, objective, config, streams, options.workers);
    record_iteration(result.trace, state.iteration - 1, state.gbest_fitness, state.evaluations);
    if (options.on_iteration) options.on_iteration(result.trace.entries.back());
  } while (!should_terminate(result.trace, config.termination));

  result.trace.non_finite_evaluations = state.non_finite_evaluations;
  result.best_position = state.gbest_position;
  result.best_fitness = state.gbest_fitness;
  return result;
}

}  // namespace swarmkit::pso
