// Minimal library usage: one PSO run and one ACO run, checked against the
// exhaustive TSP oracle.

#include <cstdio>

#include "swarmkit/swarmkit.hpp"

int main() {
  using namespace swarmkit;

  const auto rosenbrock = problems::make_benchmark("rosenbrock", 2);
  pso::PsoConfig pso_config;
  pso_config.swarm_size = 20;
  pso_config.vmax = 0.5;
  pso_config.topology = pso::Topology::ring(1);
  pso_config.termination.max_iterations = 500;
  const pso::Result swarm = pso::optimize(rosenbrock.spec, pso_config, /*seed=*/7);
  std::printf("pso: f(%.4f, %.4f) = %.3g after %zu iterations\n", swarm.best_position[0],
              swarm.best_position[1], swarm.best_fitness, swarm.trace.iterations());

  RngStream instance_stream = derive_stream(/*seed=*/3, 0);
  const auto cities = problems::random_tsp_instance(9, instance_stream);
  aco::AcoConfig aco_config;
  aco_config.termination.max_iterations = 60;
  const aco::Result colony = aco::optimize_aco(cities.graph, aco_config, /*seed=*/7);
  const aco::Tour exact = problems::brute_force_tsp(cities);
  std::printf("aco: tour length %.6f, optimum %.6f\n", colony.best.length, exact.length);
  return 0;
}
