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
#include "swarmkit/parallel.hpp"
#include "swarmkit/rng.hpp"
#include "swarmkit/trace.hpp"

namespace swarmkit::aco {

using Node = std::size_t;

/// Symmetric TSP distances, n >= 3, strictly positive off the diagonal.
class DistanceGraph {
 public:
  DistanceGraph() = default;

  /// `matrix` is row-major n*n.
  DistanceGraph(std::size_t n, std::vector<double> matrix) : n_(n), d_(std::move(matrix)) {
    if (n_ < 3) throw ConfigError("distance graph needs n >= 3 nodes");
    if (d_.size() != n_ * n_) throw ConfigError("distance matrix must be n*n");
    for (std::size_t i = 0; i < n_; ++i) {
      if (at(i, i) != 0.0) throw ConfigError("distance[i][i] must be 0");
      for (std::size_t j = i + 1; j < n_; ++j) {
        if (!(at(i, j) > 0.0) || !std::isfinite(at(i, j))) {
          throw ConfigError("distance[" + std::to_string(i) + "][" + std::to_string(j) +
                            "] must be finite and > 0");
        }
        if (at(i, j) != at(j, i)) throw ConfigError("distance matrix must be symmetric");
      }
    }
  }

  [[nodiscard]] std::size_t size() const noexcept { return n_; }
  [[nodiscard]] double operator()(Node i, Node j) const noexcept { return at(i, j); }

  friend bool operator==(const DistanceGraph&, const DistanceGraph&) = default;

 private:
  [[nodiscard]] double at(std::size_t i, std::size_t j) const noexcept { return d_[i * n_ + j]; }

  std::size_t n_ = 0;
  std::vector<double> d_;
};

class PheromoneMatrix {
 public:
  PheromoneMatrix() = default;
  PheromoneMatrix(std::size_t n, double value) : n_(n), tau_(n * n, value) {
    for (std::size_t i = 0; i < n; ++i) tau_[i * n + i] = 0.0;
  }

  [[nodiscard]] std::size_t size() const noexcept { return n_; }
  [[nodiscard]] double operator()(Node i, Node j) const noexcept { return tau_[i * n_ + j]; }

  /// Writes both (i, j) and (j, i).
  void set(Node i, Node j, double value) noexcept {
    tau_[i * n_ + j] = value;
    tau_[j * n_ + i] = value;
  }

  template <typename Fn>
  void for_each_edge(Fn&& fn) {
    for (std::size_t i = 0; i < n_; ++i) {
      for (std::size_t j = i + 1; j < n_; ++j) set(i, j, fn((*this)(i, j)));
    }
  }

  friend bool operator==(const PheromoneMatrix&, const PheromoneMatrix&) = default;

 private:
  std::size_t n_ = 0;
  std::vector<double> tau_;
};

struct AcoConfig {
  std::optional<std::size_t> num_ants;  // unset: one ant per node
  double alpha = 1.0;  // pheromone exponent
  double beta = 2.0;   // heuristic (1/distance) exponent
  double rho = 0.5;    // evaporation rate
  double q = 1.0;      // deposit constant
  double tau0 = 1.0;
  double tau_floor = 1e-12;
  TerminationCriteria termination;

  void validate() const {
    if (num_ants && *num_ants < 1) throw ConfigError("num_ants must be >= 1");
    if (!(alpha >= 0.0) || !std::isfinite(alpha)) throw ConfigError("alpha must be >= 0");
    if (!(beta >= 0.0) || !std::isfinite(beta)) throw ConfigError("beta must be >= 0");
    if (!(rho >= 0.0 && rho <= 1.0)) throw ConfigError("rho out of [0,1]");
    if (!(q > 0.0) || !std::isfinite(q)) throw ConfigError("q must be > 0");
    if (!(tau_floor > 0.0) || !std::isfinite(tau_floor)) throw ConfigError("tau_floor must be > 0");
    if (!(tau0 >= tau_floor) || !std::isfinite(tau0)) throw ConfigError("tau0 must be >= tau_floor");
    termination.validate();
  }

  [[nodiscard]] std::size_t ants_for(const DistanceGraph& graph) const {
    return num_ants.value_or(graph.size());
  }
};

/// Closed tour; `length` includes the edge from the last node back to the first.
struct Tour {
  std::vector<Node> order;
  double length = 0.0;

  friend bool operator==(const Tour&, const Tour&) = default;
};

inline void check_permutation(std::size_t n, std::span<const Node> order) {
  if (order.size() != n) {
    throw ContractViolation("tour must visit " + std::to_string(n) + " nodes, got " +
                            std::to_string(order.size()));
  }
  std::vector<bool> seen(n, false);
  for (Node v : order) {
    if (v >= n) throw ContractViolation("tour node " + std::to_string(v) + " out of range");
    if (seen[v]) throw ContractViolation("tour visits node " + std::to_string(v) + " twice");
    seen[v] = true;
  }
}

inline double tour_length(const DistanceGraph& graph, std::span<const Node> order) {
  check_permutation(graph.size(), order);
  double length = 0.0;
  for (std::size_t k = 0; k + 1 < order.size(); ++k) length += graph(order[k], order[k + 1]);
  return length + graph(order.back(), order.front());
}

/// Same cycle, rotated to start at node 0 and oriented so that
/// order[1] < order[n-1]. Two tours are the same undirected cycle iff their
/// canonical orders are equal.
inline std::vector<Node> canonical_order(std::span<const Node> order) {
  std::vector<Node> out(order.begin(), order.end());
  if (out.empty()) return out;
  std::rotate(out.begin(), std::find(out.begin(), out.end(), Node{0}), out.end());
  if (out.size() > 2 && out[1] > out.back()) std::reverse(out.begin() + 1, out.end());
  return out;
}

inline PheromoneMatrix initialize_pheromones(const DistanceGraph& graph, const AcoConfig& config) {
  if (!(config.tau0 >= config.tau_floor)) throw ConfigError("tau0 must be >= tau_floor");
  config.validate();
  return PheromoneMatrix(graph.size(), config.tau0);
}

struct TransitionProbabilities {
  std::vector<Node> candidates;        // unvisited nodes, ascending
  std::vector<double> probabilities;  // same order, sums to 1
};

/// Random-proportional rule: p(j) proportional to tau(i,j)^alpha * (1/d(i,j))^beta
/// over unvisited j. Weights are normalised in log space so that neither a
/// floored pheromone nor a large exponent can underflow every candidate.
inline TransitionProbabilities transition_probabilities(const DistanceGraph& graph,
                                                        const PheromoneMatrix& pheromones,
                                                        Node current,
                                                        const std::vector<bool>& visited,
                                                        const AcoConfig& config) {
  const std::size_t n = graph.size();
  if (current >= n || visited.size() != n) {
    throw ContractViolation("transition_probabilities: bad node or visited set");
  }
  TransitionProbabilities out;
  std::vector<double> log_weight;
  for (Node j = 0; j < n; ++j) {
    if (j == current || visited[j]) continue;
    out.candidates.push_back(j);
    log_weight.push_back(config.alpha * std::log(pheromones(current, j)) -
                         config.beta * std::log(graph(current, j)));
  }
  if (out.candidates.empty()) {
    throw ContractViolation("transition_probabilities: every node already visited");
  }

  const double top = *std::max_element(log_weight.begin(), log_weight.end());
  double total = 0.0;
  out.probabilities.resize(log_weight.size());
  for (std::size_t k = 0; k < log_weight.size(); ++k) {
    out.probabilities[k] = std::exp(log_weight[k] - top);
    total += out.probabilities[k];
  }
  for (double& p : out.probabilities) p /= total;
  return out;
}

/// Builds a closed tour from `start`, spending one uniform draw per move
/// (inverse CDF over candidates in ascending node order).
template <UniformSource Source>
Tour construct_tour(const DistanceGraph& graph, const PheromoneMatrix& pheromones,
                    const AcoConfig& config, Source& source, Node start) {
  const std::size_t n = graph.size();
  if (start >= n) throw ContractViolation("construct_tour: start node out of range");
  if (pheromones.size() != n) throw ContractViolation("construct_tour: pheromone size mismatch");

  std::vector<bool> visited(n, false);
  Tour tour;
  tour.order.reserve(n);
  tour.order.push_back(start);
  visited[start] = true;
  Node current = start;
  while (tour.order.size() < n) {
    const TransitionProbabilities step =
        transition_probabilities(graph, pheromones, current, visited, config);
    const double u = source.next_uniform();
    // Rounding can leave the cumulative sum a hair below 1; fall back to the last candidate.
    std::size_t pick = step.candidates.size() - 1;
    double cumulative = 0.0;
    for (std::size_t k = 0; k < step.candidates.size(); ++k) {
      cumulative += step.probabilities[k];
      if (u < cumulative) {
        pick = k;
        break;
      }
    }
    current = step.candidates[pick];
    visited[current] = true;
    tour.order.push_back(current);
  }
  tour.length = tour_length(graph, tour.order);
  return tour;
}

/// tau <- max(tau_floor, (1 - rho) * tau) on every edge.
inline void evaporate(PheromoneMatrix& pheromones, const AcoConfig& config) {
  const double keep = 1.0 - config.rho;
  pheromones.for_each_edge(
      [&](double tau) { return std::max(config.tau_floor, keep * tau); });
}

/// Every tour adds q / length to each of its n closed-tour edges.
inline void deposit(PheromoneMatrix& pheromones, std::span<const Tour> tours,
                    const AcoConfig& config) {
  for (const Tour& tour : tours) {
    if (!(tour.length > 0.0)) throw ContractViolation("deposit: tour length must be > 0");
    check_permutation(pheromones.size(), tour.order);
    const double amount = config.q / tour.length;
    const std::size_t n = tour.order.size();
    for (std::size_t k = 0; k < n; ++k) {
      const Node a = tour.order[k];
      const Node b = tour.order[(k + 1) % n];
      pheromones.set(a, b, pheromones(a, b) + amount);
    }
  }
}

struct Result {
  Tour best;
  RunTrace trace;
  PheromoneMatrix pheromones;  // state after the final iteration
};

struct RunOptions {
  std::size_t workers = 1;
  std::function<void(const TraceEntry&)> on_iteration;
};

/// Ant k owns stream (seed, k) and always starts at node k mod n. Per
/// iteration: all ants build tours on the same pheromone snapshot, then
/// evaporation, then deposit.
inline Result optimize_aco(const DistanceGraph& graph, const AcoConfig& config,
                           std::uint64_t seed, const RunOptions& options = {}) {
  config.validate();
  if (graph.size() < 3) throw ConfigError("distance graph needs n >= 3 nodes");

  const std::size_t ants = config.ants_for(graph);
  std::vector<RngStream> streams;
  streams.reserve(ants);
  for (std::size_t k = 0; k < ants; ++k) streams.push_back(derive_stream(seed, k));

  Result result;
  result.pheromones = initialize_pheromones(graph, config);
  result.best.length = std::numeric_limits<double>::infinity();
  result.trace.seed = seed;

  std::vector<Tour> tours(ants);
  std::int64_t iteration = 0;
  do {
    parallel_for(ants, options.workers, [&](std::size_t k) {
      tours[k] = construct_tour(graph, result.pheromones, config, streams[k], k % graph.size());
    });
    for (const Tour& tour : tours) {
      if (tour.length < result.best.length) result.best = tour;
    }
    evaporate(result.pheromones, config);
    deposit(result.pheromones, tours, config);

    record_iteration(result.trace, iteration++, result.best.length,
                     result.trace.evaluations + ants);
    if (options.on_iteration) options.on_iteration(result.trace.entries.back());
  } while (!should_terminate(result.trace, config.termination));
  return result;
}

}  // namespace swarmkit::aco
