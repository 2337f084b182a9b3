#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numbers>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "swarmkit/aco.hpp"
#include "swarmkit/error.hpp"
#include "swarmkit/objective.hpp"
#include "swarmkit/rng.hpp"

namespace swarmkit::problems {

// ---------------------------------------------------------------------------
// Continuous benchmarks

inline double sphere(std::span<const double> x) {
  double sum = 0.0;
  for (double v : x) sum += v * v;
  return sum;
}

inline double rastrigin(std::span<const double> x) {
  double sum = 10.0 * static_cast<double>(x.size());
  for (double v : x) sum += v * v - 10.0 * std::cos(2.0 * std::numbers::pi * v);
  return sum;
}

inline double rosenbrock(std::span<const double> x) {
  if (x.size() < 2) throw ConfigError("rosenbrock needs dimension >= 2");
  double sum = 0.0;
  for (std::size_t i = 0; i + 1 < x.size(); ++i) {
    const double a = x[i + 1] - x[i] * x[i];
    const double b = 1.0 - x[i];
    sum += 100.0 * a * a + b * b;
  }
  return sum;
}

struct BenchmarkFunction {
  std::string name;
  ObjectiveSpec spec;
  std::vector<double> optimum_position;
  double optimum_fitness = 0.0;
};

inline std::vector<std::string_view> benchmark_names() {
  return {"sphere", "rastrigin", "rosenbrock"};
}

/// Benchmarks by name: sphere and rastrigin on [-5.12, 5.12]^d, rosenbrock
/// on [-2.048, 2.048]^d (d >= 2).
inline BenchmarkFunction make_benchmark(std::string_view name, std::size_t dimension) {
  if (dimension < 1) throw ConfigError("benchmark dimension must be >= 1");
  if (name == "sphere") {
    return {"sphere", ObjectiveSpec::uniform_box(dimension, -5.12, 5.12, sphere),
            std::vector<double>(dimension, 0.0), 0.0};
  }
  if (name == "rastrigin") {
    return {"rastrigin", ObjectiveSpec::uniform_box(dimension, -5.12, 5.12, rastrigin),
            std::vector<double>(dimension, 0.0), 0.0};
  }
  if (name == "rosenbrock") {
    if (dimension < 2) throw ConfigError("rosenbrock needs dimension >= 2");
    return {"rosenbrock", ObjectiveSpec::uniform_box(dimension, -2.048, 2.048, rosenbrock),
            std::vector<double>(dimension, 1.0), 0.0};
  }
  throw ConfigError("unknown benchmark '" + std::string(name) + "'");
}

// ---------------------------------------------------------------------------
// TSP instances

struct Point {
  double x = 0.0;
  double y = 0.0;

  friend bool operator==(const Point&, const Point&) = default;
};

struct TspInstance {
  std::string name;
  std::vector<Point> coordinates;  // empty for explicit-matrix instances
  aco::DistanceGraph graph;

  [[nodiscard]] std::size_t size() const noexcept { return graph.size(); }

  static TspInstance from_coordinates(std::string name, std::vector<Point> points) {
    const std::size_t n = points.size();
    if (n < 3) throw ConfigError("n < 3");
    std::vector<double> d(n * n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = i + 1; j < n; ++j) {
        d[i * n + j] = d[j * n + i] =
            std::hypot(points[i].x - points[j].x, points[i].y - points[j].y);
      }
    }
    return {std::move(name), std::move(points), aco::DistanceGraph(n, std::move(d))};
  }

  static TspInstance from_graph(std::string name, aco::DistanceGraph graph) {
    return {std::move(name), {}, std::move(graph)};
  }
};

inline TspInstance unit_square() {
  return TspInstance::from_coordinates("unit-square", {{0, 0}, {0, 1}, {1, 1}, {1, 0}});
}

namespace detail {

inline std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

inline std::vector<std::string_view> split_ws(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && (s[i] == ' ' || s[i] == '\t')) ++i;
    const std::size_t start = i;
    while (i < s.size() && s[i] != ' ' && s[i] != '\t') ++i;
    if (i > start) out.push_back(s.substr(start, i - start));
  }
  return out;
}

template <typename T>
std::optional<T> parse_number(std::string_view token) {
  T value{};
  const char* begin = token.data();
  const char* end = begin + token.size();
  if (!token.empty() && token.front() == '+') ++begin;
  const auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc{} || ptr != end) return std::nullopt;
  return value;
}

/// Shortest decimal text that parses back to exactly `value`.
inline std::string format_double(double value) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, ptr);
}

}  // namespace detail

/**
 * Parses the plain-text instance format:
 *
 *     # comment
 *     4
 *     0 0.0 0.0
 *     1 0.0 1.0
 *     ...
 *
 * Blank lines and lines starting with '#' are skipped. The first significant
 * line is the city count n (>= 3), followed by n lines "index x y" with
 * 0-based consecutive indices.
 */
inline TspInstance load_tsp_instance(std::string_view text, std::string name = "instance") {
  std::optional<std::size_t> n;
  std::vector<Point> points;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t eol = std::min(text.find('\n', pos), text.size());
    const std::string_view line = detail::trim(text.substr(pos, eol - pos));
    pos = eol + 1;
    ++line_no;
    if (line.empty() || line.front() == '#') continue;

    const auto tokens = detail::split_ws(line);
    if (!n) {
      const auto count = tokens.size() == 1 ? detail::parse_number<std::size_t>(tokens[0])
                                            : std::nullopt;
      if (!count) throw ParseError(line_no, "expected city count");
      if (*count < 3) throw ParseError(line_no, "n < 3");
      n = *count;
      points.reserve(*n);
      continue;
    }
    if (points.size() == *n) throw ParseError(line_no, "more than " + std::to_string(*n) + " cities");
    if (tokens.size() != 3) throw ParseError(line_no, "expected 'index x y'");
    const auto index = detail::parse_number<std::size_t>(tokens[0]);
    const auto x = detail::parse_number<double>(tokens[1]);
    const auto y = detail::parse_number<double>(tokens[2]);
    if (!index) throw ParseError(line_no, "malformed index '" + std::string(tokens[0]) + "'");
    if (!x || !y || !std::isfinite(*x) || !std::isfinite(*y)) {
      throw ParseError(line_no, "malformed coordinate");
    }
    if (*index < points.size()) {
      throw ParseError(line_no, "duplicate point index " + std::to_string(*index));
    }
    if (*index != points.size()) {
      throw ParseError(line_no, "expected point index " + std::to_string(points.size()) +
                                    ", got " + std::to_string(*index));
    }
    const Point p{*x, *y};
    if (std::find(points.begin(), points.end(), p) != points.end()) {
      throw ParseError(line_no, "point " + std::to_string(*index) + " coincides with an earlier point");
    }
    points.push_back(p);
  }
  if (!n) throw ParseError(0, "missing city count");
  if (points.size() != *n) {
    throw ParseError(0, "expected " + std::to_string(*n) + " cities, found " +
                            std::to_string(points.size()));
  }
  return TspInstance::from_coordinates(std::move(name), std::move(points));
}

inline std::string serialize_tsp_instance(const TspInstance& instance) {
  if (instance.coordinates.empty()) {
    throw ConfigError("only coordinate-based instances can be serialized");
  }
  std::string out = "# " + instance.name + "\n" + std::to_string(instance.coordinates.size()) + "\n";
  for (std::size_t i = 0; i < instance.coordinates.size(); ++i) {
    out += std::to_string(i) + ' ' + detail::format_double(instance.coordinates[i].x) + ' ' +
           detail::format_double(instance.coordinates[i].y) + '\n';
  }
  return out;
}

/// n points uniform in [0, 1)^2; x then y per point.
inline TspInstance random_tsp_instance(std::size_t n, RngStream& stream) {
  if (n < 3) throw ConfigError("n < 3");
  std::vector<Point> points(n);
  for (auto& p : points) {
    p.x = stream.next_uniform();
    p.y = stream.next_uniform();
  }
  return TspInstance::from_coordinates("random-" + std::to_string(n), std::move(points));
}

// ---------------------------------------------------------------------------
// Exhaustive TSP oracle

inline constexpr std::size_t kBruteForceMaxNodes = 11;

/// Calls fn(order) once per distinct undirected closed tour: node 0 first and
/// order[1] < order[n-1], in lexicographic order. Returns the number visited.
template <typename Fn>
std::uint64_t for_each_distinct_tour(std::size_t n, Fn&& fn) {
  if (n < 3) throw ConfigError("n < 3");
  if (n > kBruteForceMaxNodes) {
    throw ConfigError("brute force refused: n = " + std::to_string(n) + " exceeds " +
                      std::to_string(kBruteForceMaxNodes));
  }
  std::vector<aco::Node> order(n);
  std::iota(order.begin(), order.end(), aco::Node{0});
  std::uint64_t count = 0;
  do {
    if (order[1] < order[n - 1]) {
      ++count;
      fn(std::span<const aco::Node>(order));
    }
  } while (std::next_permutation(order.begin() + 1, order.end()));
  return count;
}

/// Minimum-length tour over all (n-1)!/2 distinct tours; ties keep the
/// lexicographically smallest order.
inline aco::Tour brute_force_tsp(const aco::DistanceGraph& graph) {
  aco::Tour best;
  best.length = std::numeric_limits<double>::infinity();
  for_each_distinct_tour(graph.size(), [&](std::span<const aco::Node> order) {
    const double length = aco::tour_length(graph, order);
    if (length < best.length) {
      best.length = length;
      best.order.assign(order.begin(), order.end());
    }
  });
  return best;
}

inline aco::Tour brute_force_tsp(const TspInstance& instance) {
  return brute_force_tsp(instance.graph);
}

}  // namespace swarmkit::problems
