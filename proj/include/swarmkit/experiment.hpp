#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "swarmkit/aco.hpp"
#include "swarmkit/error.hpp"
#include "swarmkit/parallel.hpp"
#include "swarmkit/problems.hpp"
#include "swarmkit/pso.hpp"
#include "swarmkit/rng.hpp"
#include "swarmkit/trace.hpp"

namespace swarmkit::experiment {

enum class Algorithm { Pso, Aco };

inline std::string_view to_string(Algorithm a) { return a == Algorithm::Pso ? "pso" : "aco"; }

/// A validated run description. `problem` is a benchmark name for PSO; for
/// ACO it is "unit-square", "random:<n>:<seed>" or an instance file path.
struct ExperimentConfig {
  Algorithm algorithm = Algorithm::Pso;
  std::string problem;
  std::size_t dim = 2;
  pso::PsoConfig pso;
  aco::AcoConfig aco;
  std::vector<std::uint64_t> seeds;
  std::filesystem::path output = "swarmkit-out";
  std::filesystem::path base_dir;  // relative instance paths resolve here

  [[nodiscard]] const TerminationCriteria& termination() const {
    return algorithm == Algorithm::Pso ? pso.termination : aco.termination;
  }
};

namespace detail {

using problems::detail::format_double;
using problems::detail::parse_number;
using problems::detail::trim;

enum class Scope { Common, Pso, Aco };

inline const std::map<std::string, Scope, std::less<>>& known_keys() {
  static const std::map<std::string, Scope, std::less<>> keys = {
      {"algorithm", Scope::Common}, {"problem", Scope::Common},
      {"seeds", Scope::Common},     {"max_iterations", Scope::Common},
      {"target_fitness", Scope::Common}, {"output", Scope::Common},
      {"dim", Scope::Pso},          {"swarm_size", Scope::Pso},
      {"c1", Scope::Pso},           {"c2", Scope::Pso},
      {"vmax", Scope::Pso},         {"topology", Scope::Pso},
      {"num_ants", Scope::Aco},     {"alpha", Scope::Aco},
      {"beta", Scope::Aco},         {"rho", Scope::Aco},
      {"q", Scope::Aco},            {"tau0", Scope::Aco},
      {"tau_floor", Scope::Aco},
  };
  return keys;
}

inline std::vector<std::uint64_t> parse_seeds(std::size_t line, std::string_view value) {
  std::vector<std::uint64_t> seeds;
  auto bad = [&] { return ParseError(line, "invalid value for seeds: '" + std::string(value) + "'"); };
  if (const auto dots = value.find(".."); dots != std::string_view::npos) {
    const auto first = parse_number<std::uint64_t>(trim(value.substr(0, dots)));
    const auto last = parse_number<std::uint64_t>(trim(value.substr(dots + 2)));
    if (!first || !last) throw bad();
    if (*first > *last) throw ParseError(line, "seeds range is empty");
    if (*last - *first >= 1'000'000) throw ParseError(line, "seeds range too large");
    for (std::uint64_t s = *first;; ++s) {
      seeds.push_back(s);
      if (s == *last) break;
    }
    return seeds;
  }
  std::size_t pos = 0;
  while (pos <= value.size()) {
    const std::size_t comma = std::min(value.find(',', pos), value.size());
    const auto seed = parse_number<std::uint64_t>(trim(value.substr(pos, comma - pos)));
    if (!seed) throw bad();
    seeds.push_back(*seed);
    pos = comma + 1;
  }
  std::set<std::uint64_t> unique(seeds.begin(), seeds.end());
  if (unique.size() != seeds.size()) throw ParseError(line, "seeds contain duplicates");
  return seeds;
}

inline pso::Topology parse_topology(std::size_t line, std::string_view value) {
  if (value == "global") return pso::Topology::global();
  if (value == "ring") return pso::Topology::ring(1);
  if (value.starts_with("ring:")) {
    if (const auto k = parse_number<std::size_t>(value.substr(5))) return pso::Topology::ring(*k);
  }
  throw ParseError(line, "invalid value for topology: '" + std::string(value) +
                             "' (expected global, ring or ring:<k>)");
}

inline std::string topology_name(const pso::Topology& t) {
  return t.kind == pso::Topology::Kind::Global ? "global" : "ring:" + std::to_string(t.radius);
}

}  // namespace detail

/**
 * Parses the flat `key=value` run format (one pair per line, '#' starts a
 * comment line). Unset tunables keep their defaults: c1 = c2 = 2 for PSO;
 * alpha = 1, beta = 2, rho = 0.5, q = 1, tau0 = 1 for ACO. `algorithm`,
 * `problem` and `seeds` are required. Errors name the offending key.
 */
inline ExperimentConfig parse_config(std::string_view text) {
  using detail::parse_number;
  ExperimentConfig config;
  std::map<std::string, std::size_t, std::less<>> seen;  // key -> line

  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t eol = std::min(text.find('\n', pos), text.size());
    const std::string_view line = detail::trim(text.substr(pos, eol - pos));
    pos = eol + 1;
    ++line_no;
    if (line.empty() || line.front() == '#') continue;

    const auto eq = line.find('=');
    if (eq == std::string_view::npos) throw ParseError(line_no, "expected key=value");
    const std::string key(detail::trim(line.substr(0, eq)));
    const std::string_view value = detail::trim(line.substr(eq + 1));
    if (!detail::known_keys().contains(key)) throw ParseError(line_no, "unknown key " + key);
    if (!seen.emplace(key, line_no).second) throw ParseError(line_no, "duplicate key " + key);

    auto mismatch = [&](std::string_view expected) {
      return ParseError(line_no, "invalid value for " + key + ": '" + std::string(value) +
                                     "' (expected " + std::string(expected) + ")");
    };
    auto real = [&] {
      const auto v = parse_number<double>(value);
      if (!v || !std::isfinite(*v)) throw mismatch("a finite real");
      return *v;
    };
    auto count = [&] {
      const auto v = parse_number<std::size_t>(value);
      if (!v) throw mismatch("a non-negative integer");
      return *v;
    };
    auto require = [&](bool ok, std::string_view what) {
      if (!ok) throw ParseError(line_no, std::string(what));
    };

    if (key == "algorithm") {
      if (value == "pso") config.algorithm = Algorithm::Pso;
      else if (value == "aco") config.algorithm = Algorithm::Aco;
      else throw mismatch("pso or aco");
    } else if (key == "problem") {
      require(!value.empty(), "problem must not be empty");
      config.problem = std::string(value);
    } else if (key == "seeds") {
      config.seeds = detail::parse_seeds(line_no, value);
    } else if (key == "output") {
      require(!value.empty(), "output must not be empty");
      config.output = std::string(value);
    } else if (key == "max_iterations") {
      const auto v = count();
      require(v >= 1, "max_iterations must be >= 1");
      config.pso.termination.max_iterations = config.aco.termination.max_iterations =
          static_cast<std::int64_t>(v);
    } else if (key == "target_fitness") {
      config.pso.termination.target_fitness = config.aco.termination.target_fitness = real();
    } else if (key == "dim") {
      config.dim = count();
      require(config.dim >= 1, "dim must be >= 1");
    } else if (key == "swarm_size") {
      config.pso.swarm_size = count();
      require(config.pso.swarm_size >= 1, "swarm_size must be >= 1");
    } else if (key == "c1") {
      config.pso.c1 = real();
      require(config.pso.c1 >= 0.0, "c1 must be >= 0");
    } else if (key == "c2") {
      config.pso.c2 = real();
      require(config.pso.c2 >= 0.0, "c2 must be >= 0");
    } else if (key == "vmax") {
      config.pso.vmax = real();
      require(*config.pso.vmax > 0.0, "vmax must be > 0");
    } else if (key == "topology") {
      config.pso.topology = detail::parse_topology(line_no, value);
    } else if (key == "num_ants") {
      config.aco.num_ants = count();
      require(*config.aco.num_ants >= 1, "num_ants must be >= 1");
    } else if (key == "alpha") {
      config.aco.alpha = real();
      require(config.aco.alpha >= 0.0, "alpha must be >= 0");
    } else if (key == "beta") {
      config.aco.beta = real();
      require(config.aco.beta >= 0.0, "beta must be >= 0");
    } else if (key == "rho") {
      config.aco.rho = real();
      require(config.aco.rho >= 0.0 && config.aco.rho <= 1.0, "rho out of [0,1]");
    } else if (key == "q") {
      config.aco.q = real();
      require(config.aco.q > 0.0, "q must be > 0");
    } else if (key == "tau0") {
      config.aco.tau0 = real();
      require(config.aco.tau0 > 0.0, "tau0 must be > 0");
    } else if (key == "tau_floor") {
      config.aco.tau_floor = real();
      require(config.aco.tau_floor > 0.0, "tau_floor must be > 0");
    }
  }

  for (const auto& [key, line] : seen) {
    const detail::Scope scope = detail::known_keys().find(key)->second;
    if ((scope == detail::Scope::Pso && config.algorithm != Algorithm::Pso) ||
        (scope == detail::Scope::Aco && config.algorithm != Algorithm::Aco)) {
      throw ParseError(line, "key " + key + " does not apply to algorithm " +
                                 std::string(to_string(config.algorithm)));
    }
  }
  for (const char* key : {"algorithm", "problem", "seeds"}) {
    if (!seen.contains(key)) throw ParseError(0, "missing required key " + std::string(key));
  }

  try {
    if (config.algorithm == Algorithm::Pso) {
      config.pso.validate();
      problems::make_benchmark(config.problem, config.dim);
    } else {
      config.aco.validate();
    }
  } catch (const ConfigError& e) {
    throw ParseError(0, e.what());
  }
  return config;
}

// ---------------------------------------------------------------------------
// Traces

inline std::string trace_csv_row(const TraceEntry& e) {
  return std::to_string(e.iteration) + ',' + detail::format_double(e.best_fitness) + ',' +
         std::to_string(e.evaluations) + '\n';
}

/// "iteration,best_fitness,evaluations" header then one LF-terminated row
/// per entry; reals in shortest round-trip form.
inline std::string emit_trace_csv(const RunTrace& trace) {
  std::string out = "iteration,best_fitness,evaluations\n";
  for (const TraceEntry& e : trace.entries) out += trace_csv_row(e);
  return out;
}

inline RunTrace parse_trace_csv(std::string_view text) {
  RunTrace trace;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    const std::size_t eol = std::min(text.find('\n', pos), text.size());
    const std::string_view line = text.substr(pos, eol - pos);
    pos = eol + 1;
    ++line_no;
    if (line_no == 1) {
      if (line != "iteration,best_fitness,evaluations") throw ParseError(1, "bad trace header");
      continue;
    }
    const auto c1 = line.find(',');
    const auto c2 = line.find(',', c1 == std::string_view::npos ? c1 : c1 + 1);
    if (c1 == std::string_view::npos || c2 == std::string_view::npos) {
      throw ParseError(line_no, "expected 3 columns");
    }
    const auto it = detail::parse_number<std::int64_t>(line.substr(0, c1));
    const auto best = detail::parse_number<double>(line.substr(c1 + 1, c2 - c1 - 1));
    const auto evals = detail::parse_number<std::uint64_t>(line.substr(c2 + 1));
    if (!it || !best || !evals) throw ParseError(line_no, "malformed trace row");
    trace.entries.push_back({*it, *best, *evals});
    trace.evaluations = *evals;
  }
  return trace;
}

// ---------------------------------------------------------------------------
// Summary

struct SeedResult {
  std::uint64_t seed = 0;
  double best = 0.0;  // final gbest fitness or best tour length
  std::int64_t iterations = 0;
  std::uint64_t evaluations = 0;
  std::uint64_t non_finite_evaluations = 0;
  std::vector<double> best_position;   // pso
  std::vector<std::size_t> best_tour;  // aco
  double wall_seconds = 0.0;           // volatile; excluded from determinism checks

  friend bool operator==(const SeedResult&, const SeedResult&) = default;
};

struct Aggregate {
  double min = 0.0;
  double median = 0.0;
  double mean = 0.0;

  friend bool operator==(const Aggregate&, const Aggregate&) = default;
};

inline Aggregate aggregate(std::vector<double> values) {
  if (values.empty()) return {};
  Aggregate a;
  double sum = 0.0;
  for (double v : values) sum += v;
  a.mean = sum / static_cast<double>(values.size());
  std::sort(values.begin(), values.end());
  a.min = values.front();
  const std::size_t mid = values.size() / 2;
  a.median = values.size() % 2 == 1 ? values[mid] : 0.5 * (values[mid - 1] + values[mid]);
  return a;
}

struct RunSummary {
  std::string algorithm;
  std::string problem;
  std::string rng = std::string(kRngAlgorithm);
  nlohmann::json config;  // resolved parameter echo
  std::vector<SeedResult> runs;
  Aggregate best;
  std::uint64_t total_evaluations = 0;

  friend bool operator==(const RunSummary&, const RunSummary&) = default;
};

inline nlohmann::json config_echo(const ExperimentConfig& c) {
  nlohmann::json j;
  j["algorithm"] = to_string(c.algorithm);
  j["problem"] = c.problem;
  j["seeds"] = c.seeds;
  j["max_iterations"] = c.termination().max_iterations;
  j["target_fitness"] = c.termination().target_fitness
                            ? nlohmann::json(*c.termination().target_fitness)
                            : nlohmann::json(nullptr);
  if (c.algorithm == Algorithm::Pso) {
    j["dim"] = c.dim;
    j["swarm_size"] = c.pso.swarm_size;
    j["c1"] = c.pso.c1;
    j["c2"] = c.pso.c2;
    j["vmax"] = c.pso.vmax ? nlohmann::json(*c.pso.vmax) : nlohmann::json("half-range");
    j["topology"] = detail::topology_name(c.pso.topology);
  } else {
    j["num_ants"] = c.aco.num_ants ? nlohmann::json(*c.aco.num_ants) : nlohmann::json("n");
    j["alpha"] = c.aco.alpha;
    j["beta"] = c.aco.beta;
    j["rho"] = c.aco.rho;
    j["q"] = c.aco.q;
    j["tau0"] = c.aco.tau0;
    j["tau_floor"] = c.aco.tau_floor;
  }
  return j;
}

namespace detail {

/// Non-finite reals are written as strings so the document stays valid JSON.
inline nlohmann::json real(double v) {
  if (std::isfinite(v)) return v;
  return std::isnan(v) ? "nan" : (v > 0 ? "inf" : "-inf");
}

inline double real_from(const nlohmann::json& j) {
  if (j.is_string()) {
    const auto s = j.get<std::string>();
    if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
    return s == "-inf" ? -std::numeric_limits<double>::infinity()
                       : std::numeric_limits<double>::infinity();
  }
  return j.get<double>();
}

}  // namespace detail

/// Pretty-printed JSON with keys in sorted order.
inline std::string emit_summary(const RunSummary& s) {
  nlohmann::json j;
  j["algorithm"] = s.algorithm;
  j["problem"] = s.problem;
  j["rng"] = s.rng;
  j["config"] = s.config;
  j["total_evaluations"] = s.total_evaluations;
  j["aggregate"] = {{"min", detail::real(s.best.min)},
                    {"median", detail::real(s.best.median)},
                    {"mean", detail::real(s.best.mean)}};
  j["runs"] = nlohmann::json::array();
  for (const SeedResult& r : s.runs) {
    nlohmann::json run;
    run["seed"] = r.seed;
    run["best"] = detail::real(r.best);
    run["iterations"] = r.iterations;
    run["evaluations"] = r.evaluations;
    run["non_finite_evaluations"] = r.non_finite_evaluations;
    run["wall_seconds"] = r.wall_seconds;
    if (!r.best_position.empty()) run["best_position"] = r.best_position;
    if (!r.best_tour.empty()) run["best_tour"] = r.best_tour;
    j["runs"].push_back(std::move(run));
  }
  return j.dump(2) + "\n";
}

inline RunSummary parse_summary(std::string_view text) {
  const auto j = nlohmann::json::parse(text);
  RunSummary s;
  s.algorithm = j.at("algorithm").get<std::string>();
  s.problem = j.at("problem").get<std::string>();
  s.rng = j.at("rng").get<std::string>();
  s.config = j.at("config");
  s.total_evaluations = j.at("total_evaluations").get<std::uint64_t>();
  s.best.min = detail::real_from(j.at("aggregate").at("min"));
  s.best.median = detail::real_from(j.at("aggregate").at("median"));
  s.best.mean = detail::real_from(j.at("aggregate").at("mean"));
  for (const auto& run : j.at("runs")) {
    SeedResult r;
    r.seed = run.at("seed").get<std::uint64_t>();
    r.best = detail::real_from(run.at("best"));
    r.iterations = run.at("iterations").get<std::int64_t>();
    r.evaluations = run.at("evaluations").get<std::uint64_t>();
    r.non_finite_evaluations = run.at("non_finite_evaluations").get<std::uint64_t>();
    r.wall_seconds = run.at("wall_seconds").get<double>();
    if (run.contains("best_position")) r.best_position = run["best_position"].get<std::vector<double>>();
    if (run.contains("best_tour")) r.best_tour = run["best_tour"].get<std::vector<std::size_t>>();
    s.runs.push_back(std::move(r));
  }
  return s;
}

// ---------------------------------------------------------------------------
// Running

inline std::string trace_file_name(std::uint64_t seed) {
  return "trace_seed" + std::to_string(seed) + ".csv";
}

inline constexpr std::string_view kSummaryFileName = "summary.json";

/// Resolves an ACO problem: "unit-square", "random:<n>:<seed>" or a file path.
inline problems::TspInstance load_problem_instance(const ExperimentConfig& config) {
  const std::string& p = config.problem;
  if (p == "unit-square") return problems::unit_square();
  if (p.starts_with("random:")) {
    const auto colon = p.find(':', 7);
    const auto n = detail::parse_number<std::size_t>(
        std::string_view(p).substr(7, colon == std::string::npos ? colon : colon - 7));
    const auto seed = colon == std::string::npos
                          ? std::optional<std::uint64_t>(0)
                          : detail::parse_number<std::uint64_t>(std::string_view(p).substr(colon + 1));
    if (!n || !seed) throw ConfigError("problem: expected random:<n>:<seed>, got '" + p + "'");
    RngStream stream = derive_stream(*seed, 0);
    return problems::random_tsp_instance(*n, stream);
  }
  std::filesystem::path path = p;
  if (path.is_relative() && !config.base_dir.empty()) path = config.base_dir / path;
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open instance file " + path.string());
  const std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  try {
    return problems::load_tsp_instance(text, path.filename().string());
  } catch (const ParseError& e) {
    throw ParseError(e.line(), path.string() + ": " + e.what());
  }
}

struct RunOptions {
  std::optional<std::filesystem::path> output;  // overrides config.output
  std::size_t workers = 1;
};

namespace detail {

/// Streams one trace to `<name>.tmp` and renames it into place on commit.
class TraceWriter {
 public:
  TraceWriter(std::filesystem::path final_path)
      : final_(std::move(final_path)), temp_(final_.string() + ".tmp") {
    out_.open(temp_, std::ios::binary | std::ios::trunc);
    if (!out_) throw std::runtime_error("cannot write " + temp_.string());
    out_ << "iteration,best_fitness,evaluations\n";
  }

  TraceWriter(const TraceWriter&) = delete;
  TraceWriter& operator=(const TraceWriter&) = delete;

  ~TraceWriter() {
    if (!committed_) {
      out_.close();
      std::error_code ec;
      std::filesystem::remove(temp_, ec);
    }
  }

  void write(const TraceEntry& e) {
    out_ << trace_csv_row(e);
    out_.flush();
    if (!out_) throw std::runtime_error("write failed: " + temp_.string());
  }

  void commit() {
    out_.close();
    if (!out_) throw std::runtime_error("write failed: " + temp_.string());
    std::filesystem::rename(temp_, final_);
    committed_ = true;
  }

 private:
  std::filesystem::path final_;
  std::filesystem::path temp_;
  std::ofstream out_;
  bool committed_ = false;
};

inline void write_atomically(const std::filesystem::path& path, std::string_view content) {
  const std::filesystem::path temp = path.string() + ".tmp";
  {
    std::ofstream out(temp, std::ios::binary | std::ios::trunc);
    out << content;
    if (!out) {
      std::error_code ec;
      std::filesystem::remove(temp, ec);
      throw std::runtime_error("cannot write " + path.string());
    }
  }
  std::filesystem::rename(temp, path);
}

}  // namespace detail

/**
 * One run per seed; writes trace_seed<SEED>.csv per run and summary.json into
 * the output directory. Seeds are distributed over `workers` threads; when
 * there are fewer seeds than workers the spare threads go to each run's
 * evaluation phase. Output is identical for every worker count. On failure
 * every file created by this call is removed.
 */
inline RunSummary run_experiment(const ExperimentConfig& config, const RunOptions& options = {}) {
  if (config.seeds.empty()) throw ConfigError("at least one seed is required");
  const std::filesystem::path out_dir = options.output.value_or(config.output);

  std::optional<problems::BenchmarkFunction> benchmark;
  std::optional<problems::TspInstance> instance;
  if (config.algorithm == Algorithm::Pso) {
    config.pso.validate();
    benchmark = problems::make_benchmark(config.problem, config.dim);
  } else {
    config.aco.validate();
    instance = load_problem_instance(config);
  }

  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec || !std::filesystem::is_directory(out_dir)) {
    throw std::runtime_error("cannot create output directory " + out_dir.string());
  }

  const std::size_t workers = std::max<std::size_t>(options.workers, 1);
  const std::size_t outer = std::min(workers, config.seeds.size());
  const std::size_t inner = std::max<std::size_t>(1, workers / config.seeds.size());

  std::vector<SeedResult> results(config.seeds.size());
  std::mutex created_mutex;
  std::vector<std::filesystem::path> created;

  try {
    parallel_for(config.seeds.size(), outer, [&](std::size_t idx) {
      const std::uint64_t seed = config.seeds[idx];
      const auto path = out_dir / trace_file_name(seed);
      detail::TraceWriter writer(path);
      auto on_iteration = [&](const TraceEntry& e) { writer.write(e); };
      const auto start = std::chrono::steady_clock::now();

      SeedResult& r = results[idx];
      r.seed = seed;
      if (benchmark) {
        const pso::Result res = pso::optimize(benchmark->spec, config.pso, seed, {inner, on_iteration});
        r.best = res.best_fitness;
        r.best_position = res.best_position;
        r.iterations = static_cast<std::int64_t>(res.trace.iterations());
        r.evaluations = res.trace.evaluations;
        r.non_finite_evaluations = res.trace.non_finite_evaluations;
      } else {
        const aco::Result res = aco::optimize_aco(instance->graph, config.aco, seed, {inner, on_iteration});
        r.best = res.best.length;
        r.best_tour = res.best.order;
        r.iterations = static_cast<std::int64_t>(res.trace.iterations());
        r.evaluations = res.trace.evaluations;
      }
      r.wall_seconds =
          std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
      writer.commit();
      std::lock_guard lock(created_mutex);
      created.push_back(path);
    });

    RunSummary summary;
    summary.algorithm = std::string(to_string(config.algorithm));
    summary.problem = config.problem;
    summary.config = config_echo(config);
    summary.runs = results;
    std::vector<double> bests;
    for (const SeedResult& r : results) {
      bests.push_back(r.best);
      summary.total_evaluations += r.evaluations;
    }
    summary.best = aggregate(bests);
    detail::write_atomically(out_dir / kSummaryFileName, emit_summary(summary));
    return summary;
  } catch (...) {
    for (const auto& path : created) std::filesystem::remove(path, ec);
    throw;
  }
}

}  // namespace swarmkit::experiment
