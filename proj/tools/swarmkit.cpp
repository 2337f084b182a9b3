// swarmkit command-line harness.
//
//   swarmkit run <config-file> [--output DIR] [--workers N]
//   swarmkit validate <config-file>
//   swarmkit brute-force <instance-file>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "swarmkit/swarmkit.hpp"

namespace {

namespace fs = std::filesystem;
using namespace swarmkit;

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

experiment::ExperimentConfig load_config(const fs::path& path) {
  try {
    auto config = experiment::parse_config(read_file(path));
    config.base_dir = path.parent_path();
    return config;
  } catch (const ParseError& e) {
    throw std::runtime_error(path.string() + ": " + e.what());
  }
}

std::string one_line(std::string s) {
  for (char& c : s) {
    if (c == '\n' || c == '\r') c = ' ';
  }
  return s;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"swarmkit: particle swarm and ant colony optimizers"};
  app.require_subcommand(1);

  std::string config_path;
  std::string output_dir;
  std::size_t workers = 1;
  auto* run = app.add_subcommand("run", "Run every seed of an experiment config");
  run->add_option("config", config_path, "Config file (key=value lines)")->required();
  run->add_option("--output", output_dir, "Output directory (overrides the config)");
  run->add_option("--workers", workers, "Worker threads")->check(CLI::Range(1, 1024));

  std::string validate_path;
  auto* validate = app.add_subcommand("validate", "Parse and validate a config file");
  validate->add_option("config", validate_path, "Config file")->required();

  std::string instance_path;
  auto* brute = app.add_subcommand("brute-force", "Solve a small TSP instance exactly");
  brute->add_option("instance", instance_path, "Instance file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "swarmkit: error: " << one_line(e.what()) << '\n';
    return 2;
  }

  try {
    if (*run) {
      const auto config = load_config(config_path);
      experiment::RunOptions options;
      options.workers = workers;
      if (!output_dir.empty()) options.output = output_dir;
      const auto summary = experiment::run_experiment(config, options);
      const fs::path out = options.output.value_or(config.output);
      std::cout << "runs: " << summary.runs.size() << "  min: " << summary.best.min
                << "  median: " << summary.best.median << "  mean: " << summary.best.mean
                << "\nwrote " << (out / experiment::kSummaryFileName).string() << '\n';
    } else if (*validate) {
      const auto config = load_config(validate_path);
      std::cout << "ok: algorithm=" << experiment::to_string(config.algorithm)
                << " problem=" << config.problem << " seeds=" << config.seeds.size() << '\n';
    } else if (*brute) {
      const auto instance =
          problems::load_tsp_instance(read_file(instance_path), fs::path(instance_path).filename());
      const aco::Tour tour = problems::brute_force_tsp(instance);
      std::cout << "tour:";
      for (auto node : tour.order) std::cout << ' ' << node;
      std::cout << "\nlength: " << problems::detail::format_double(tour.length) << '\n';
    }
  } catch (const std::exception& e) {
    std::cerr << "swarmkit: error: " << one_line(e.what()) << '\n';
    return 1;
  }
  return EXIT_SUCCESS;
}
