#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "swarmkit/experiment.hpp"

namespace swarmkit::experiment {
namespace {

namespace fs = std::filesystem;

std::string parse_error(std::string_view text) {
  try {
    parse_config(text);
  } catch (const ParseError& e) {
    return e.what();
  }
  return "no error";
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

class TempDir {
 public:
  explicit TempDir(const std::string& name)
      : path_(fs::temp_directory_path() / ("swarmkit_test_" + name)) {
    fs::remove_all(path_);
  }
  ~TempDir() { fs::remove_all(path_); }
  const fs::path& path() const { return path_; }

 private:
  fs::path path_;
};

// --- config -----------------------------------------------------------------

TEST(ParseConfig, PsoDefaults) {
  const auto c = parse_config(
      "algorithm=pso\nproblem=sphere\ndim=10\nswarm_size=30\nmax_iterations=2000\nseeds=1..20\n");
  EXPECT_EQ(c.algorithm, Algorithm::Pso);
  EXPECT_EQ(c.problem, "sphere");
  EXPECT_EQ(c.dim, 10u);
  EXPECT_EQ(c.pso.swarm_size, 30u);
  EXPECT_EQ(c.pso.c1, 2.0);
  EXPECT_EQ(c.pso.c2, 2.0);
  EXPECT_FALSE(c.pso.vmax.has_value());
  EXPECT_EQ(c.pso.termination.max_iterations, 2000);
  ASSERT_EQ(c.seeds.size(), 20u);
  EXPECT_EQ(c.seeds.front(), 1u);
  EXPECT_EQ(c.seeds.back(), 20u);
}

TEST(ParseConfig, AcoDefaults) {
  const auto c = parse_config("# colony\nalgorithm = aco\nproblem = unit-square\nseeds = 3, 1, 2\n");
  EXPECT_EQ(c.algorithm, Algorithm::Aco);
  EXPECT_EQ(c.aco.alpha, 1.0);
  EXPECT_EQ(c.aco.beta, 2.0);
  EXPECT_EQ(c.aco.rho, 0.5);
  EXPECT_EQ(c.aco.q, 1.0);
  EXPECT_EQ(c.aco.tau0, 1.0);
  EXPECT_EQ(c.seeds, (std::vector<std::uint64_t>{3, 1, 2}));
}

TEST(ParseConfig, AllPsoKeys) {
  const auto c = parse_config(
      "algorithm=pso\nproblem=rosenbrock\ndim=3\nc1=1.5\nc2=0.5\nvmax=0.25\n"
      "topology=ring:2\ntarget_fitness=1e-6\nseeds=4\noutput=out/dir\n");
  EXPECT_EQ(c.pso.c1, 1.5);
  EXPECT_EQ(c.pso.c2, 0.5);
  EXPECT_EQ(*c.pso.vmax, 0.25);
  EXPECT_EQ(c.pso.topology, pso::Topology::ring(2));
  EXPECT_EQ(*c.pso.termination.target_fitness, 1e-6);
  EXPECT_EQ(c.output, fs::path("out/dir"));
  EXPECT_EQ(parse_config("algorithm=pso\nproblem=sphere\nseeds=1\ntopology=ring\n").pso.topology,
            pso::Topology::ring(1));
}

TEST(ParseConfig, Errors) {
  EXPECT_NE(parse_error("algorithm=aco\nrho=1.5\n").find("rho out of [0,1]"), std::string::npos);
  EXPECT_NE(parse_error("algorithm=pso\nfrobnicate=1\n").find("unknown key frobnicate"),
            std::string::npos);
  EXPECT_NE(parse_error("algorithm=pso\nproblem=sphere\nseeds=1\nc1=abc\n").find("c1"),
            std::string::npos);
  EXPECT_NE(parse_error("algorithm=pso\nproblem=sphere\nseeds=1\nswarm_size=-3\n").find("swarm_size"),
            std::string::npos);
  EXPECT_NE(parse_error("algorithm=pso\nproblem=sphere\n").find("missing required key seeds"),
            std::string::npos);
  EXPECT_NE(parse_error("algorithm=pso\nproblem=sphere\nseeds=1\nrho=0.2\n")
                .find("key rho does not apply to algorithm pso"),
            std::string::npos);
  EXPECT_NE(parse_error("algorithm=aco\nproblem=x\nseeds=1\ndim=3\n").find("dim"),
            std::string::npos);
  EXPECT_NE(parse_error("algorithm=pso\nproblem=sphere\nseeds=5..1\n").find("seeds"),
            std::string::npos);
  EXPECT_NE(parse_error("algorithm=pso\nproblem=sphere\nseeds=1,1\n").find("duplicates"),
            std::string::npos);
  EXPECT_NE(parse_error("algorithm=pso\nproblem=sphere\nseeds=1\nseeds=2\n").find("duplicate key seeds"),
            std::string::npos);
  EXPECT_NE(parse_error("algorithm=pso\nproblem=ackley\nseeds=1\n").find("unknown benchmark"),
            std::string::npos);
  EXPECT_NE(parse_error("algorithm=pso\nproblem=sphere\nseeds=1\nswarm_size=3\ntopology=ring:3\n")
                .find("ring radius"),
            std::string::npos);
  EXPECT_NE(parse_error("algorithm=genetic\n").find("algorithm"), std::string::npos);
  EXPECT_NE(parse_error("just text\n").find("key=value"), std::string::npos);
}

// --- trace csv --------------------------------------------------------------

TEST(TraceCsv, Format) {
  RunTrace t;
  record_iteration(t, 0, 3.5, 10);
  EXPECT_EQ(emit_trace_csv(t), "iteration,best_fitness,evaluations\n0,3.5,10\n");
}

TEST(TraceCsv, RoundTripIsExact) {
  RngStream s = derive_stream(5, 5);
  RunTrace t;
  double best = 1e3;
  for (int i = 0; i < 200; ++i) {
    best *= s.next_uniform() * 0.2 + 0.8;  // arbitrary non-terminating decimals
    record_iteration(t, i, best, 30u * (i + 1));
  }
  record_iteration(t, 200, std::numeric_limits<double>::infinity(), 6030);
  const RunTrace back = parse_trace_csv(emit_trace_csv(t));
  EXPECT_EQ(back.entries, t.entries);
}

// --- summary ----------------------------------------------------------------

TEST(Aggregate, MinMedianMean) {
  const auto a = aggregate({1.0, 3.0, 2.0});
  EXPECT_EQ(a.min, 1.0);
  EXPECT_EQ(a.median, 2.0);
  EXPECT_EQ(a.mean, 2.0);
  EXPECT_EQ(aggregate({4.0, 1.0, 3.0, 2.0}).median, 2.5);
}

TEST(Summary, RoundTripAndStableBytes) {
  RunSummary s;
  s.algorithm = "pso";
  s.problem = "sphere";
  s.config = {{"c1", 2.0}, {"algorithm", "pso"}};
  s.runs.push_back({1, 0.1 + 0.2, 10, 300, 0, {0.1, -0.3}, {}, 0.25});
  s.runs.push_back({2, std::numeric_limits<double>::infinity(), 10, 300, 3, {1.0, 2.0}, {}, 0.5});
  s.best = aggregate({0.1 + 0.2, std::numeric_limits<double>::infinity()});
  s.total_evaluations = 600;
  const std::string text = emit_summary(s);
  EXPECT_EQ(text, emit_summary(s));
  EXPECT_EQ(parse_summary(text), s);
}

// --- run_experiment ---------------------------------------------------------

TEST(RunExperiment, WritesOneTracePerSeedAndSummary) {
  TempDir dir("files");
  auto c = parse_config("algorithm=pso\nproblem=sphere\ndim=3\nswarm_size=6\nmax_iterations=25\nseeds=1..3\n");
  const RunSummary s = run_experiment(c, {dir.path(), 1});
  std::size_t traces = 0;
  for (const auto& entry : fs::directory_iterator(dir.path())) {
    const auto name = entry.path().filename().string();
    EXPECT_EQ(name.find(".tmp"), std::string::npos) << name;
    if (name.starts_with("trace_seed")) ++traces;
  }
  EXPECT_EQ(traces, 3u);
  EXPECT_TRUE(fs::exists(dir.path() / "summary.json"));
  ASSERT_EQ(s.runs.size(), 3u);
  EXPECT_EQ(s.total_evaluations, 3u * 6u * 26u);

  const auto parsed = parse_summary(slurp(dir.path() / "summary.json"));
  EXPECT_EQ(parsed.rng, std::string(kRngAlgorithm));
  EXPECT_EQ(parsed.runs.size(), 3u);
  std::vector<double> bests;
  for (const auto& r : parsed.runs) bests.push_back(r.best);
  EXPECT_EQ(aggregate(bests), parsed.best);

  for (std::uint64_t seed : {1, 2, 3}) {
    const RunTrace t = parse_trace_csv(slurp(dir.path() / trace_file_name(seed)));
    ASSERT_EQ(t.entries.size(), 25u);
    for (std::size_t i = 1; i < t.entries.size(); ++i) {
      EXPECT_LE(t.entries[i].best_fitness, t.entries[i - 1].best_fitness);
    }
  }
}

TEST(RunExperiment, RerunIsByteIdentical) {
  TempDir a("rerun_a");
  TempDir b("rerun_b");
  auto c = parse_config("algorithm=aco\nproblem=random:7:3\nmax_iterations=15\nseeds=1,2\n");
  const RunSummary sa = run_experiment(c, {a.path(), 1});
  const RunSummary sb = run_experiment(c, {b.path(), 3});
  for (std::uint64_t seed : {1, 2}) {
    EXPECT_EQ(slurp(a.path() / trace_file_name(seed)), slurp(b.path() / trace_file_name(seed)));
  }
  RunSummary ca = sa, cb = sb;
  for (auto* s : {&ca, &cb}) {
    for (auto& r : s->runs) r.wall_seconds = 0.0;
  }
  EXPECT_EQ(emit_summary(ca), emit_summary(cb));
}

TEST(RunExperiment, LoadsInstanceRelativeToBaseDir) {
  TempDir dir("instance");
  fs::create_directories(dir.path());
  std::ofstream(dir.path() / "square.tsp") << "# square\n4\n0 0 0\n1 0 1\n2 1 1\n3 1 0\n";
  auto c = parse_config("algorithm=aco\nproblem=square.tsp\nnum_ants=8\nmax_iterations=50\nseeds=1\n");
  c.base_dir = dir.path();
  const RunSummary s = run_experiment(c, {dir.path() / "out", 1});
  EXPECT_EQ(s.runs[0].best, 4.0);
  EXPECT_EQ(s.runs[0].best_tour.size(), 4u);
}

TEST(RunExperiment, FailureLeavesNoFiles) {
  TempDir dir("failure");
  auto c = parse_config("algorithm=aco\nproblem=missing.tsp\nseeds=1\n");
  EXPECT_THROW(run_experiment(c, {dir.path(), 1}), std::runtime_error);
  EXPECT_FALSE(fs::exists(dir.path()) && !fs::is_empty(dir.path()));
}

TEST(RunExperiment, UnwritableOutputIsAnError) {
  TempDir dir("unwritable");
  fs::create_directories(dir.path());
  std::ofstream(dir.path() / "file") << "x";
  auto c = parse_config("algorithm=pso\nproblem=sphere\nseeds=1\nmax_iterations=2\n");
  EXPECT_THROW(run_experiment(c, {dir.path() / "file" / "sub", 1}), std::runtime_error);
}

}  // namespace
}  // namespace swarmkit::experiment
