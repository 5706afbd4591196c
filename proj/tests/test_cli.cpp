#include "sndh/cli.hpp"

#include "fixtures.hpp"

#include <gtest/gtest.h>

#include <fstream>
#include <sstream>

using namespace sndh;
namespace fs = std::filesystem;

namespace {

// Fresh directory under the system temp dir, removed on destruction.
struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& tag) {
    path = fs::temp_directory_path() / ("sndh_test_" + tag + "_" + std::to_string(::testing::UnitTest::GetInstance()->random_seed()));
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

std::vector<std::vector<std::string>> read_csv(const fs::path& p) {
  std::vector<std::vector<std::string>> rows;
  std::ifstream in(p);
  std::string line;
  while (std::getline(in, line)) {
    std::vector<std::string> cells;
    std::stringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    rows.push_back(cells);
  }
  return rows;
}

int run_tool(std::vector<std::string> args) {
  args.insert(args.begin(), "sndh");
  std::vector<char*> argv;
  for (auto& a : args) argv.push_back(a.data());
  return cli::run(static_cast<int>(argv.size()), argv.data());
}

// Two terminals, two periods, one commodity of demand 8 from terminal 0 at
// period 0 to terminal 1 by period 1. Shipping needs 0 -> 1 (cost 20) and a
// return 1 -> 0 (cost 25) to keep the vehicle balanced; outsourcing would
// cost 8 * 80. The optimum is therefore 45.
void write_toy(const fs::path& dir) {
  Instance inst;
  inst.num_terminals = 2;
  inst.horizon = 2;
  inst.capacity = 12.0;
  inst.outsourcing_cost = 80.0;
  inst.arc_cost.resize(2, 2);
  inst.arc_cost << 1.0, 20.0, 25.0, 2.0;
  inst.commodities.push_back({0, 0, 1, 1});
  ScenarioSet s;
  s.demands = Eigen::MatrixXd::Constant(1, 1, 8.0);
  s.probabilities = Eigen::VectorXd::Ones(1);
  io::write_json(dir / "instance.json", io::to_json(inst));
  io::write_json(dir / "scenarios.json", io::to_json(s));
}

}  // namespace

TEST(Io, InstanceAndScenarioFilesRoundTripByteForByte) {
  TempDir dir("io");
  const Instance inst = fixtures::make_instance(5, 4, 3, 12);
  const ScenarioSet scens = fixtures::make_scenarios(inst, 9, 4);
  io::write_json(dir.path / "a.json", io::to_json(inst));
  io::write_json(dir.path / "s.json", io::to_json(scens));

  const Instance back = io::instance_from_json(io::read_json(dir.path / "a.json"));
  EXPECT_EQ(back.arc_cost, inst.arc_cost);
  EXPECT_EQ(back.commodities, inst.commodities);
  const ScenarioSet sback = io::scenarios_from_json(io::read_json(dir.path / "s.json"));
  EXPECT_EQ(sback.demands, scens.demands);
  EXPECT_EQ(sback.seed, scens.seed);

  io::write_json(dir.path / "a2.json", io::to_json(back));
  io::write_json(dir.path / "s2.json", io::to_json(sback));
  EXPECT_EQ(slurp(dir.path / "a.json"), slurp(dir.path / "a2.json"));
  EXPECT_EQ(slurp(dir.path / "s.json"), slurp(dir.path / "s2.json"));
}

TEST(Io, BundleFilesRoundTripForBothMethods) {
  TempDir dir("bundleio");
  const Instance inst = fixtures::make_instance(4, 3, 3, 2);
  const ScenarioSet scens = fixtures::make_scenarios(inst, 30, 8);
  FcmConfig fcm;
  fcm.num_bundles = 4;
  fcm.exponent = 2.0;
  for (const std::string method : {"fcm", "kmeans"}) {
    const io::BundleFile file = cli::make_bundles(scens, method, fcm);
    EXPECT_EQ(file.membership.has_value(), method == "fcm");
    io::write_json(dir.path / "b.json", io::to_json(file));
    const io::BundleFile back = io::bundle_file_from_json(io::read_json(dir.path / "b.json"));
    EXPECT_EQ(back.bundles.bundles, file.bundles.bundles);
    EXPECT_EQ(back.bundles.occurrence_count, file.bundles.occurrence_count);
    io::write_json(dir.path / "b2.json", io::to_json(back));
    EXPECT_EQ(slurp(dir.path / "b.json"), slurp(dir.path / "b2.json")) << method;
  }
}

TEST(Io, ReportsUnreadableAndMalformedFiles) {
  TempDir dir("bad");
  EXPECT_THROW(io::read_json(dir.path / "missing.json"), std::runtime_error);
  std::ofstream(dir.path / "broken.json") << "{ \"num_terminals\": ";
  EXPECT_THROW(io::read_json(dir.path / "broken.json"), std::runtime_error);
  std::ofstream(dir.path / "partial.json") << "{\"num_terminals\": 3}";
  EXPECT_ANY_THROW(io::instance_from_json(io::read_json(dir.path / "partial.json")));
}

TEST(Gen, DefaultsMatchTheCaseStudySize) {
  TempDir dir("gen");
  cli::GenOptions opt;
  opt.out = dir.path;
  opt.scenario_counts = {5};
  const auto files = cli::cmd_gen(opt);
  ASSERT_EQ(files.size(), 2u);
  const Instance inst = io::instance_from_json(io::read_json(files[0]));
  EXPECT_EQ(inst.num_terminals, 12);
  EXPECT_EQ(inst.horizon, 5);
  EXPECT_EQ(inst.capacity, 12.0);
  EXPECT_EQ(inst.outsourcing_cost, 80.0);
  EXPECT_EQ(inst.num_commodities(), 6);
  EXPECT_EQ(io::scenarios_from_json(io::read_json(files[1])).size(), 5);
}

TEST(Gen, SameSeedGivesIdenticalFiles) {
  TempDir a("gena"), b("genb");
  for (const auto* dir : {&a, &b})
    ASSERT_EQ(run_tool({"gen", "--terminals", "4", "--horizon", "3", "--scenarios", "6", "12", "--seed", "9",
                        "--out", dir->path.string()}),
              0);
  for (const char* name : {"instance.json", "scenarios_6.json", "scenarios_12.json"})
    EXPECT_EQ(slurp(a.path / name), slurp(b.path / name)) << name;
  const Instance inst = io::instance_from_json(io::read_json(a.path / "instance.json"));
  EXPECT_EQ(inst.num_terminals, 4);
  EXPECT_EQ(inst.horizon, 3);
}

TEST(Bundle, KmeansHasNoRepeatsAndProbabilitiesSumToOne) {
  TempDir dir("bundle");
  cli::GenOptions gen;
  gen.generator = {4, 3, 3};
  gen.scenario_counts = {48};
  gen.out = dir.path;
  cli::cmd_gen(gen);

  cli::BundleOptions opt;
  opt.scenarios = dir.path / "scenarios_48.json";
  opt.method = "kmeans";
  opt.out = dir.path / "k.json";
  const auto out = cli::cmd_bundle(opt);
  for (int c : out.file.bundles.occurrence_count) EXPECT_EQ(c, 1);
  EXPECT_NEAR(out.file.bundles.bundle_prob.sum(), 1.0, 1e-12);
  const auto csv = read_csv(out.csv_path);
  ASSERT_FALSE(csv.empty());
  EXPECT_EQ(csv[0], (std::vector<std::string>{"section", "key", "value"}));
  bool saw_repeated = false;
  for (const auto& row : csv)
    if (row[0] == "repeated_scenarios") {
      saw_repeated = true;
      EXPECT_EQ(row[2], "0");
    }
  EXPECT_TRUE(saw_repeated);
}

TEST(Bundle, HigherExponentRepeatsMoreScenarios) {
  TempDir dir("overlap");
  cli::GenOptions gen;
  gen.generator = {6, 4, 6};
  gen.scenario_counts = {48};
  gen.seed = 3;
  gen.out = dir.path;
  cli::cmd_gen(gen);

  int repeated[2];
  const double exponents[2] = {1.5, 2.0};
  for (int i = 0; i < 2; ++i) {
    cli::BundleOptions opt;
    opt.scenarios = dir.path / "scenarios_48.json";
    opt.fcm.num_bundles = 5;
    opt.fcm.exponent = exponents[i];
    opt.out = dir.path / ("f" + std::to_string(i) + ".json");
    const auto out = cli::cmd_bundle(opt);
    repeated[i] = out.stats.repeated_scenarios;
    EXPECT_NEAR(out.file.bundles.bundle_prob.sum(), 1.0, 1e-9);
  }
  EXPECT_GT(repeated[1], repeated[0]);
}

TEST(Bundle, MoreBundlesThanScenariosIsAUsageError) {
  TempDir dir("usage");
  cli::GenOptions gen;
  gen.generator = {3, 3, 2};
  gen.scenario_counts = {4};
  gen.out = dir.path;
  cli::cmd_gen(gen);
  cli::BundleOptions opt;
  opt.scenarios = dir.path / "scenarios_4.json";
  opt.fcm.num_bundles = 5;
  opt.out = dir.path / "b.json";
  EXPECT_THROW(cli::cmd_bundle(opt), cli::UsageError);
  EXPECT_EQ(run_tool({"bundle", opt.scenarios.string(), "--bundles", "5", "--out", opt.out.string()}), 2);
}

TEST(Solve, ExtensiveFormOnToyFindsTheHandOptimum) {
  TempDir dir("toy");
  write_toy(dir.path);
  cli::SolveOptions opt;
  opt.instance = dir.path / "instance.json";
  opt.scenarios = dir.path / "scenarios.json";
  opt.extensive = true;
  opt.out = dir.path / "sol.json";
  const cli::SolveReport rep = cli::cmd_solve(opt);
  EXPECT_NEAR(rep.objective, 45.0, 1e-9);
  EXPECT_TRUE(rep.converged);
  const io::Json j = io::read_json(opt.out);
  for (const char* key : {"design", "objective", "iterations", "seconds", "converged"}) EXPECT_TRUE(j.contains(key)) << key;
  EXPECT_DOUBLE_EQ(j.at("objective").get<double>(), 45.0);
}

TEST(Solve, ExtensiveModeRespectsTheSizeGuard) {
  TempDir dir("guard");
  write_toy(dir.path);
  cli::SolveOptions opt;
  opt.instance = dir.path / "instance.json";
  opt.scenarios = dir.path / "scenarios.json";
  opt.extensive = true;
  opt.max_extensive_columns = 3;
  opt.out = dir.path / "sol.json";
  EXPECT_THROW(cli::cmd_solve(opt), cli::UsageError);
  EXPECT_FALSE(fs::exists(opt.out));
}

TEST(Solve, PhaNeverBeatsTheExtensiveOptimum) {
  TempDir dir("pha");
  const Instance inst = fixtures::tiny_instance();
  io::write_json(dir.path / "instance.json", io::to_json(inst));
  io::write_json(dir.path / "scenarios.json", io::to_json(fixtures::tiny_scenarios(inst)));
  ASSERT_EQ(run_tool({"bundle", (dir.path / "scenarios.json").string(), "--method", "kmeans", "--bundles", "2",
                      "--out", (dir.path / "b.json").string()}),
            0);

  cli::SolveOptions ef;
  ef.instance = dir.path / "instance.json";
  ef.scenarios = dir.path / "scenarios.json";
  ef.extensive = true;
  ef.out = dir.path / "ef.json";
  const double exact = cli::cmd_solve(ef).objective;

  cli::SolveOptions ph = ef;
  ph.extensive = false;
  ph.bundles = dir.path / "b.json";
  ph.rho_grid = {1.0, 2.0};
  ph.pha.max_iterations = 40;
  ph.reference = exact;
  ph.out = dir.path / "pha.json";
  const cli::SolveReport rep = cli::cmd_solve(ph);
  ASSERT_TRUE(rep.relative_difference.has_value());
  EXPECT_GE(*rep.relative_difference, -1e-6);
  EXPECT_TRUE(fs::exists(dir.path / "pha_trace.csv"));
  EXPECT_EQ(static_cast<int>(read_csv(dir.path / "pha_trace.csv").size()), rep.iterations + 1);

  ph.reference = rep.objective;
  ph.rho_grid = {rep.penalty};
  EXPECT_EQ(*cli::cmd_solve(ph).relative_difference, 0.0);
}

TEST(Solve, RelativeDifferenceFormula) {
  EXPECT_NEAR(cli::relative_difference(102.1, 100.0), 2.1, 1e-12);
  EXPECT_DOUBLE_EQ(cli::relative_difference(50.0, 100.0), -50.0);
  EXPECT_THROW(cli::relative_difference(1.0, 0.0), std::invalid_argument);
}

TEST(Experiment, SmallGridFillsEveryCell) {
  TempDir dir("exp");
  cli::ExperimentConfig cfg;
  cfg.generator = {4, 3, 3};
  cfg.scenario_counts = {12};
  cfg.exponents = {1.5, 2.0};
  cfg.num_bundles = 2;
  cfg.cell_seconds = 30.0;
  cfg.pha.max_iterations = 10;
  cfg.out = dir.path;
  const cli::ExperimentReport rep = cli::cmd_experiment(cfg);
  ASSERT_EQ(rep.cells.size(), 3u);
  EXPECT_TRUE(rep.all_completed());

  const auto table = read_csv(dir.path / "table_v.csv");
  ASSERT_EQ(table.size(), 4u);
  const auto& head = table[0];
  auto col = [&](const std::string& name) {
    return static_cast<std::size_t>(std::find(head.begin(), head.end(), name) - head.begin());
  };
  double kmeans_obj = 0.0;
  for (std::size_t r = 1; r < table.size(); ++r) {
    EXPECT_EQ(table[r][col("completed")], "1");
    EXPECT_TRUE(table[r][col("converged")] == "1" || table[r][col("timeout")] == "1");
    if (table[r][col("method")] == "kmeans") {
      kmeans_obj = std::stod(table[r][col("Obj")]);
      EXPECT_EQ(std::stod(table[r][col("rel_diff_pct")]), 0.0);
    }
  }
  for (std::size_t r = 1; r < table.size(); ++r) {
    const double obj = std::stod(table[r][col("Obj")]);
    EXPECT_EQ(std::stod(table[r][col("rel_diff_pct")]), cli::relative_difference(obj, kmeans_obj));
  }
  for (const char* name : {"table_ii.csv", "table_iii.csv", "config.json", "instance.json", "scenarios_12.json"})
    EXPECT_TRUE(fs::exists(dir.path / name)) << name;
  EXPECT_TRUE(fs::exists(dir.path / "cells" / "12_kmeans" / "solution.json"));
  EXPECT_EQ(read_csv(dir.path / "table_iii.csv").size(), 4u);
}

TEST(Experiment, FailingCellsAreRecordedAndTheRunContinues) {
  TempDir dir("expfail");
  cli::ExperimentConfig cfg;
  cfg.generator = {3, 3, 2};
  cfg.scenario_counts = {6};
  cfg.exponents = {2.0};
  cfg.num_bundles = 2;
  cfg.pha.tolerance = -1.0;  // rejected inside every cell
  cfg.out = dir.path;
  const cli::ExperimentReport rep = cli::cmd_experiment(cfg);
  ASSERT_EQ(rep.cells.size(), 2u);
  EXPECT_FALSE(rep.all_completed());
  for (const auto& c : rep.cells) {
    EXPECT_FALSE(c.completed);
    EXPECT_FALSE(c.error.empty());
  }
  const auto table = read_csv(dir.path / "table_v.csv");
  ASSERT_EQ(table.size(), 3u);
}

TEST(Experiment, ExitStatusReflectsCompletion) {
  TempDir dir("exptool");
  cli::ExperimentConfig cfg;
  cfg.generator = {3, 3, 2};
  cfg.scenario_counts = {6};
  cfg.exponents = {2.0};
  cfg.num_bundles = 2;
  cfg.pha.max_iterations = 5;
  cfg.out = dir.path / "ok";
  io::write_json(dir.path / "ok.json", cfg.to_json());
  EXPECT_EQ(run_tool({"experiment", (dir.path / "ok.json").string()}), 0);
  EXPECT_TRUE(fs::exists(dir.path / "ok" / "table_v.csv"));

  cfg.pha.tolerance = -1.0;
  cfg.out = dir.path / "bad";
  io::write_json(dir.path / "bad.json", cfg.to_json());
  EXPECT_EQ(run_tool({"experiment", (dir.path / "bad.json").string()}), 1);
}

TEST(Experiment, ConfigRoundTripsAndValidates) {
  cli::ExperimentConfig cfg;
  cfg.exponents = {1.25, 3.0};
  cfg.rho_grid = {0.5};
  cfg.master_seed = 99;
  const cli::ExperimentConfig back = cli::ExperimentConfig::from_json(cfg.to_json());
  EXPECT_EQ(back.to_json(), cfg.to_json());

  cli::ExperimentConfig bad;
  bad.exponents = {1.0};
  EXPECT_THROW(bad.validate(), cli::UsageError);
  bad = cli::ExperimentConfig{};
  bad.rho_grid.clear();
  EXPECT_THROW(bad.validate(), cli::UsageError);
  bad = cli::ExperimentConfig{};
  bad.instance = "/nonexistent/instance.json";
  EXPECT_THROW(bad.validate(), cli::UsageError);
}

TEST(Tool, RejectsUnknownSubcommandsAndFlags) {
  EXPECT_NE(run_tool({"frobnicate"}), 0);
  EXPECT_NE(run_tool({}), 0);
  EXPECT_NE(run_tool({"bundle", "--method", "spectral"}), 0);
}
