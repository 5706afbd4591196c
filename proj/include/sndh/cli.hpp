#pragma once

#include "sndh/bundling.hpp"
#include "sndh/io.hpp"
#include "sndh/network.hpp"
#include "sndh/pha.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace sndh::cli {

namespace fs = std::filesystem;

/// Thrown for invalid command-line input; the tool exits with status 2.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// (objective - reference) / reference * 100.
double relative_difference(double objective, double reference);

// ---------------------------------------------------------------- gen

struct GenOptions {
  GeneratorConfig generator;
  std::vector<int> scenario_counts{48};
  std::uint64_t seed = 1;
  bool moment_correct = false;
  fs::path out = ".";
};

/// Writes instance.json and scenarios_<n>.json for each count. Returns the
/// paths written, instance first.
std::vector<fs::path> cmd_gen(const GenOptions& opt);

// ---------------------------------------------------------------- bundle

struct BundleOptions {
  fs::path scenarios;
  std::string method = "fcm";  // or "kmeans"
  FcmConfig fcm;               // num_bundles and seed also drive k-means
  fs::path out = "bundles.json";
};

struct BundleOutcome {
  io::BundleFile file;
  OverlapStats stats;
  fs::path json_path;
  fs::path csv_path;
};

/// Bundle JSON at opt.out plus an overlap report next to it (same stem,
/// .csv) with rows section,key,value for bundle sizes, the repeated-scenario
/// count and the occurrence histogram.
BundleOutcome cmd_bundle(const BundleOptions& opt);

/// The bundling step alone, without files.
io::BundleFile make_bundles(const ScenarioSet& scens, const std::string& method, const FcmConfig& fcm);

void write_overlap_csv(const OverlapStats& stats, std::ostream& out);

// ---------------------------------------------------------------- solve

struct SolveOptions {
  fs::path instance;
  fs::path scenarios;
  fs::path bundles;  // unused with `extensive`
  PhaConfig pha;
  std::vector<double> rho_grid;  // empty: the single penalty in `pha`
  bool extensive = false;
  double mip_gap = 0.0;          // extensive mode only
  int max_extensive_columns = 20000;
  std::optional<double> reference;
  fs::path out = "solution.json";
};

struct SolveReport {
  std::string method;  // "pha" or "extensive"
  Eigen::VectorXd design;
  double objective = 0.0;
  int iterations = 0;
  double seconds = 0.0;
  bool converged = false;
  bool repaired = false;
  double penalty = 0.0;
  std::string status;
  std::optional<double> relative_difference;

  io::Json to_json() const;
};

/// Writes the solution JSON at opt.out and, for PHA, the best run's trace
/// as <stem>_trace.csv beside it.
SolveReport cmd_solve(const SolveOptions& opt);

// ---------------------------------------------------------------- experiment

struct ExperimentConfig {
  fs::path instance;  // empty: generate one from `generator` and the master seed
  GeneratorConfig generator{6, 4, 6};
  std::vector<int> scenario_counts{48};
  std::vector<double> exponents{1.5, 1.85, 2.0};
  bool include_kmeans = true;
  int num_bundles = 5;
  double gamma = 0.8;
  double eta = 0.95;
  PhaConfig pha;
  std::vector<double> rho_grid{1.0};
  double cell_seconds = 150.0;  // PHA budget per cell, split across the grid
  int concurrent_cells = 1;
  std::uint64_t master_seed = 2024;
  fs::path out = "experiment";

  ExperimentConfig();
  void validate() const;
  io::Json to_json() const;
  static ExperimentConfig from_json(const io::Json& j);
};

struct ExperimentCell {
  int scenarios = 0;
  std::string method;  // "fcm" or "kmeans"
  double exponent = 0.0;
  bool completed = false;
  std::string error;
  double objective = 0.0;
  std::optional<double> relative_difference;
  int iterations = 0;
  double bundling_seconds = 0.0;
  double pha_seconds = 0.0;
  bool converged = false;
  bool timeout = false;
  double penalty = 0.0;
  OverlapStats overlap;
};

struct ExperimentReport {
  std::vector<ExperimentCell> cells;
  bool all_completed() const;
};

/// Bundles and solves every (scenario count, method) cell and writes
/// table_v.csv, table_ii.csv, table_iii.csv and per-cell files under
/// cfg.out. A failing cell is recorded and the run continues.
ExperimentReport cmd_experiment(const ExperimentConfig& cfg);

void write_table_v(const std::vector<ExperimentCell>& cells, std::ostream& out);

/// Entry point used by the tool; returns the process exit status.
int run(int argc, char** argv);

}  // namespace sndh::cli
