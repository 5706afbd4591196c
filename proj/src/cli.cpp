#include "sndh/cli.hpp"

#include "sndh/formulation.hpp"
#include "sndh/random.hpp"

#include <CLI11.hpp>
#include <spdlog/spdlog.h>

#include <atomic>
#include <charconv>
#include <chrono>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <thread>

namespace sndh::cli {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::ofstream open_for_write(const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  return out;
}

fs::path sibling(const fs::path& path, const std::string& suffix, const std::string& ext) {
  return path.parent_path() / (path.stem().string() + suffix + ext);
}

io::Json fcm_echo(const FcmConfig& c) {
  return {{"num_bundles", c.num_bundles},         {"exponent", c.exponent},
          {"max_iterations", c.max_iterations},   {"min_improvement", c.min_improvement},
          {"score_threshold", c.score_threshold}, {"interval_param", c.interval_param},
          {"seed", c.seed}};
}

io::Json pha_echo(const PhaConfig& c) {
  return {{"tolerance", c.tolerance},
          {"max_seconds", c.max_seconds},
          {"max_iterations", c.max_iterations},
          {"subproblem_gap", c.subproblem_gap},
          {"subproblem_node_limit", c.subproblem_node_limit},
          {"threads", c.threads}};
}

void pha_from(const io::Json& j, PhaConfig& c) {
  c.tolerance = j.value("tolerance", c.tolerance);
  c.max_seconds = j.value("max_seconds", c.max_seconds);
  c.max_iterations = j.value("max_iterations", c.max_iterations);
  c.subproblem_gap = j.value("subproblem_gap", c.subproblem_gap);
  c.subproblem_node_limit = j.value("subproblem_node_limit", c.subproblem_node_limit);
  c.threads = j.value("threads", c.threads);
}

// shortest text that reads back to the same double
std::string exact(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

}  // namespace

double relative_difference(double objective, double reference) {
  if (reference == 0.0) throw std::invalid_argument("relative difference against a zero reference");
  return (objective - reference) / reference * 100.0;
}

// ---------------------------------------------------------------- gen

std::vector<fs::path> cmd_gen(const GenOptions& opt) {
  for (int n : opt.scenario_counts)
    if (n < 1) throw UsageError("scenario counts must be positive");
  const Instance inst = generate_instance(opt.generator, derive_seed(opt.seed, 0));
  std::vector<fs::path> written{opt.out / "instance.json"};
  io::write_json(written.front(), io::to_json(inst));
  for (int n : opt.scenario_counts) {
    const ScenarioSet s = generate_scenario_set(inst, n, TriangularDemand{},
                                                derive_seed(opt.seed, 1000 + static_cast<std::uint64_t>(n)),
                                                opt.moment_correct);
    written.push_back(opt.out / ("scenarios_" + std::to_string(n) + ".json"));
    io::write_json(written.back(), io::to_json(s));
  }
  spdlog::info("wrote {} files to {}", written.size(), opt.out.string());
  return written;
}

// ---------------------------------------------------------------- bundle

io::BundleFile make_bundles(const ScenarioSet& scens, const std::string& method, const FcmConfig& fcm) {
  if (fcm.num_bundles < 1) throw UsageError("at least one bundle is required");
  if (fcm.num_bundles > scens.size())
    throw UsageError("cannot form " + std::to_string(fcm.num_bundles) + " bundles from " +
                     std::to_string(scens.size()) + " scenarios");
  io::BundleFile file;
  file.method = method;
  if (method == "fcm") {
    const FuzzyPartition part = fcm_fit(scens, fcm);
    file.bundles = bundle_probabilities(assign_bundles(part, fcm), scens);
    file.membership = part.membership;
    file.config = fcm_echo(fcm);
  } else if (method == "kmeans") {
    file.bundles = kmeans_fit(scens, fcm.num_bundles, fcm.seed);
    file.config = {{"num_bundles", fcm.num_bundles}, {"seed", fcm.seed}};
  } else {
    throw UsageError("unknown bundling method '" + method + "'");
  }
  return file;
}

void write_overlap_csv(const OverlapStats& stats, std::ostream& out) {
  out << "section,key,value\n";
  for (std::size_t b = 0; b < stats.bundle_sizes.size(); ++b)
    out << "bundle_size," << b << ',' << stats.bundle_sizes[b] << '\n';
  out << "total_size,all," << stats.total_size << '\n';
  out << "repeated_scenarios,all," << stats.repeated_scenarios << '\n';
  std::map<int, int> histogram;
  for (int c : stats.occurrences) ++histogram[c];
  for (const auto& [occ, count] : histogram) out << "occurrences," << occ << ',' << count << '\n';
}

BundleOutcome cmd_bundle(const BundleOptions& opt) {
  const ScenarioSet scens = io::scenarios_from_json(io::read_json(opt.scenarios));
  BundleOutcome result;
  result.file = make_bundles(scens, opt.method, opt.fcm);
  result.stats = overlap_stats(result.file.bundles);
  result.json_path = opt.out;
  result.csv_path = sibling(opt.out, "", ".csv");
  io::write_json(result.json_path, io::to_json(result.file));
  auto csv = open_for_write(result.csv_path);
  write_overlap_csv(result.stats, csv);
  spdlog::info("{} bundling: sizes {}, {} repeated scenarios", opt.method,
               fmt::join(result.stats.bundle_sizes, "/"), result.stats.repeated_scenarios);
  return result;
}

// ---------------------------------------------------------------- solve

io::Json SolveReport::to_json() const {
  io::Json design_json = io::Json::array();
  for (double v : design) design_json.push_back(v);
  io::Json j = {{"method", method},       {"design", design_json},   {"objective", objective},
                {"iterations", iterations}, {"seconds", seconds},    {"converged", converged},
                {"repaired", repaired},   {"penalty", penalty},      {"status", status}};
  if (relative_difference) j["relative_difference_pct"] = *relative_difference;
  return j;
}

SolveReport cmd_solve(const SolveOptions& opt) {
  const Instance inst = io::instance_from_json(io::read_json(opt.instance));
  const ScenarioSet scens = io::scenarios_from_json(io::read_json(opt.scenarios));
  if (scens.num_commodities() != inst.num_commodities())
    throw UsageError("scenario file has " + std::to_string(scens.num_commodities()) +
                     " demand columns but the instance has " + std::to_string(inst.num_commodities()) +
                     " commodities");
  SolveReport rep;
  const auto t0 = Clock::now();
  if (opt.extensive) {
    const Model model = build_extensive_form(inst, scens);
    if (model.lp.num_cols() > opt.max_extensive_columns)
      throw UsageError("extensive form has " + std::to_string(model.lp.num_cols()) +
                       " columns, above the limit of " + std::to_string(opt.max_extensive_columns));
    MilpLimits limits;
    limits.rel_gap = opt.mip_gap;
    limits.time_limit = opt.pha.max_seconds;
    const Solution sol = solve_milp(model.lp, limits);
    rep.method = "extensive";
    rep.status = to_string(sol.status);
    if (!sol.has_primal()) throw std::runtime_error("extensive form: no solution (" + rep.status + ")");
    rep.design = model.index.design_values(sol.primal).array().round();
    rep.objective = evaluate_design(inst, scens, rep.design).total();
    rep.converged = sol.status == SolveStatus::kOptimal || sol.status == SolveStatus::kGapReached;
  } else {
    if (opt.bundles.empty()) throw UsageError("PHA needs a bundle file (or use --extensive)");
    const io::BundleFile bf = io::bundle_file_from_json(io::read_json(opt.bundles));
    if (bf.bundles.num_scenarios() != scens.size())
      throw UsageError("bundle file covers " + std::to_string(bf.bundles.num_scenarios()) +
                       " scenarios, scenario file has " + std::to_string(scens.size()));
    const std::vector<double> grid = opt.rho_grid.empty() ? std::vector<double>{opt.pha.penalty} : opt.rho_grid;
    const SweepResult sweep = penalty_sweep(inst, scens, bf.bundles, grid, opt.pha);
    const PhaResult& best = sweep.best_run();
    rep.method = "pha";
    rep.design = best.design;
    rep.objective = best.objective;
    rep.iterations = best.iterations;
    rep.converged = best.converged;
    rep.repaired = best.repaired;
    rep.penalty = best.penalty;
    rep.status = best.converged ? "converged" : "stopped";
    auto trace = open_for_write(sibling(opt.out, "_trace", ".csv"));
    write_trace_csv(best.state.history, trace);
  }
  rep.seconds = seconds_since(t0);
  if (opt.reference) rep.relative_difference = relative_difference(rep.objective, *opt.reference);
  io::write_json(opt.out, rep.to_json());
  spdlog::info("{} objective {:.6g} in {:.1f}s ({})", rep.method, rep.objective, rep.seconds, rep.status);
  return rep;
}

// ---------------------------------------------------------------- experiment

ExperimentConfig::ExperimentConfig() {
  pha.max_iterations = 30;
  pha.subproblem_node_limit = 200;
}

void ExperimentConfig::validate() const {
  if (!instance.empty() && !fs::exists(instance)) throw UsageError("instance file not found: " + instance.string());
  if (scenario_counts.empty()) throw UsageError("experiment: no scenario counts");
  if (exponents.empty() && !include_kmeans) throw UsageError("experiment: no bundling methods");
  if (rho_grid.empty()) throw UsageError("experiment: empty rho grid");
  for (double m : exponents)
    if (!(m > 1.0)) throw UsageError("experiment: fuzzy exponents must exceed 1");
  for (double r : rho_grid)
    if (!(r > 0.0)) throw UsageError("experiment: penalties must be positive");
  for (int n : scenario_counts)
    if (n < num_bundles) throw UsageError("experiment: fewer scenarios than bundles");
  if (!(cell_seconds > 0.0)) throw UsageError("experiment: cell budget must be positive");
  if (concurrent_cells < 1) throw UsageError("experiment: concurrent_cells must be at least 1");
}

io::Json ExperimentConfig::to_json() const {
  return {{"instance", instance.string()},
          {"terminals", generator.num_terminals},
          {"horizon", generator.horizon},
          {"commodities", generator.num_commodities},
          {"scenario_counts", scenario_counts},
          {"exponents", exponents},
          {"include_kmeans", include_kmeans},
          {"num_bundles", num_bundles},
          {"gamma", gamma},
          {"eta", eta},
          {"pha", pha_echo(pha)},
          {"rho_grid", rho_grid},
          {"cell_seconds", cell_seconds},
          {"concurrent_cells", concurrent_cells},
          {"master_seed", master_seed},
          {"out", out.string()}};
}

ExperimentConfig ExperimentConfig::from_json(const io::Json& j) {
  ExperimentConfig c;
  c.instance = j.value("instance", std::string{});
  c.generator.num_terminals = j.value("terminals", c.generator.num_terminals);
  c.generator.horizon = j.value("horizon", c.generator.horizon);
  c.generator.num_commodities = j.value("commodities", c.generator.num_commodities);
  c.scenario_counts = j.value("scenario_counts", c.scenario_counts);
  c.exponents = j.value("exponents", c.exponents);
  c.include_kmeans = j.value("include_kmeans", c.include_kmeans);
  c.num_bundles = j.value("num_bundles", c.num_bundles);
  c.gamma = j.value("gamma", c.gamma);
  c.eta = j.value("eta", c.eta);
  if (j.contains("pha")) pha_from(j.at("pha"), c.pha);
  c.rho_grid = j.value("rho_grid", c.rho_grid);
  c.cell_seconds = j.value("cell_seconds", c.cell_seconds);
  c.concurrent_cells = j.value("concurrent_cells", c.concurrent_cells);
  c.master_seed = j.value("master_seed", c.master_seed);
  c.out = j.value("out", c.out.string());
  return c;
}

bool ExperimentReport::all_completed() const {
  for (const auto& c : cells)
    if (!c.completed) return false;
  return !cells.empty();
}

void write_table_v(const std::vector<ExperimentCell>& cells, std::ostream& out) {
  out << "scenarios,method,m,Obj,rel_diff_pct,#Ite,bundling_s,pha_s,converged,timeout,rho,completed,error\n";
  for (const auto& c : cells) {
    out << c.scenarios << ',' << c.method << ',' << (c.method == "fcm" ? exact(c.exponent) : "") << ',';
    if (c.completed) {
      out << exact(c.objective) << ',' << (c.relative_difference ? exact(*c.relative_difference) : "") << ','
          << c.iterations << ',' << exact(c.bundling_seconds) << ',' << exact(c.pha_seconds) << ','
          << (c.converged ? 1 : 0) << ',' << (c.timeout ? 1 : 0) << ',' << exact(c.penalty) << ",1,";
    } else {
      out << ",,,,,,,,0,";
    }
    std::string err = c.error;
    for (char& ch : err)
      if (ch == ',' || ch == '\n' || ch == '"') ch = ' ';
    out << err << '\n';
  }
}

namespace {

std::string cell_name(const ExperimentCell& c) {
  std::ostringstream s;
  s << c.scenarios << '_' << c.method;
  if (c.method == "fcm") s << "_m" << c.exponent;
  return s.str();
}

void run_cell(const Instance& inst, const ScenarioSet& scens, const ExperimentConfig& cfg, ExperimentCell& cell) {
  const fs::path dir = cfg.out / "cells" / cell_name(cell);
  FcmConfig fcm;
  fcm.num_bundles = cfg.num_bundles;
  fcm.exponent = cell.method == "fcm" ? cell.exponent : 2.0;
  fcm.score_threshold = cfg.gamma;
  fcm.interval_param = cfg.eta;
  fcm.seed = derive_seed(cfg.master_seed, 2000 + static_cast<std::uint64_t>(cell.scenarios));

  const auto t0 = Clock::now();
  const io::BundleFile bundles = make_bundles(scens, cell.method, fcm);
  cell.bundling_seconds = seconds_since(t0);
  cell.overlap = overlap_stats(bundles.bundles);
  io::write_json(dir / "bundles.json", io::to_json(bundles));

  PhaConfig pha = cfg.pha;
  pha.max_seconds = cfg.cell_seconds / static_cast<double>(cfg.rho_grid.size());
  const auto t1 = Clock::now();
  const SweepResult sweep = penalty_sweep(inst, scens, bundles.bundles, cfg.rho_grid, pha);
  cell.pha_seconds = seconds_since(t1);
  const PhaResult& best = sweep.best_run();
  cell.objective = best.objective;
  cell.iterations = best.iterations;
  cell.converged = best.converged;
  cell.timeout = !best.converged;
  cell.penalty = best.penalty;

  SolveReport rep;
  rep.method = "pha";
  rep.design = best.design;
  rep.objective = best.objective;
  rep.iterations = best.iterations;
  rep.seconds = cell.pha_seconds;
  rep.converged = best.converged;
  rep.repaired = best.repaired;
  rep.penalty = best.penalty;
  rep.status = best.converged ? "converged" : "stopped";
  io::write_json(dir / "solution.json", rep.to_json());
  auto trace = open_for_write(dir / "trace.csv");
  write_trace_csv(best.state.history, trace);
  cell.completed = true;
}

}  // namespace

ExperimentReport cmd_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  fs::create_directories(cfg.out);
  io::write_json(cfg.out / "config.json", cfg.to_json());

  Instance inst;
  if (cfg.instance.empty()) {
    inst = generate_instance(cfg.generator, derive_seed(cfg.master_seed, 0));
    io::write_json(cfg.out / "instance.json", io::to_json(inst));
  } else {
    inst = io::instance_from_json(io::read_json(cfg.instance));
  }

  ExperimentReport report;
  std::map<int, ScenarioSet> scenario_sets;
  for (int n : cfg.scenario_counts) {
    if (scenario_sets.count(n)) continue;
    scenario_sets[n] = generate_scenario_set(inst, n, TriangularDemand{},
                                             derive_seed(cfg.master_seed, 1000 + static_cast<std::uint64_t>(n)),
                                             false);
    io::write_json(cfg.out / ("scenarios_" + std::to_string(n) + ".json"), io::to_json(scenario_sets[n]));
    for (double m : cfg.exponents) {
      ExperimentCell c;
      c.scenarios = n;
      c.method = "fcm";
      c.exponent = m;
      report.cells.push_back(c);
    }
    if (cfg.include_kmeans) {
      ExperimentCell c;
      c.scenarios = n;
      c.method = "kmeans";
      report.cells.push_back(c);
    }
  }

  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < report.cells.size(); i = next++) {
      ExperimentCell& cell = report.cells[i];
      spdlog::info("cell {}: bundling and solving", cell_name(cell));
      try {
        run_cell(inst, scenario_sets.at(cell.scenarios), cfg, cell);
        spdlog::info("cell {}: objective {:.6g}, {} iterations, {:.1f}s", cell_name(cell), cell.objective,
                     cell.iterations, cell.bundling_seconds + cell.pha_seconds);
      } catch (const std::exception& e) {
        cell.completed = false;
        cell.error = e.what();
        spdlog::error("cell {} failed: {}", cell_name(cell), e.what());
      }
    }
  };
  const int workers = std::min<int>(cfg.concurrent_cells, static_cast<int>(report.cells.size()));
  if (workers <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int i = 0; i < workers; ++i) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }

  for (auto& cell : report.cells) {
    if (!cell.completed) continue;
    for (const auto& ref : report.cells)
      if (ref.completed && ref.method == "kmeans" && ref.scenarios == cell.scenarios && ref.objective != 0.0)
        cell.relative_difference = relative_difference(cell.objective, ref.objective);
  }

  {
    auto out = open_for_write(cfg.out / "table_v.csv");
    write_table_v(report.cells, out);
  }
  {
    auto out = open_for_write(cfg.out / "table_ii.csv");
    out << "scenarios,method,m,bundle,size\n";
    for (const auto& c : report.cells)
      for (std::size_t b = 0; b < c.overlap.bundle_sizes.size(); ++b)
        out << c.scenarios << ',' << c.method << ',' << (c.method == "fcm" ? exact(c.exponent) : "") << ','
            << b << ',' << c.overlap.bundle_sizes[b] << '\n';
  }
  {
    auto out = open_for_write(cfg.out / "table_iii.csv");
    out << "scenarios,method,m,repeated_scenarios,total_size\n";
    for (const auto& c : report.cells)
      if (!c.overlap.bundle_sizes.empty())
        out << c.scenarios << ',' << c.method << ',' << (c.method == "fcm" ? exact(c.exponent) : "") << ','
            << c.overlap.repeated_scenarios << ',' << c.overlap.total_size << '\n';
  }
  return report;
}

// ---------------------------------------------------------------- tool

namespace {

void configure_logging() {
  spdlog::set_level(spdlog::level::info);
  if (const char* env = std::getenv("SNDH_LOG")) {
    const auto level = spdlog::level::from_str(env);
    // from_str maps unknown names to "off"; only honour that when asked for
    if (level != spdlog::level::off || std::string(env) == "off") spdlog::set_level(level);
    else spdlog::warn("SNDH_LOG={} is not a log level; keeping info", env);
  }
  spdlog::set_pattern("[%H:%M:%S.%e] [%^%l%$] %v");
}

}  // namespace

int run(int argc, char** argv) {
  configure_logging();
  CLI::App app{"Stochastic service network design with scenario bundling and progressive hedging"};
  app.require_subcommand(1);

  std::uint64_t seed = 1;

  // gen
  GenOptions gen;
  auto* g = app.add_subcommand("gen", "generate an instance and scenario sets");
  g->add_option("--seed", gen.seed, "master seed");
  g->add_option("--terminals", gen.generator.num_terminals, "number of terminals")->check(CLI::PositiveNumber);
  g->add_option("--horizon", gen.generator.horizon, "periods in the cyclic schedule")->check(CLI::Range(2, 1000));
  g->add_option("--commodities", gen.generator.num_commodities, "number of commodities")->check(CLI::PositiveNumber);
  g->add_option("--scenarios", gen.scenario_counts, "scenario counts, one file each");
  g->add_flag("--moment-correct", gen.moment_correct, "match sample mean and variance per commodity");
  g->add_option("--out", gen.out, "output directory");

  // bundle
  BundleOptions bun;
  auto* b = app.add_subcommand("bundle", "group scenarios into bundles");
  b->add_option("scenarios", bun.scenarios, "scenario JSON")->required()->check(CLI::ExistingFile);
  b->add_option("--method", bun.method, "fcm or kmeans")->check(CLI::IsMember({"fcm", "kmeans"}));
  b->add_option("--bundles", bun.fcm.num_bundles, "number of bundles g")->check(CLI::PositiveNumber);
  b->add_option("--exponent", bun.fcm.exponent, "fuzzy exponent m");
  b->add_option("--gamma", bun.fcm.score_threshold, "score threshold");
  b->add_option("--eta", bun.fcm.interval_param, "interval parameter");
  b->add_option("--seed", bun.fcm.seed, "clustering seed");
  b->add_option("--out", bun.out, "bundle JSON path; the overlap CSV goes beside it");

  // solve
  SolveOptions sol;
  double reference = 0.0;
  auto* s = app.add_subcommand("solve", "solve with progressive hedging or the extensive form");
  s->add_option("instance", sol.instance, "instance JSON")->required()->check(CLI::ExistingFile);
  s->add_option("scenarios", sol.scenarios, "scenario JSON")->required()->check(CLI::ExistingFile);
  s->add_option("bundles", sol.bundles, "bundle JSON (PHA only)")->check(CLI::ExistingFile);
  s->add_option("--rho", sol.pha.penalty, "penalty");
  s->add_option("--rho-grid", sol.rho_grid, "penalties to sweep; the best run is reported");
  s->add_option("--tolerance", sol.pha.tolerance, "consensus tolerance");
  s->add_option("--max-seconds", sol.pha.max_seconds, "time budget per run");
  s->add_option("--max-iterations", sol.pha.max_iterations, "iteration cap per run");
  s->add_option("--mip-gap", sol.mip_gap, "relative gap (extensive form; subproblems use --subproblem-gap)");
  s->add_option("--subproblem-gap", sol.pha.subproblem_gap, "relative gap of each bundle subproblem");
  s->add_option("--threads", sol.pha.threads, "subproblems solved in parallel");
  s->add_flag("--extensive", sol.extensive, "solve the extensive form instead");
  s->add_option("--max-extensive-columns", sol.max_extensive_columns, "size guard for --extensive");
  auto* ref_opt = s->add_option("--reference", reference, "reference objective for the relative difference");
  s->add_option("--out", sol.out, "solution JSON path");

  // experiment
  fs::path config_path;
  ExperimentConfig exp;
  double exp_gamma = exp.gamma, exp_eta = exp.eta, exp_gap = exp.pha.subproblem_gap, exp_tol = exp.pha.tolerance;
  auto* e = app.add_subcommand("experiment", "run the bundling comparison and write the tables");
  e->add_option("config", config_path, "experiment JSON; flags override it")->check(CLI::ExistingFile);
  auto* e_seed = e->add_option("--seed", seed, "master seed");
  GeneratorConfig e_gen = exp.generator;
  auto* e_term = e->add_option("--terminals", e_gen.num_terminals, "terminals of the generated instance");
  auto* e_hor = e->add_option("--horizon", e_gen.horizon, "horizon of the generated instance");
  auto* e_com = e->add_option("--commodities", e_gen.num_commodities, "commodities of the generated instance");
  std::vector<int> e_counts;
  auto* e_sc = e->add_option("--scenarios", e_counts, "scenario counts");
  int e_bundles = exp.num_bundles;
  auto* e_bun = e->add_option("--bundles", e_bundles, "bundles per method");
  std::vector<double> e_exps;
  auto* e_exp = e->add_option("--exponent", e_exps, "fuzzy exponents");
  std::string e_method;
  auto* e_meth = e->add_option("--method", e_method, "restrict to one method")->check(CLI::IsMember({"fcm", "kmeans"}));
  auto* e_gam = e->add_option("--gamma", exp_gamma, "score threshold");
  auto* e_eta = e->add_option("--eta", exp_eta, "interval parameter");
  std::vector<double> e_grid;
  auto* e_rho = e->add_option("--rho-grid", e_grid, "penalties swept per cell");
  auto* e_tol = e->add_option("--tolerance", exp_tol, "consensus tolerance");
  double e_secs = exp.cell_seconds;
  auto* e_ms = e->add_option("--max-seconds", e_secs, "PHA budget per cell");
  auto* e_gap = e->add_option("--mip-gap", exp_gap, "relative gap of each bundle subproblem");
  int e_conc = 1;
  auto* e_cc = e->add_option("--concurrent", e_conc, "cells run in parallel");
  fs::path e_out;
  auto* e_o = e->add_option("--out", e_out, "output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& err) {
    return app.exit(err);
  }

  try {
    if (*g) {
      cmd_gen(gen);
    } else if (*b) {
      const auto out = cmd_bundle(bun);
      std::cout << out.json_path.string() << '\n' << out.csv_path.string() << '\n';
    } else if (*s) {
      if (*ref_opt) sol.reference = reference;
      const SolveReport rep = cmd_solve(sol);
      std::cout << "objective " << exact(rep.objective);
      if (rep.relative_difference) std::cout << " relative_difference_pct " << exact(*rep.relative_difference);
      std::cout << '\n';
    } else if (*e) {
      if (!config_path.empty()) exp = ExperimentConfig::from_json(io::read_json(config_path));
      if (*e_seed) exp.master_seed = seed;
      if (*e_term || *e_hor || *e_com) exp.instance.clear();
      if (*e_term) exp.generator.num_terminals = e_gen.num_terminals;
      if (*e_hor) exp.generator.horizon = e_gen.horizon;
      if (*e_com) exp.generator.num_commodities = e_gen.num_commodities;
      if (*e_sc) exp.scenario_counts = e_counts;
      if (*e_bun) exp.num_bundles = e_bundles;
      if (*e_exp) exp.exponents = e_exps;
      if (*e_meth && e_method == "kmeans") exp.exponents.clear();
      if (*e_meth && e_method == "fcm") exp.include_kmeans = false;
      if (*e_gam) exp.gamma = exp_gamma;
      if (*e_eta) exp.eta = exp_eta;
      if (*e_rho) exp.rho_grid = e_grid;
      if (*e_tol) exp.pha.tolerance = exp_tol;
      if (*e_ms) exp.cell_seconds = e_secs;
      if (*e_gap) exp.pha.subproblem_gap = exp_gap;
      if (*e_cc) exp.concurrent_cells = e_conc;
      if (*e_o) exp.out = e_out;
      const ExperimentReport rep = cmd_experiment(exp);
      write_table_v(rep.cells, std::cout);
      return rep.all_completed() ? 0 : 1;
    }
  } catch (const UsageError& err) {
    spdlog::error("{}", err.what());
    return 2;
  } catch (const std::exception& err) {
    spdlog::error("{}", err.what());
    return 1;
  }
  return 0;
}

}  // namespace sndh::cli
