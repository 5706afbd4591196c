#include "sndh/pha.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <functional>
#include <optional>
#include <ostream>
#include <queue>
#include <thread>

namespace sndh {

void PhaConfig::validate() const {
  if (!(penalty > 0.0)) throw std::invalid_argument("pha: penalty must be positive");
  if (!(tolerance > 0.0)) throw std::invalid_argument("pha: tolerance must be positive");
  if (!(max_seconds > 0.0)) throw std::invalid_argument("pha: max_seconds must be positive");
  if (max_iterations < 1) throw std::invalid_argument("pha: max_iterations must be at least 1");
  if (!(subproblem_gap >= 0.0)) throw std::invalid_argument("pha: subproblem_gap must be nonnegative");
  if (subproblem_node_limit < 1) throw std::invalid_argument("pha: subproblem_node_limit must be positive");
  if (threads < 1) throw std::invalid_argument("pha: threads must be at least 1");
}

Eigen::VectorXd round_and_repair(const Instance& inst, const Eigen::VectorXd& consensus) {
  const int N = inst.num_terminals;
  const int T = inst.horizon;
  if (consensus.size() != inst.num_arcs()) throw std::invalid_argument("repair: wrong design length");
  Eigen::VectorXd x = (consensus.array() > 0.5).cast<double>().matrix();

  // excess(i, t) = arrivals into (i, t) - departures from (i, t)
  auto node = [N](int i, int t) { return t * N + i; };
  std::vector<int> excess(static_cast<std::size_t>(N * T), 0);
  for (int t = 0; t < T; ++t)
    for (int i = 0; i < N; ++i)
      for (int j = 0; j < N; ++j) {
        if (x(inst.arc_index(i, j, t)) < 0.5) continue;
        ++excess[static_cast<std::size_t>(node(j, t))];
        --excess[static_cast<std::size_t>(node(i, departure_time(t, T)))];
      }

  using Item = std::pair<double, int>;
  for (int src = 0; src < N * T; ++src) {
    while (excess[static_cast<std::size_t>(src)] > 0) {
      // cheapest path over closed arcs to any deficit node
      std::vector<double> dist(static_cast<std::size_t>(N * T), kInfinity);
      std::vector<int> via(static_cast<std::size_t>(N * T), -1);  // arc used to enter
      std::priority_queue<Item, std::vector<Item>, std::greater<>> heap;
      dist[static_cast<std::size_t>(src)] = 0.0;
      heap.emplace(0.0, src);
      int target = -1;
      while (!heap.empty()) {
        const auto [du, u] = heap.top();
        heap.pop();
        if (du > dist[static_cast<std::size_t>(u)]) continue;
        if (u != src && excess[static_cast<std::size_t>(u)] < 0) {
          target = u;
          break;
        }
        const int i = u % N;
        const int t_next = next_period(u / N, T);
        for (int j = 0; j < N; ++j) {
          const int a = inst.arc_index(i, j, t_next);
          if (x(a) > 0.5) continue;
          const int v = node(j, t_next);
          const double dv = du + inst.arc_cost(i, j);
          if (dv < dist[static_cast<std::size_t>(v)]) {
            dist[static_cast<std::size_t>(v)] = dv;
            via[static_cast<std::size_t>(v)] = a;
            heap.emplace(dv, v);
          }
        }
      }
      if (target < 0) {
        spdlog::warn("design repair found no rebalancing path; using the empty design");
        return Eigen::VectorXd::Zero(inst.num_arcs());
      }
      for (int v = target; v != src;) {
        const int a = via[static_cast<std::size_t>(v)];
        x(a) = 1.0;
        const int t = a / (N * N);
        v = node((a / N) % N, departure_time(t, T));
      }
      --excess[static_cast<std::size_t>(src)];
      ++excess[static_cast<std::size_t>(target)];
    }
  }
  return x;
}

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct SubResult {
  Eigen::VectorXd design;
  double objective = 0.0;
  bool limited = false;
};

SubResult solve_bundle(const Instance& inst, const ScenarioSet& scens, const BundleSet& bundles, int b,
                       const PhaConfig& cfg, const Eigen::VectorXd* duals,
                       const std::optional<Proximal>& proximal, const Eigen::VectorXd* previous,
                       double seconds_left) {
  const auto& members = bundles.bundles[static_cast<std::size_t>(b)];
  SubproblemSpec spec;
  spec.scenarios = members;
  spec.scenario_weight.resize(static_cast<Eigen::Index>(members.size()));
  for (std::size_t l = 0; l < members.size(); ++l)
    spec.scenario_weight(static_cast<Eigen::Index>(l)) = bundles.reweighted_prob(members[l]);
  spec.bundle_prob = bundles.bundle_prob(b);
  if (duals) spec.duals = *duals;
  spec.proximal = proximal;
  spec.relax_design = cfg.relax_design;
  const Model model = build_bundle_subproblem(inst, spec, scens);

  Solution sol;
  if (cfg.relax_design) {
    sol = solve_lp(model.lp);
  } else {
    MilpLimits limits;
    limits.rel_gap = cfg.subproblem_gap;
    limits.node_limit = cfg.subproblem_node_limit;
    limits.time_limit = std::max(seconds_left, 0.0);
    // the previous copy (or the empty design, which outsources everything)
    // is always feasible and seeds the incumbent
    Eigen::VectorXd start = Eigen::VectorXd::Zero(model.lp.num_cols());
    if (previous)
      for (int a = 0; a < inst.num_arcs(); ++a) start(model.index.design(a)) = (*previous)(a);
    sol = solve_milp(model.lp, limits, &start);
  }
  if (!sol.has_primal())
    throw std::runtime_error("internal model error: bundle " + std::to_string(b) + " subproblem is " +
                             to_string(sol.status));
  SubResult out;
  out.design = model.index.design_values(sol.primal);
  out.design = cfg.relax_design ? out.design.cwiseMax(0.0).cwiseMin(1.0).eval()
                                : (out.design.array().round() + 0.0).matrix().eval();
  out.objective = sol.objective + model.objective_offset;
  out.limited = sol.status == SolveStatus::kLimitReached;
  return out;
}

}  // namespace

PhaResult pha_run(const Instance& inst, const ScenarioSet& scens, const BundleSet& bundles,
                  const PhaConfig& cfg) {
  cfg.validate();
  bundles.validate();
  if (bundles.num_scenarios() != scens.size())
    throw std::invalid_argument("pha: bundle set and scenario set disagree on the scenario count");
  const auto t0 = Clock::now();
  const int g = bundles.num_bundles();
  const int A = inst.num_arcs();

  std::vector<int> active;
  for (int b = 0; b < g; ++b)
    if (!bundles.bundles[static_cast<std::size_t>(b)].empty() && bundles.bundle_prob(b) > 0.0)
      active.push_back(b);

  PhaResult result;
  result.penalty = cfg.penalty;
  PhaState& state = result.state;
  state.per_bundle_design = Eigen::MatrixXd::Zero(g, A);
  state.duals = Eigen::MatrixXd::Zero(g, A);
  state.consensus = Eigen::VectorXd::Zero(A);
  Eigen::VectorXd probs = Eigen::VectorXd::Zero(g);
  for (int b : active) probs(b) = bundles.bundle_prob(b);

  for (int r = 0; r < cfg.max_iterations; ++r) {
    const auto it0 = Clock::now();
    std::optional<Proximal> prox;
    if (r > 0) prox = Proximal{state.consensus, cfg.penalty};

    std::vector<SubResult> results(active.size());
    std::vector<std::exception_ptr> errors(active.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
      for (std::size_t k = next++; k < active.size(); k = next++) {
        const int b = active[k];
        try {
          const Eigen::VectorXd w = state.duals.row(b).transpose();
          const Eigen::VectorXd prev = state.per_bundle_design.row(b).transpose();
          results[k] = solve_bundle(inst, scens, bundles, b, cfg, r > 0 ? &w : nullptr, prox,
                                    r > 0 ? &prev : nullptr, cfg.max_seconds - seconds_since(t0));
        } catch (...) {
          errors[k] = std::current_exception();
        }
      }
    };
    const int workers = std::min<int>(cfg.threads, static_cast<int>(active.size()));
    if (workers <= 1) {
      worker();
    } else {
      std::vector<std::thread> pool;
      for (int i = 0; i < workers; ++i) pool.emplace_back(worker);
      for (auto& th : pool) th.join();
    }
    for (auto& e : errors)
      if (e) std::rethrow_exception(e);

    PhaIteration rec;
    rec.iteration = r;
    for (std::size_t k = 0; k < active.size(); ++k) {
      state.per_bundle_design.row(active[k]) = results[k].design.transpose();
      rec.objective_sum += results[k].objective;
      rec.subproblems_limited = rec.subproblems_limited || results[k].limited;
    }
    state.consensus = aggregate(state.per_bundle_design, probs);
    double residual = 0.0;
    for (int b : active)
      residual = std::max(residual, (state.per_bundle_design.row(b) - state.consensus.transpose())
                                        .cwiseAbs()
                                        .maxCoeff());
    state.residual = residual;
    const Eigen::MatrixXd updated = dual_update(state.duals, state.per_bundle_design, state.consensus, cfg.penalty);
    for (int b : active) state.duals.row(b) = updated.row(b);
    state.iteration = r;
    rec.residual = residual;
    rec.seconds = seconds_since(it0);
    state.history.push_back(rec);
    spdlog::debug("pha rho={} iteration {} residual {:.3g} objective sum {:.6g} ({:.2f}s)", cfg.penalty, r,
                  residual, rec.objective_sum, rec.seconds);

    if (residual < cfg.tolerance) {
      result.converged = true;
      break;
    }
    if (seconds_since(t0) >= cfg.max_seconds) break;
  }

  result.iterations = static_cast<int>(state.history.size());
  if (cfg.relax_design) {
    result.design = state.consensus;
  } else if (result.converged) {
    result.design = state.consensus.array().round().matrix();
  } else {
    result.design = round_and_repair(inst, state.consensus);
    result.repaired = true;
  }
  result.evaluation = evaluate_design(inst, scens, result.design);
  result.objective = result.evaluation.total();
  result.seconds = seconds_since(t0);
  spdlog::info("pha rho={}: {} after {} iterations, objective {:.6g}, {:.1f}s", cfg.penalty,
               result.converged ? "converged" : "stopped", result.iterations, result.objective, result.seconds);
  return result;
}

SweepResult penalty_sweep(const Instance& inst, const ScenarioSet& scens, const BundleSet& bundles,
                          const std::vector<double>& grid, const PhaConfig& cfg) {
  if (grid.empty()) throw std::invalid_argument("penalty_sweep: empty grid");
  std::vector<double> penalties = grid;
  std::sort(penalties.begin(), penalties.end());
  penalties.erase(std::unique(penalties.begin(), penalties.end()), penalties.end());

  SweepResult out;
  for (double rho : penalties) {
    PhaConfig run_cfg = cfg;
    run_cfg.penalty = rho;
    out.runs.push_back(pha_run(inst, scens, bundles, run_cfg));
  }
  for (std::size_t i = 1; i < out.runs.size(); ++i) {
    const auto& a = out.runs[i];
    const auto& best = out.runs[out.best];
    const double tie = 1e-9 * std::max(1.0, std::abs(best.objective));
    // penalties ascend, so ties on both keys keep the earlier (smaller) one
    if (a.objective < best.objective - tie ||
        (a.objective <= best.objective + tie && a.iterations < best.iterations))
      out.best = i;
  }
  return out;
}

void write_trace_csv(const std::vector<PhaIteration>& history, std::ostream& out) {
  out << "iteration,residual,objective_sum,seconds,limited\n";
  const auto old = out.precision(17);
  for (const auto& h : history)
    out << h.iteration << ',' << h.residual << ',' << h.objective_sum << ',' << h.seconds << ','
        << (h.subproblems_limited ? 1 : 0) << '\n';
  out.precision(old);
}

}  // namespace sndh
