#include "sndh/formulation.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace sndh {

VariableIndex::VariableIndex(int num_arcs, int num_commodities, int num_slots)
    : num_arcs_(num_arcs),
      num_commodities_(num_commodities),
      num_slots_(num_slots),
      design_(static_cast<std::size_t>(num_arcs), -1),
      flow_(static_cast<std::size_t>(num_slots) * num_commodities * num_arcs, -1),
      outsource_(static_cast<std::size_t>(num_slots) * num_commodities, -1) {}

Eigen::VectorXd VariableIndex::design_values(const Eigen::VectorXd& primal) const {
  Eigen::VectorXd x(num_arcs_);
  for (int a = 0; a < num_arcs_; ++a) {
    const int col = design(a);
    if (col < 0) throw std::logic_error("model has no design columns");
    x(a) = primal(col);
  }
  return x;
}

namespace {

std::vector<std::vector<bool>> usable_arcs(const Instance& inst) {
  std::vector<std::vector<bool>> out;
  out.reserve(inst.commodities.size());
  for (std::size_t k = 0; k < inst.commodities.size(); ++k) {
    const auto& c = inst.commodities[k];
    auto mask = useful_arcs(inst, c);
    bool reaches = false;
    for (int i = 0; i < inst.num_terminals; ++i)
      reaches = reaches || mask[static_cast<std::size_t>(inst.arc_index(i, c.destination, c.deadline))];
    if (!reaches)
      throw std::domain_error("commodity " + std::to_string(k) +
                              " has no path inside its delivery window");
    out.push_back(std::move(mask));
  }
  return out;
}

// Flow, outsourcing and the per-slot rows. `demand` is the slot's demand
// vector and `outsource_cost` the objective coefficient of its Z columns.
// Capacity rows use the model's design columns, or the constant design
// `fixed_design` when one is given. `linking` adds y <= min(u, d_k) x per
// commodity and capacitated arc.
void add_slot(Model& model, const Instance& inst, const std::vector<std::vector<bool>>& usable,
              int slot, const Eigen::Ref<const Eigen::RowVectorXd>& demand, double outsource_cost,
              const Eigen::VectorXd* fixed_design, bool linking) {
  auto& lp = model.lp;
  auto& index = model.index;
  const int N = inst.num_terminals;
  const int T = inst.horizon;
  const int A = inst.num_arcs();
  const int K = inst.num_commodities();

  for (int k = 0; k < K; ++k) {
    const auto& c = inst.commodities[static_cast<std::size_t>(k)];
    const auto& mask = usable[static_cast<std::size_t>(k)];
    std::vector<int> node_row(static_cast<std::size_t>(N * T), -1);
    auto row_of = [&](int terminal, int period) {
      int& r = node_row[static_cast<std::size_t>(period * N + terminal)];
      if (r < 0) r = lp.add_row(RowSense::kEqual, 0.0);
      return r;
    };
    const int supply = row_of(c.origin, c.avail_period);
    const int sink = row_of(c.destination, c.deadline);
    lp.rhs[static_cast<std::size_t>(supply)] = demand(k);
    lp.rhs[static_cast<std::size_t>(sink)] = -demand(k);

    const int z = lp.add_column(outsource_cost, 0.0, kInfinity);
    index.set_outsource(slot, k, z);
    lp.add_entry(supply, z, 1.0);
    lp.add_entry(sink, z, -1.0);

    for (int a = 0; a < A; ++a) {
      if (!mask[static_cast<std::size_t>(a)]) continue;
      const int t = a / (N * N);
      const int i = (a / N) % N;
      const int j = a % N;
      // with a fixed design the linking rows reduce to column bounds
      const double upper = linking && fixed_design && i != j && demand(k) < inst.capacity
                               ? demand(k) * (*fixed_design)(a)
                               : kInfinity;
      const int y = lp.add_column(0.0, 0.0, upper);
      index.set_flow(slot, k, a, y);
      lp.add_entry(row_of(i, departure_time(t, T)), y, 1.0);  // leaves (i, t-)
      lp.add_entry(row_of(j, t), y, -1.0);                    // enters (j, t)
    }
  }

  for (int a = 0; a < A; ++a) {
    const int i = (a / N) % N;
    const int j = a % N;
    if (i == j) continue;  // holding arcs are uncapacitated
    int row = -1;
    for (int k = 0; k < K; ++k) {
      const int y = index.flow(slot, k, a);
      if (y < 0) continue;
      if (row < 0) {
        if (fixed_design) {
          row = lp.add_row(RowSense::kLessEqual, inst.capacity * (*fixed_design)(a));
        } else {
          row = lp.add_row(RowSense::kLessEqual, 0.0);
          lp.add_entry(row, index.design(a), -inst.capacity);
        }
      }
      lp.add_entry(row, y, 1.0);
      if (linking && !fixed_design && demand(k) < inst.capacity) {
        const int link = lp.add_row(RowSense::kLessEqual, 0.0);
        lp.add_entry(link, y, 1.0);
        lp.add_entry(link, index.design(a), -demand(k));
      }
    }
  }
}

// Vehicle balance: arrivals into (i, t) equal departures from (i, t).
void add_design_balance(Model& model, const Instance& inst) {
  const int N = inst.num_terminals;
  const int T = inst.horizon;
  for (int t = 0; t < T; ++t) {
    const int t_next = next_period(t, T);
    for (int i = 0; i < N; ++i) {
      const int row = model.lp.add_row(RowSense::kEqual, 0.0);
      for (int j = 0; j < N; ++j) {
        const int in = model.index.design(inst.arc_index(j, i, t));
        const int out = model.index.design(inst.arc_index(i, j, t_next));
        model.lp.add_entry(row, in, 1.0);
        model.lp.add_entry(row, out, -1.0);
      }
    }
  }
}

void check_demands(const Instance& inst, const ScenarioSet& scens) {
  if (scens.num_commodities() != inst.num_commodities())
    throw std::invalid_argument("scenario set and instance disagree on the commodity count");
}

}  // namespace

Model build_extensive_form(const Instance& inst, const ScenarioSet& scens, bool linking_rows) {
  inst.validate();
  scens.validate();
  check_demands(inst, scens);
  const auto usable = usable_arcs(inst);
  Model model;
  model.index = VariableIndex(inst.num_arcs(), inst.num_commodities(), scens.size());
  for (int a = 0; a < inst.num_arcs(); ++a) {
    const int N = inst.num_terminals;
    model.index.set_design(a, model.lp.add_binary(inst.arc_cost((a / N) % N, a % N)));
  }
  add_design_balance(model, inst);
  for (int s = 0; s < scens.size(); ++s)
    add_slot(model, inst, usable, s, scens.demand(s),
             inst.outsourcing_cost * scens.probabilities(s), nullptr, linking_rows);
  return model;
}

Model build_recourse_lp(const Instance& inst, const Eigen::VectorXd& design,
                        const Eigen::VectorXd& demand, bool linking_rows) {
  if (design.size() != inst.num_arcs() || demand.size() != inst.num_commodities())
    throw std::invalid_argument("recourse: design or demand has the wrong length");
  const auto usable = usable_arcs(inst);
  Model model;
  model.index = VariableIndex(inst.num_arcs(), inst.num_commodities(), 1);
  add_slot(model, inst, usable, 0, demand.transpose(), 1.0, &design, linking_rows);
  return model;
}

Model build_bundle_subproblem(const Instance& inst, const SubproblemSpec& spec,
                              const ScenarioSet& scens) {
  check_demands(inst, scens);
  const int A = inst.num_arcs();
  const int N = inst.num_terminals;
  if (spec.scenario_weight.size() != static_cast<Eigen::Index>(spec.scenarios.size()))
    throw std::invalid_argument("subproblem: one weight per scenario required");
  if (spec.duals.size() != 0 && spec.duals.size() != A)
    throw std::invalid_argument("subproblem: dual vector has the wrong length");
  if (spec.proximal) {
    if (!(spec.proximal->penalty > 0.0))
      throw std::invalid_argument("subproblem: penalty must be positive");
    const auto& xbar = spec.proximal->consensus;
    if (xbar.size() != A) throw std::invalid_argument("subproblem: consensus has the wrong length");
    if ((xbar.array() < -1e-12).any() || (xbar.array() > 1.0 + 1e-12).any())
      throw std::invalid_argument("subproblem: consensus must lie in [0, 1]");
  }
  if (spec.relax_design && spec.tangent_segments < 1)
    throw std::invalid_argument("subproblem: need at least one tangent segment");

  const auto usable = usable_arcs(inst);
  Model model;
  model.index = VariableIndex(A, inst.num_commodities(), static_cast<int>(spec.scenarios.size()));
  auto& lp = model.lp;
  for (int a = 0; a < A; ++a) {
    double cost = inst.arc_cost((a / N) % N, a % N) * spec.bundle_prob;
    if (spec.duals.size() != 0) cost += spec.duals(a);
    if (spec.proximal && !spec.relax_design)
      cost += spec.proximal->penalty * (0.5 - spec.proximal->consensus(a));
    model.index.set_design(a, spec.relax_design ? lp.add_column(cost, 0.0, 1.0) : lp.add_binary(cost));
  }
  if (spec.proximal && !spec.relax_design)
    model.objective_offset = 0.5 * spec.proximal->penalty * spec.proximal->consensus.squaredNorm();
  add_design_balance(model, inst);

  if (spec.proximal && spec.relax_design) {
    const double rho = spec.proximal->penalty;
    for (int a = 0; a < A; ++a) {
      const double xbar = spec.proximal->consensus(a);
      std::vector<double> points{xbar};
      for (int p = 0; p <= spec.tangent_segments; ++p)
        points.push_back(static_cast<double>(p) / spec.tangent_segments);
      // geometric refinement around the consensus, where the iterates settle
      for (double h = 1.0 / 32.0; h >= 1.0 / 1048576.0; h /= 2.0) {
        if (xbar - h >= 0.0) points.push_back(xbar - h);
        if (xbar + h <= 1.0) points.push_back(xbar + h);
      }
      std::sort(points.begin(), points.end());
      points.erase(std::unique(points.begin(), points.end()), points.end());
      // theta >= f(z) + f'(z)(x - z) with f(x) = rho/2 (x - xbar)^2
      const int theta = lp.add_column(1.0, 0.0, kInfinity);
      for (double z : points) {
        const double slope = rho * (z - xbar);
        const double value = 0.5 * rho * (z - xbar) * (z - xbar);
        const int row = lp.add_row(RowSense::kGreaterEqual, value - slope * z);
        lp.add_entry(row, theta, 1.0);
        if (slope != 0.0) lp.add_entry(row, model.index.design(a), -slope);
      }
    }
  }

  for (std::size_t l = 0; l < spec.scenarios.size(); ++l) {
    const int s = spec.scenarios[l];
    if (s < 0 || s >= scens.size()) throw std::invalid_argument("subproblem: unknown scenario");
    add_slot(model, inst, usable, static_cast<int>(l), scens.demand(s),
             inst.outsourcing_cost * spec.scenario_weight(static_cast<Eigen::Index>(l)), nullptr,
             spec.linking_rows);
  }
  return model;
}

bool design_is_balanced(const Instance& inst, const Eigen::VectorXd& design, double tol) {
  const int N = inst.num_terminals;
  const int T = inst.horizon;
  for (int t = 0; t < T; ++t)
    for (int i = 0; i < N; ++i) {
      double net = 0.0;
      for (int j = 0; j < N; ++j)
        net += design(inst.arc_index(j, i, t)) - design(inst.arc_index(i, j, next_period(t, T)));
      if (std::abs(net) > tol) return false;
    }
  return true;
}

DesignEvaluation evaluate_design(const Instance& inst, const ScenarioSet& scens,
                                 const Eigen::VectorXd& design, bool linking_rows) {
  check_demands(inst, scens);
  if (design.size() != inst.num_arcs()) throw std::invalid_argument("design has the wrong length");
  const int N = inst.num_terminals;
  DesignEvaluation out;
  for (int a = 0; a < inst.num_arcs(); ++a) out.design_cost += inst.arc_cost((a / N) % N, a % N) * design(a);
  out.outsourced_quantity.resize(scens.size());
  for (int s = 0; s < scens.size(); ++s) {
    const Model recourse = build_recourse_lp(inst, design, scens.demand(s).transpose(), linking_rows);
    const Solution sol = solve_lp(recourse.lp);
    if (sol.status != SolveStatus::kOptimal)
      throw std::runtime_error("recourse LP failed for scenario " + std::to_string(s) + ": " +
                               to_string(sol.status));
    out.outsourced_quantity(s) = sol.objective;
    out.expected_outsourcing += inst.outsourcing_cost * scens.probabilities(s) * sol.objective;
  }
  return out;
}

}  // namespace sndh
