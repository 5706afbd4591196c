#pragma once

#include "sndh/milp.hpp"
#include "sndh/network.hpp"
#include "sndh/scenarios.hpp"

#include <Eigen/Core>

#include <optional>
#include <vector>

namespace sndh {

/// Column layout of a model built over a list of scenarios.
///
/// Scenario slots are local to the model: slot `l` is the l-th scenario the
/// builder was given. Flow columns exist only for (commodity, arc) pairs that
/// can carry flow of that commodity; every other lookup returns -1.
class VariableIndex {
 public:
  VariableIndex() = default;
  VariableIndex(int num_arcs, int num_commodities, int num_slots);

  int num_arcs() const { return num_arcs_; }
  int num_commodities() const { return num_commodities_; }
  int num_slots() const { return num_slots_; }

  int design(int arc) const { return design_[static_cast<std::size_t>(arc)]; }
  int flow(int slot, int k, int arc) const {
    return flow_[static_cast<std::size_t>((slot * num_commodities_ + k) * num_arcs_ + arc)];
  }
  int outsource(int slot, int k) const {
    return outsource_[static_cast<std::size_t>(slot * num_commodities_ + k)];
  }

  void set_design(int arc, int col) { design_[static_cast<std::size_t>(arc)] = col; }
  void set_flow(int slot, int k, int arc, int col) {
    flow_[static_cast<std::size_t>((slot * num_commodities_ + k) * num_arcs_ + arc)] = col;
  }
  void set_outsource(int slot, int k, int col) {
    outsource_[static_cast<std::size_t>(slot * num_commodities_ + k)] = col;
  }

  /// Extracts the design part of a primal vector, ordered by arc index.
  Eigen::VectorXd design_values(const Eigen::VectorXd& primal) const;

 private:
  int num_arcs_ = 0;
  int num_commodities_ = 0;
  int num_slots_ = 0;
  std::vector<int> design_;
  std::vector<int> flow_;
  std::vector<int> outsource_;
};

struct Model {
  LinearProgram lp;
  VariableIndex index;
  double objective_offset = 0.0;  // add to lp objective for the model's value
};

/// Deterministic equivalent over every scenario: fixed design cost plus
/// expected outsourcing cost, subject to vehicle balance, arc capacity and
/// per-scenario flow conservation.
///
/// With `linking_rows`, every commodity whose demand is below the vehicle
/// capacity also gets y_ka <= d_k x_a on each capacitated arc. The rows cut
/// off fractional designs only, so the integer optimum is unchanged, but the
/// LP bound is much tighter.
Model build_extensive_form(const Instance& inst, const ScenarioSet& scens, bool linking_rows = true);

/// Recourse problem for one demand vector with the design fixed. The
/// objective is the total outsourced quantity (unscaled by the outsourcing
/// cost). Design columns are absent. `linking_rows` bounds each commodity's
/// flow by d_k x_a, which matters only for fractional designs.
Model build_recourse_lp(const Instance& inst, const Eigen::VectorXd& design,
                        const Eigen::VectorXd& demand, bool linking_rows = true);

/// Proximal pull toward a consensus design.
struct Proximal {
  Eigen::VectorXd consensus;  // one entry per arc, in [0, 1]
  double penalty = 1.0;       // rho > 0
};

/// Data for one bundle subproblem.
struct SubproblemSpec {
  std::vector<int> scenarios;       // indices into the scenario set
  Eigen::VectorXd scenario_weight;  // q_s, aligned with `scenarios`
  double bundle_prob = 1.0;         // p_b
  Eigen::VectorXd duals;            // w, one per arc; empty means zero
  std::optional<Proximal> proximal;
  // Continuous designs in [0, 1]. The squared proximal term is then
  // represented by tangent cuts instead of the exact binary identity, taken
  // at a uniform grid of `tangent_segments` steps, at the consensus, and at
  // consensus +- 2^-k for k = 5..20.
  bool relax_design = false;
  int tangent_segments = 16;
  bool linking_rows = true;  // see build_extensive_form
};

/// Bundle subproblem: p_b-scaled design cost, q_s-weighted outsourcing cost,
/// dual prices on the design copies and, when given, the squared proximal
/// term. With binary designs the square is exact through x^2 = x; its
/// constant part is stored in Model::objective_offset.
Model build_bundle_subproblem(const Instance& inst, const SubproblemSpec& spec,
                              const ScenarioSet& scens);

/// True when the design satisfies vehicle balance at every space-time node.
bool design_is_balanced(const Instance& inst, const Eigen::VectorXd& design, double tol = 1e-9);

struct DesignEvaluation {
  double design_cost = 0.0;
  double expected_outsourcing = 0.0;     // lambda * sum_s p_s Q(x, d^s)
  Eigen::VectorXd outsourced_quantity;  // Q(x, d^s) per scenario
  double total() const { return design_cost + expected_outsourcing; }
};

/// Exact first-stage objective of a fixed design, one recourse LP per
/// scenario.
DesignEvaluation evaluate_design(const Instance& inst, const ScenarioSet& scens,
                                 const Eigen::VectorXd& design, bool linking_rows = true);

}  // namespace sndh
