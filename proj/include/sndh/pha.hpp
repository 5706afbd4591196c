#pragma once

#include "sndh/bundling.hpp"
#include "sndh/formulation.hpp"
#include "sndh/network.hpp"
#include "sndh/scenarios.hpp"

#include <Eigen/Core>

#include <iosfwd>
#include <limits>
#include <stdexcept>
#include <vector>

namespace sndh {

struct PhaConfig {
  double penalty = 1.0;       // rho
  double tolerance = 1e-5;    // stop once the residual drops below this
  double max_seconds = 600.0;
  int max_iterations = 200;   // including the initial iteration
  double subproblem_gap = 0.05;
  // Branch-and-bound node cap per subproblem solve. Unlike the wall-clock
  // budget it keeps runs reproducible.
  long subproblem_node_limit = 1'000'000;
  // Continuous designs in [0, 1] with a tangent-cut proximal term.
  bool relax_design = false;
  int threads = 1;

  void validate() const;
};

/// One row of the iteration trace.
struct PhaIteration {
  int iteration = 0;
  double residual = 0.0;
  double seconds = 0.0;        // wall time spent in this iteration
  double objective_sum = 0.0;  // sum of subproblem objectives
  bool subproblems_limited = false;  // some subproblem stopped on a limit
};

/// Bundle copies are rows: per_bundle_design(b, a) is bundle b's value on arc a.
struct PhaState {
  int iteration = 0;
  Eigen::MatrixXd per_bundle_design;
  Eigen::VectorXd consensus;
  Eigen::MatrixXd duals;
  double residual = std::numeric_limits<double>::infinity();
  std::vector<PhaIteration> history;
};

struct PhaResult {
  Eigen::VectorXd design;
  double objective = 0.0;  // design cost plus expected outsourcing of `design`
  DesignEvaluation evaluation;
  int iterations = 0;
  bool converged = false;
  bool repaired = false;  // design came from rounding the consensus
  double seconds = 0.0;
  double penalty = 0.0;
  PhaState state;
};

/// x̄ = sum_b p_b x_b. Rows with zero probability contribute nothing.
template <typename DerivedX, typename DerivedP>
Eigen::Matrix<typename DerivedX::Scalar, Eigen::Dynamic, 1> aggregate(
    const Eigen::MatrixBase<DerivedX>& per_bundle_design, const Eigen::MatrixBase<DerivedP>& bundle_probs) {
  using Scalar = typename DerivedX::Scalar;
  if (per_bundle_design.rows() != bundle_probs.size())
    throw std::invalid_argument("aggregate: one probability per bundle required");
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> out =
      Eigen::Matrix<Scalar, Eigen::Dynamic, 1>::Zero(per_bundle_design.cols());
  // fixed bundle order keeps the sum bitwise reproducible
  for (Eigen::Index b = 0; b < per_bundle_design.rows(); ++b)
    out += bundle_probs(b) * per_bundle_design.row(b).transpose();
  return out;
}

/// w_b <- w_b + rho (x_b - x̄) for every bundle row.
template <typename DerivedW, typename DerivedX, typename DerivedC>
Eigen::Matrix<typename DerivedW::Scalar, Eigen::Dynamic, Eigen::Dynamic> dual_update(
    const Eigen::MatrixBase<DerivedW>& duals, const Eigen::MatrixBase<DerivedX>& per_bundle_design,
    const Eigen::MatrixBase<DerivedC>& consensus, typename DerivedW::Scalar rho) {
  if (duals.rows() != per_bundle_design.rows() || duals.cols() != per_bundle_design.cols() ||
      consensus.size() != duals.cols())
    throw std::invalid_argument("dual_update: dimension mismatch");
  return (duals + rho * (per_bundle_design.rowwise() - consensus.transpose())).eval();
}

/// Rounds to the nearest integer (0.5 goes down) and then restores vehicle
/// balance by opening cheapest closed-arc paths from surplus to deficit
/// nodes. Falls back to the all-zero design if a path cannot be found.
Eigen::VectorXd round_and_repair(const Instance& inst, const Eigen::VectorXd& consensus);

/// Progressive hedging over scenario bundles. Bundles with no scenarios or
/// zero probability are left out of the aggregation.
PhaResult pha_run(const Instance& inst, const ScenarioSet& scens, const BundleSet& bundles,
                  const PhaConfig& cfg);

struct SweepResult {
  std::vector<PhaResult> runs;  // one per distinct penalty, ascending
  std::size_t best = 0;
  const PhaResult& best_run() const { return runs.at(best); }
};

/// Runs pha_run once per distinct penalty in `grid` (cfg.penalty is
/// ignored). The best run has the lowest objective, then the fewest
/// iterations, then the smaller penalty.
SweepResult penalty_sweep(const Instance& inst, const ScenarioSet& scens, const BundleSet& bundles,
                          const std::vector<double>& grid, const PhaConfig& cfg);

/// CSV with columns iteration,residual,objective_sum,seconds,limited.
void write_trace_csv(const std::vector<PhaIteration>& history, std::ostream& out);

}  // namespace sndh
