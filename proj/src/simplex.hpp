#pragma once

// Bounded revised simplex used by solve_lp and the branch-and-bound driver.
//
// Every row i gets a logical variable r_i = a_i x, so the working system is
// [A -I] (x, r) = 0 with bounds on all n + m variables. The basis is kept as
// a sparse LU factorisation plus a product-form eta file.
//
// A dual simplex (steepest-edge pricing, bound-flipping ratio test, cost
// perturbation) runs whenever the starting basis can be made dual feasible;
// a primal simplex with a composite phase 1 covers everything else and
// polishes the dual result.

#include "sndh/milp.hpp"

#include <Eigen/SparseCore>
#include <Eigen/SparseLU>

#include <cstdint>
#include <vector>

namespace sndh::detail {

enum class VarStatus : std::uint8_t { kBasic, kAtLower, kAtUpper, kFree };

struct Basis {
  std::vector<VarStatus> status;  // n + m entries
  std::vector<int> head;          // m basic variable indices
  Eigen::VectorXd weights;        // dual steepest-edge weights; may be empty
};

enum class LpOutcome { kOptimal, kInfeasible, kUnbounded, kIterationLimit };

class SimplexEngine {
 public:
  explicit SimplexEngine(const LinearProgram& lp);

  int num_rows() const { return m_; }
  int num_structurals() const { return n_; }

  void set_structural_bounds(int col, double lower, double upper);
  double structural_lower(int col) const { return lo_(col); }
  double structural_upper(int col) const { return up_(col); }

  /// Slack basis with structurals at a finite bound.
  void cold_start();
  /// Installs a previously extracted basis; falls back to cold_start if the
  /// basis matrix is singular.
  void load_basis(const Basis& basis);
  Basis basis() const;

  /// Runs at most `iteration_limit` further iterations.
  LpOutcome solve(long iteration_limit);

  Eigen::VectorXd structural_values() const { return x_.head(n_); }
  double objective() const;
  long iterations() const { return iterations_; }

  /// Reduced cost of structural `col` at the last optimal basis.
  double reduced_cost(int col) const { return d_(col); }
  VarStatus status(int col) const { return status_[static_cast<std::size_t>(col)]; }

 private:
  struct Eta {
    int row;
    double pivot;
    std::vector<int> index;
    std::vector<double> value;
  };

  // factorisation
  bool refactor();
  void ftran(Eigen::VectorXd& v) const;
  void btran(Eigen::VectorXd& v) const;
  void push_eta(int row, const Eigen::VectorXd& alpha);

  void column(int j, Eigen::VectorXd& out) const;  // dense a_j
  void add_column(int j, double scale, Eigen::VectorXd& out) const;
  double dot_column(int j, const Eigen::VectorXd& y) const;
  void pivot_row(const Eigen::VectorXd& rho);  // fills row_alpha_ on touched_

  bool boxed(int j) const { return std::isfinite(lo_(j)) && std::isfinite(up_(j)); }
  void place_nonbasic_at_bounds();
  void compute_basic_values();
  void compute_reduced_costs(const Eigen::VectorXd& cost);
  double primal_infeasibility() const;
  bool make_dual_feasible();  // flips boxed nonbasics; false if impossible

  enum class DualResult { kOptimal, kInfeasible, kLimit, kGiveUp };

  LpOutcome primal(long iteration_limit);
  DualResult dual(long iteration_limit);
  void pivot(int row, int entering, const Eigen::VectorXd& alpha);
  bool refactor_due() const;
  bool refresh();  // refactor and recompute primal values; false if it fell back to cold_start

  int m_ = 0;
  int n_ = 0;
  std::vector<int> col_start_;
  std::vector<int> row_index_;
  std::vector<double> values_;
  std::vector<int> row_start_;
  std::vector<int> row_col_;
  std::vector<double> row_val_;

  Eigen::VectorXd cost_;
  Eigen::VectorXd work_cost_;  // cost_ plus the dual perturbation
  Eigen::VectorXd lo_;
  Eigen::VectorXd up_;
  Eigen::VectorXd x_;
  Eigen::VectorXd d_;  // reduced costs
  std::vector<VarStatus> status_;
  std::vector<int> head_;
  std::vector<int> position_;  // row in basis, or -1
  Eigen::VectorXd dse_;        // dual steepest-edge weights per row

  Eigen::VectorXd row_alpha_;
  std::vector<int> touched_;
  std::vector<std::uint32_t> mark_;
  std::uint32_t stamp_ = 0;

  // mutable: SparseLU::transpose() is non-const
  mutable Eigen::SparseLU<Eigen::SparseMatrix<double>, Eigen::COLAMDOrdering<int>> lu_;
  std::vector<Eta> etas_;
  std::size_t eta_nonzeros_ = 0;
  long iterations_ = 0;
};

}  // namespace sndh::detail
