#pragma once

#include <Eigen/Core>

#include <iosfwd>
#include <limits>
#include <string>
#include <utility>
#include <vector>

namespace sndh {

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

enum class RowSense { kLessEqual, kEqual, kGreaterEqual };
enum class VarKind { kContinuous, kBinary };

/// min c'x  s.t.  rows(A x) {<=,=,>=} rhs,  lower <= x <= upper.
///
/// Coefficients are kept as (row, col, value) entries; `validate` rejects
/// duplicates and out-of-range indices.
struct LinearProgram {
  struct Entry {
    int row;
    int col;
    double value;
  };

  std::vector<double> costs;
  std::vector<Entry> entries;
  std::vector<RowSense> row_sense;
  std::vector<double> rhs;
  std::vector<double> var_lower;
  std::vector<double> var_upper;
  std::vector<VarKind> var_kind;

  int num_rows() const { return static_cast<int>(rhs.size()); }
  int num_cols() const { return static_cast<int>(costs.size()); }

  int add_column(double cost, double lower, double upper, VarKind kind = VarKind::kContinuous);
  int add_binary(double cost) { return add_column(cost, 0.0, 1.0, VarKind::kBinary); }
  int add_row(RowSense sense, double rhs_value);
  void add_entry(int row, int col, double value) { entries.push_back({row, col, value}); }

  /// Relaxes every binary to a continuous variable on [0, 1].
  void relax_integrality();

  double objective_value(const Eigen::VectorXd& x) const;

  /// Largest violation of any row or bound at `x`.
  double max_violation(const Eigen::VectorXd& x) const;

  /// Throws std::invalid_argument on malformed data.
  void validate() const;
};

enum class SolveStatus { kOptimal, kInfeasible, kUnbounded, kGapReached, kLimitReached };

std::string to_string(SolveStatus status);

struct Solution {
  SolveStatus status = SolveStatus::kInfeasible;
  Eigen::VectorXd primal;
  double objective = kInfinity;
  double best_bound = -kInfinity;
  double gap = kInfinity;
  long nodes_explored = 0;
  long simplex_iterations = 0;
  // (global lower bound, incumbent) per node, filled when MilpLimits::record_trace
  std::vector<std::pair<double, double>> trace;

  bool has_primal() const { return primal.size() > 0; }
};

/// Two-phase bounded primal simplex on the continuous relaxation (binary
/// kinds are ignored). Infeasibility and unboundedness are reported in
/// `status`.
Solution solve_lp(const LinearProgram& lp);

struct MilpLimits {
  double rel_gap = 0.0;
  long node_limit = 1'000'000;
  double time_limit = kInfinity;  // seconds
  bool record_trace = false;
};

/// Best-first branch and bound over the binary variables, diving depth-first
/// until the first incumbent. Stops once
/// (incumbent - bound) / max(1e-10, |incumbent|) <= rel_gap.
///
/// `start`, when given, supplies binary values of a candidate solution (other
/// entries are ignored). The continuous part is completed by an LP with the
/// binaries fixed; a feasible completion becomes the first incumbent.
Solution solve_milp(const LinearProgram& lp, const MilpLimits& limits,
                    const Eigen::VectorXd* start = nullptr);

/// CPLEX LP text dump for cross-checking with external tools.
void write_lp_text(const LinearProgram& lp, std::ostream& out);

}  // namespace sndh
