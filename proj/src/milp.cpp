#include "sndh/milp.hpp"

#include "simplex.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <memory>
#include <ostream>
#include <queue>
#include <set>
#include <stdexcept>

namespace sndh {

namespace {

constexpr double kIntegralityTol = 1e-6;
constexpr double kPlungeFraction = 0.5;

long iteration_budget(const LinearProgram& lp) {
  return 50L * (lp.num_rows() + lp.num_cols()) + 10000;
}

}  // namespace

int LinearProgram::add_column(double cost, double lower, double upper, VarKind kind) {
  costs.push_back(cost);
  var_lower.push_back(lower);
  var_upper.push_back(upper);
  var_kind.push_back(kind);
  return num_cols() - 1;
}

int LinearProgram::add_row(RowSense sense, double rhs_value) {
  row_sense.push_back(sense);
  rhs.push_back(rhs_value);
  return num_rows() - 1;
}

void LinearProgram::relax_integrality() {
  std::fill(var_kind.begin(), var_kind.end(), VarKind::kContinuous);
}

double LinearProgram::objective_value(const Eigen::VectorXd& x) const {
  double total = 0.0;
  for (int j = 0; j < num_cols(); ++j) total += costs[j] * x(j);
  return total;
}

double LinearProgram::max_violation(const Eigen::VectorXd& x) const {
  Eigen::VectorXd activity = Eigen::VectorXd::Zero(num_rows());
  for (const auto& e : entries) activity(e.row) += e.value * x(e.col);
  double worst = 0.0;
  for (int i = 0; i < num_rows(); ++i) {
    switch (row_sense[i]) {
      case RowSense::kLessEqual: worst = std::max(worst, activity(i) - rhs[i]); break;
      case RowSense::kGreaterEqual: worst = std::max(worst, rhs[i] - activity(i)); break;
      case RowSense::kEqual: worst = std::max(worst, std::abs(activity(i) - rhs[i])); break;
    }
  }
  for (int j = 0; j < num_cols(); ++j)
    worst = std::max({worst, var_lower[j] - x(j), x(j) - var_upper[j]});
  return worst;
}

void LinearProgram::validate() const {
  const auto n = static_cast<std::size_t>(num_cols());
  if (var_lower.size() != n || var_upper.size() != n || var_kind.size() != n)
    throw std::invalid_argument("lp: column arrays disagree in length");
  if (row_sense.size() != rhs.size()) throw std::invalid_argument("lp: row arrays disagree");
  for (std::size_t j = 0; j < n; ++j) {
    if (!std::isfinite(costs[j])) throw std::invalid_argument("lp: non-finite cost");
    if (var_lower[j] > var_upper[j]) throw std::invalid_argument("lp: lower bound above upper");
    if (var_kind[j] == VarKind::kBinary && (var_lower[j] < 0.0 || var_upper[j] > 1.0))
      throw std::invalid_argument("lp: binary variable with bounds outside [0, 1]");
  }
  for (double b : rhs)
    if (!std::isfinite(b)) throw std::invalid_argument("lp: non-finite right-hand side");
  std::set<std::pair<int, int>> seen;
  for (const auto& e : entries) {
    if (e.row < 0 || e.row >= num_rows() || e.col < 0 || e.col >= num_cols())
      throw std::invalid_argument("lp: matrix index out of range");
    if (!std::isfinite(e.value)) throw std::invalid_argument("lp: non-finite coefficient");
    if (!seen.emplace(e.row, e.col).second)
      throw std::invalid_argument("lp: duplicate matrix entry");
  }
}

std::string to_string(SolveStatus status) {
  switch (status) {
    case SolveStatus::kOptimal: return "optimal";
    case SolveStatus::kInfeasible: return "infeasible";
    case SolveStatus::kUnbounded: return "unbounded";
    case SolveStatus::kGapReached: return "gap_reached";
    case SolveStatus::kLimitReached: return "limit_reached";
  }
  return "unknown";
}

Solution solve_lp(const LinearProgram& lp) {
  lp.validate();
  detail::SimplexEngine engine(lp);
  Solution out;
  auto outcome = engine.solve(iteration_budget(lp));
  if (outcome == detail::LpOutcome::kOptimal &&
      lp.max_violation(engine.structural_values()) > 1e-7) {
    // drifted; polish from a fresh factorisation
    engine.load_basis(engine.basis());
    outcome = engine.solve(2 * iteration_budget(lp));
  }
  out.simplex_iterations = engine.iterations();
  switch (outcome) {
    case detail::LpOutcome::kOptimal:
      out.status = SolveStatus::kOptimal;
      out.primal = engine.structural_values();
      out.objective = lp.objective_value(out.primal);
      out.best_bound = out.objective;
      out.gap = 0.0;
      break;
    case detail::LpOutcome::kInfeasible: out.status = SolveStatus::kInfeasible; break;
    case detail::LpOutcome::kUnbounded:
      out.status = SolveStatus::kUnbounded;
      out.objective = -kInfinity;
      break;
    case detail::LpOutcome::kIterationLimit: out.status = SolveStatus::kLimitReached; break;
  }
  return out;
}

namespace {

struct Node {
  std::vector<std::int8_t> fixing;  // per binary: -1 free, 0 or 1
  double bound = -kInfinity;
  long id = 0;
  std::shared_ptr<const detail::Basis> basis;
};

struct NodeOrder {
  bool operator()(const Node& a, const Node& b) const {
    if (a.bound != b.bound) return a.bound > b.bound;
    return a.id > b.id;
  }
};

}  // namespace

Solution solve_milp(const LinearProgram& lp, const MilpLimits& limits, const Eigen::VectorXd* start) {
  lp.validate();
  if (start && start->size() != lp.num_cols()) throw std::invalid_argument("milp: start has the wrong length");
  if (limits.rel_gap < 0.0) throw std::invalid_argument("milp: rel_gap must be nonnegative");
  const auto started = std::chrono::steady_clock::now();
  auto elapsed = [&] {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  };

  std::vector<int> binaries;
  for (int j = 0; j < lp.num_cols(); ++j)
    if (lp.var_kind[j] == VarKind::kBinary) binaries.push_back(j);
  const auto nb = binaries.size();

  detail::SimplexEngine engine(lp);
  const long budget = iteration_budget(lp);

  Solution out;
  double incumbent = kInfinity;
  Eigen::VectorXd incumbent_x;
  bool exhaustive = true;
  long next_id = 1;

  if (start) {
    detail::SimplexEngine probe(lp);
    for (int j : binaries) {
      const double v = std::clamp(std::round((*start)(j)), lp.var_lower[j], lp.var_upper[j]);
      probe.set_structural_bounds(j, v, v);
    }
    if (probe.solve(budget) == detail::LpOutcome::kOptimal) {
      incumbent_x = probe.structural_values();
      if (lp.max_violation(incumbent_x) <= 1e-6) incumbent = lp.objective_value(incumbent_x);
      else incumbent_x.resize(0);
    }
    out.simplex_iterations += probe.iterations();
  }

  std::priority_queue<Node, std::vector<Node>, NodeOrder> open;
  Node current{std::vector<std::int8_t>(nb, -1), -kInfinity, 0, nullptr};
  bool have_current = true;
  bool engine_holds_parent = false;  // engine basis equals current.basis

  auto improves = [&](double bound) {
    if (!std::isfinite(incumbent)) return true;
    return bound < incumbent - 1e-9 * std::max(1.0, std::abs(incumbent));
  };
  auto gap_of = [&](double bound) {
    return (incumbent - bound) / std::max(1e-10, std::abs(incumbent));
  };

  SolveStatus stop_status = SolveStatus::kOptimal;
  while (true) {
    if (!have_current) {
      while (!open.empty() && !improves(open.top().bound)) open.pop();
      if (open.empty()) break;
      if (std::isfinite(incumbent) && gap_of(open.top().bound) <= limits.rel_gap) {
        stop_status = SolveStatus::kGapReached;
        break;
      }
      current = open.top();
      open.pop();
      have_current = true;
      engine_holds_parent = false;
    }
    if (out.nodes_explored >= limits.node_limit || elapsed() > limits.time_limit) {
      stop_status = SolveStatus::kLimitReached;
      open.push(std::move(current));
      break;
    }
    have_current = false;
    if (limits.record_trace) {
      const double lb = open.empty() ? current.bound : std::min(current.bound, open.top().bound);
      out.trace.emplace_back(lb, incumbent);
    }
    if (!improves(current.bound)) continue;

    bool conflict = false;
    for (std::size_t b = 0; b < nb; ++b) {
      const int j = binaries[b];
      const std::int8_t f = current.fixing[b];
      const double lo = f < 0 ? lp.var_lower[j] : std::max(lp.var_lower[j], double(f));
      const double up = f < 0 ? lp.var_upper[j] : std::min(lp.var_upper[j], double(f));
      conflict = conflict || lo > up;
      engine.set_structural_bounds(j, lo, std::max(lo, up));
    }
    if (conflict) continue;
    if (current.basis && !engine_holds_parent) engine.load_basis(*current.basis);
    ++out.nodes_explored;
    const auto outcome = engine.solve(budget);
    if (outcome == detail::LpOutcome::kInfeasible) continue;
    if (outcome == detail::LpOutcome::kIterationLimit) {
      exhaustive = false;
      engine.cold_start();
      continue;
    }
    if (outcome == detail::LpOutcome::kUnbounded) {
      if (current.id == 0) {
        out.status = SolveStatus::kUnbounded;
        out.objective = -kInfinity;
        out.simplex_iterations += engine.iterations();
        return out;
      }
      continue;
    }

    const Eigen::VectorXd x = engine.structural_values();
    const double obj = engine.objective();
    if (!improves(obj)) continue;

    // Branch on the most fractional binary. Before the first incumbent the
    // dive follows the binary closest to 1 upwards instead, which reaches
    // integral points quickly on design problems.
    int branch = -1;
    double most = kIntegralityTol;
    int dive_pick = -1;
    double dive_value = -1.0;
    for (std::size_t b = 0; b < nb; ++b) {
      const double v = x(binaries[b]);
      const double frac = std::min(v - std::floor(v), std::ceil(v) - v);
      if (frac <= kIntegralityTol) continue;
      if (frac > most) {
        most = frac;
        branch = static_cast<int>(b);
      }
      if (v > dive_value) {
        dive_value = v;
        dive_pick = static_cast<int>(b);
      }
    }

    if (branch < 0) {
      Eigen::VectorXd snapped = x;
      for (int j : binaries) snapped(j) = std::round(snapped(j));
      const double value = lp.objective_value(snapped);
      if (value < incumbent) {
        incumbent = value;
        incumbent_x = std::move(snapped);
      }
      continue;
    }

    // reduced-cost fixing: a nonbasic binary whose reduced cost exceeds the
    // remaining gap cannot move in any improving completion
    std::vector<std::int8_t> fixing = current.fixing;
    if (std::isfinite(incumbent)) {
      const double slack = incumbent - obj;
      for (std::size_t b = 0; b < nb; ++b) {
        if (fixing[b] >= 0) continue;
        const int j = binaries[b];
        const double d = engine.reduced_cost(j);
        if (engine.status(j) == detail::VarStatus::kAtLower && d > slack) fixing[b] = 0;
        else if (engine.status(j) == detail::VarStatus::kAtUpper && -d > slack) fixing[b] = 1;
      }
    }

    const bool diving = !std::isfinite(incumbent);
    if (diving) branch = dive_pick;
    auto basis = std::make_shared<const detail::Basis>(engine.basis());
    Node down{fixing, obj, next_id++, basis};
    Node up{fixing, obj, next_id++, basis};
    down.fixing[branch] = 0;
    up.fixing[branch] = 1;
    const bool go_up = diving || x(binaries[branch]) >= 0.5;
    // keep plunging while this subtree still looks promising
    bool plunge = diving;
    if (!diving) {
      const double open_bound = open.empty() ? obj : std::min(obj, open.top().bound);
      plunge = obj <= open_bound + kPlungeFraction * (incumbent - open_bound);
    }
    if (plunge) {
      open.push(go_up ? std::move(down) : std::move(up));
      current = go_up ? std::move(up) : std::move(down);
      have_current = true;
      engine_holds_parent = true;
    } else {
      open.push(std::move(down));
      open.push(std::move(up));
    }
  }

  out.simplex_iterations += engine.iterations();
  if (!std::isfinite(incumbent)) {
    out.status = stop_status == SolveStatus::kLimitReached || !exhaustive
                     ? SolveStatus::kLimitReached
                     : SolveStatus::kInfeasible;
    return out;
  }
  out.primal = std::move(incumbent_x);
  out.objective = incumbent;
  double bound = incumbent;
  if (!open.empty()) {
    // remaining open nodes bound the optimum from below
    auto rest = open;
    while (!rest.empty()) {
      bound = std::min(bound, rest.top().bound);
      rest.pop();
    }
  }
  out.best_bound = bound;
  out.gap = std::max(0.0, gap_of(bound));
  if (stop_status == SolveStatus::kOptimal && !exhaustive) stop_status = SolveStatus::kLimitReached;
  out.status = stop_status == SolveStatus::kGapReached && out.gap <= 0.0 ? SolveStatus::kOptimal
                                                                         : stop_status;
  return out;
}

void write_lp_text(const LinearProgram& lp, std::ostream& out) {
  auto name = [](int j) { return "x" + std::to_string(j); };
  std::vector<std::vector<std::pair<int, double>>> rows(static_cast<std::size_t>(lp.num_rows()));
  for (const auto& e : lp.entries) rows[static_cast<std::size_t>(e.row)].emplace_back(e.col, e.value);

  auto term = [&](double coef, int j) {
    out << (coef < 0 ? " - " : " + ") << std::abs(coef) << ' ' << name(j);
  };
  out.precision(17);
  out << "\\ generated by sndh\nMinimize\n obj:";
  for (int j = 0; j < lp.num_cols(); ++j)
    if (lp.costs[j] != 0.0) term(lp.costs[j], j);
  out << "\nSubject To\n";
  for (int i = 0; i < lp.num_rows(); ++i) {
    auto& r = rows[static_cast<std::size_t>(i)];
    std::sort(r.begin(), r.end());
    out << " c" << i << ':';
    if (r.empty()) out << " 0 x0";
    for (const auto& [j, v] : r) term(v, j);
    switch (lp.row_sense[i]) {
      case RowSense::kLessEqual: out << " <= "; break;
      case RowSense::kGreaterEqual: out << " >= "; break;
      case RowSense::kEqual: out << " = "; break;
    }
    out << lp.rhs[i] << '\n';
  }
  out << "Bounds\n";
  for (int j = 0; j < lp.num_cols(); ++j) {
    if (lp.var_kind[j] == VarKind::kBinary) continue;
    const double lo = lp.var_lower[j];
    const double up = lp.var_upper[j];
    if (std::isinf(lo) && std::isinf(up)) out << ' ' << name(j) << " free\n";
    else if (std::isinf(up)) out << ' ' << name(j) << " >= " << lo << '\n';
    else if (std::isinf(lo)) out << " -inf <= " << name(j) << " <= " << up << '\n';
    else out << ' ' << lo << " <= " << name(j) << " <= " << up << '\n';
  }
  bool any_binary = false;
  for (int j = 0; j < lp.num_cols(); ++j) {
    if (lp.var_kind[j] != VarKind::kBinary) continue;
    if (!any_binary) out << "Binaries\n";
    any_binary = true;
    out << ' ' << name(j) << '\n';
  }
  out << "End\n";
}

}  // namespace sndh
