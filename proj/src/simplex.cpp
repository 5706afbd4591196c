#include "simplex.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace sndh::detail {

namespace {

constexpr double kFeasTol = 1e-7;
constexpr double kOptTol = 1e-9;
constexpr double kDualFeasTol = 1e-7;
constexpr double kPivotTol = 1e-9;
constexpr std::size_t kRefactorInterval = 100;
constexpr int kStallThreshold = 50;
constexpr double kPerturbation = 1e-7;

}  // namespace

SimplexEngine::SimplexEngine(const LinearProgram& lp) : m_(lp.num_rows()), n_(lp.num_cols()) {
  const int total = n_ + m_;
  std::vector<int> count(static_cast<std::size_t>(n_) + 1, 0);
  for (const auto& e : lp.entries)
    if (e.value != 0.0) ++count[static_cast<std::size_t>(e.col) + 1];
  col_start_.assign(static_cast<std::size_t>(n_) + 1, 0);
  for (int j = 0; j < n_; ++j) col_start_[j + 1] = col_start_[j] + count[j + 1];
  row_index_.resize(static_cast<std::size_t>(col_start_[n_]));
  values_.resize(static_cast<std::size_t>(col_start_[n_]));
  std::vector<int> fill(col_start_.begin(), col_start_.end() - 1);
  for (const auto& e : lp.entries) {
    if (e.value == 0.0) continue;
    const int at = fill[static_cast<std::size_t>(e.col)]++;
    row_index_[at] = e.row;
    values_[at] = e.value;
  }

  cost_ = Eigen::VectorXd::Zero(total);
  lo_.resize(total);
  up_.resize(total);
  for (int j = 0; j < n_; ++j) {
    cost_(j) = lp.costs[j];
    lo_(j) = lp.var_lower[j];
    up_(j) = lp.var_upper[j];
  }
  for (int i = 0; i < m_; ++i) {
    const double b = lp.rhs[i];
    switch (lp.row_sense[i]) {
      case RowSense::kLessEqual: lo_(n_ + i) = -kInfinity; up_(n_ + i) = b; break;
      case RowSense::kGreaterEqual: lo_(n_ + i) = b; up_(n_ + i) = kInfinity; break;
      case RowSense::kEqual: lo_(n_ + i) = b; up_(n_ + i) = b; break;
    }
  }
  // row-wise copy for pivot rows
  row_start_.assign(static_cast<std::size_t>(m_) + 1, 0);
  for (int p = 0; p < col_start_[n_]; ++p) ++row_start_[static_cast<std::size_t>(row_index_[p]) + 1];
  for (int i = 0; i < m_; ++i) row_start_[i + 1] += row_start_[i];
  row_col_.resize(row_index_.size());
  row_val_.resize(row_index_.size());
  std::vector<int> next(row_start_.begin(), row_start_.end() - 1);
  for (int j = 0; j < n_; ++j)
    for (int p = col_start_[j]; p < col_start_[j + 1]; ++p) {
      const int at = next[static_cast<std::size_t>(row_index_[p])]++;
      row_col_[at] = j;
      row_val_[at] = values_[p];
    }

  x_ = Eigen::VectorXd::Zero(total);
  d_ = Eigen::VectorXd::Zero(total);
  row_alpha_ = Eigen::VectorXd::Zero(total);
  mark_.assign(static_cast<std::size_t>(total), 0);
  dse_ = Eigen::VectorXd::Ones(m_);
  cold_start();
}

void SimplexEngine::set_structural_bounds(int col, double lower, double upper) {
  lo_(col) = lower;
  up_(col) = upper;
}

void SimplexEngine::cold_start() {
  const int total = n_ + m_;
  status_.assign(static_cast<std::size_t>(total), VarStatus::kAtLower);
  position_.assign(static_cast<std::size_t>(total), -1);
  head_.resize(static_cast<std::size_t>(m_));
  for (int j = 0; j < n_; ++j) {
    if (std::isfinite(lo_(j)))
      status_[j] = VarStatus::kAtLower;
    else if (std::isfinite(up_(j)))
      status_[j] = VarStatus::kAtUpper;
    else
      status_[j] = VarStatus::kFree;
  }
  for (int i = 0; i < m_; ++i) {
    head_[i] = n_ + i;
    status_[n_ + i] = VarStatus::kBasic;
    position_[n_ + i] = i;
  }
  dse_.setOnes(m_);
  if (!refactor()) throw std::logic_error("simplex: slack basis is singular");
  place_nonbasic_at_bounds();
  compute_basic_values();
}

void SimplexEngine::load_basis(const Basis& basis) {
  status_ = basis.status;
  head_ = basis.head;
  position_.assign(status_.size(), -1);
  for (int i = 0; i < m_; ++i) position_[head_[i]] = i;
  if (basis.weights.size() == m_) dse_ = basis.weights;
  else dse_.setOnes(m_);
  if (!refactor()) {
    cold_start();
    return;
  }
  place_nonbasic_at_bounds();
  compute_basic_values();
}

Basis SimplexEngine::basis() const { return {status_, head_, dse_}; }

bool SimplexEngine::refactor() {
  etas_.clear();
  eta_nonzeros_ = 0;
  if (m_ == 0) return true;
  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(static_cast<std::size_t>(m_) * 4);
  for (int r = 0; r < m_; ++r) {
    const int j = head_[r];
    if (j >= n_) {
      triplets.emplace_back(j - n_, r, -1.0);
    } else {
      for (int p = col_start_[j]; p < col_start_[j + 1]; ++p)
        triplets.emplace_back(row_index_[p], r, values_[p]);
    }
  }
  Eigen::SparseMatrix<double> B(m_, m_);
  B.setFromTriplets(triplets.begin(), triplets.end());
  B.makeCompressed();
  lu_.compute(B);
  return lu_.info() == Eigen::Success;
}

void SimplexEngine::ftran(Eigen::VectorXd& v) const {
  if (m_ == 0) return;
  v = lu_.solve(v);
  for (const auto& eta : etas_) {
    const double vr = v(eta.row) / eta.pivot;
    v(eta.row) = vr;
    if (vr == 0.0) continue;
    for (std::size_t p = 0; p < eta.index.size(); ++p) v(eta.index[p]) -= eta.value[p] * vr;
  }
}

void SimplexEngine::btran(Eigen::VectorXd& v) const {
  if (m_ == 0) return;
  for (auto it = etas_.rbegin(); it != etas_.rend(); ++it) {
    double acc = v(it->row);
    for (std::size_t p = 0; p < it->index.size(); ++p) acc -= it->value[p] * v(it->index[p]);
    v(it->row) = acc / it->pivot;
  }
  v = lu_.transpose().solve(v);
}

void SimplexEngine::push_eta(int row, const Eigen::VectorXd& alpha) {
  Eta eta{row, alpha(row), {}, {}};
  for (int i = 0; i < m_; ++i) {
    if (i == row || std::abs(alpha(i)) < 1e-14) continue;
    eta.index.push_back(i);
    eta.value.push_back(alpha(i));
  }
  eta_nonzeros_ += eta.index.size();
  etas_.push_back(std::move(eta));
}

void SimplexEngine::column(int j, Eigen::VectorXd& out) const {
  out.setZero(m_);
  if (j >= n_) {
    out(j - n_) = -1.0;
    return;
  }
  for (int p = col_start_[j]; p < col_start_[j + 1]; ++p) out(row_index_[p]) = values_[p];
}

void SimplexEngine::add_column(int j, double scale, Eigen::VectorXd& out) const {
  if (j >= n_) {
    out(j - n_) -= scale;
    return;
  }
  for (int p = col_start_[j]; p < col_start_[j + 1]; ++p) out(row_index_[p]) += scale * values_[p];
}

double SimplexEngine::dot_column(int j, const Eigen::VectorXd& y) const {
  if (j >= n_) return -y(j - n_);
  double acc = 0.0;
  for (int p = col_start_[j]; p < col_start_[j + 1]; ++p) acc += values_[p] * y(row_index_[p]);
  return acc;
}

void SimplexEngine::place_nonbasic_at_bounds() {
  const int total = n_ + m_;
  for (int j = 0; j < total; ++j) {
    VarStatus& s = status_[j];
    if (s == VarStatus::kBasic) continue;
    const bool has_lo = std::isfinite(lo_(j));
    const bool has_up = std::isfinite(up_(j));
    if (s == VarStatus::kAtUpper && !has_up) s = has_lo ? VarStatus::kAtLower : VarStatus::kFree;
    if (s == VarStatus::kAtLower && !has_lo) s = has_up ? VarStatus::kAtUpper : VarStatus::kFree;
    if (s == VarStatus::kFree && has_lo) s = VarStatus::kAtLower;
    if (s == VarStatus::kFree && has_up) s = VarStatus::kAtUpper;
    switch (s) {
      case VarStatus::kAtLower: x_(j) = lo_(j); break;
      case VarStatus::kAtUpper: x_(j) = up_(j); break;
      default: x_(j) = 0.0; break;
    }
  }
}

void SimplexEngine::compute_basic_values() {
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(m_);
  const int total = n_ + m_;
  for (int j = 0; j < total; ++j) {
    if (status_[j] == VarStatus::kBasic || x_(j) == 0.0) continue;
    if (j >= n_) {
      rhs(j - n_) += x_(j);
    } else {
      for (int p = col_start_[j]; p < col_start_[j + 1]; ++p)
        rhs(row_index_[p]) -= values_[p] * x_(j);
    }
  }
  ftran(rhs);
  for (int i = 0; i < m_; ++i) x_(head_[i]) = rhs(i);
}

double SimplexEngine::primal_infeasibility() const {
  double worst = 0.0;
  for (int i = 0; i < m_; ++i) {
    const int j = head_[i];
    worst = std::max({worst, lo_(j) - x_(j), x_(j) - up_(j)});
  }
  return worst;
}

void SimplexEngine::pivot_row(const Eigen::VectorXd& rho) {
  if (++stamp_ == 0) {
    std::fill(mark_.begin(), mark_.end(), 0U);
    stamp_ = 1;
  }
  touched_.clear();
  for (int i = 0; i < m_; ++i) {
    const double v = rho(i);
    if (std::abs(v) < 1e-14) continue;
    const int logical = n_ + i;
    mark_[logical] = stamp_;
    row_alpha_(logical) = -v;
    touched_.push_back(logical);
    for (int p = row_start_[i]; p < row_start_[i + 1]; ++p) {
      const int j = row_col_[p];
      if (mark_[j] != stamp_) {
        mark_[j] = stamp_;
        row_alpha_(j) = 0.0;
        touched_.push_back(j);
      }
      row_alpha_(j) += v * row_val_[p];
    }
  }
}

void SimplexEngine::compute_reduced_costs(const Eigen::VectorXd& cost) {
  Eigen::VectorXd y(m_);
  for (int i = 0; i < m_; ++i) y(i) = cost(head_[i]);
  btran(y);
  const int total = n_ + m_;
  for (int j = 0; j < total; ++j)
    d_(j) = status_[j] == VarStatus::kBasic ? 0.0 : cost(j) - dot_column(j, y);
}

bool SimplexEngine::make_dual_feasible() {
  const int total = n_ + m_;
  bool moved = false;
  bool feasible = true;
  for (int j = 0; j < total; ++j) {
    if (lo_(j) == up_(j)) continue;
    switch (status_[j]) {
      case VarStatus::kAtLower:
        if (d_(j) >= -kDualFeasTol) break;
        if (!std::isfinite(up_(j))) {
          feasible = false;
          break;
        }
        status_[j] = VarStatus::kAtUpper;
        x_(j) = up_(j);
        moved = true;
        break;
      case VarStatus::kAtUpper:
        if (d_(j) <= kDualFeasTol) break;
        if (!std::isfinite(lo_(j))) {
          feasible = false;
          break;
        }
        status_[j] = VarStatus::kAtLower;
        x_(j) = lo_(j);
        moved = true;
        break;
      case VarStatus::kFree:
        feasible = feasible && std::abs(d_(j)) <= kDualFeasTol;
        break;
      default: break;
    }
  }
  if (moved) compute_basic_values();
  return feasible;
}

bool SimplexEngine::refresh() {
  const bool ok = refactor();
  if (!ok) cold_start();
  compute_basic_values();
  return ok;
}

void SimplexEngine::pivot(int row, int entering, const Eigen::VectorXd& alpha) {
  position_[head_[row]] = -1;
  head_[row] = entering;
  position_[entering] = row;
  status_[entering] = VarStatus::kBasic;
  push_eta(row, alpha);
}

bool SimplexEngine::refactor_due() const {
  return etas_.size() >= kRefactorInterval ||
         eta_nonzeros_ > static_cast<std::size_t>(20) * static_cast<std::size_t>(m_ + 1);
}

double SimplexEngine::objective() const { return cost_.head(n_).dot(x_.head(n_)); }

LpOutcome SimplexEngine::solve(long iteration_limit) {
  iteration_limit = iterations_ + iteration_limit;  // budget for this call only
  place_nonbasic_at_bounds();
  compute_basic_values();
  compute_reduced_costs(cost_);
  if (primal_infeasibility() > kFeasTol && make_dual_feasible()) {
    const DualResult r = dual(iteration_limit);
    if (r == DualResult::kInfeasible) return LpOutcome::kInfeasible;
    if (r == DualResult::kLimit) return LpOutcome::kIterationLimit;
  }
  const LpOutcome out = primal(iteration_limit);
  if (out == LpOutcome::kOptimal) compute_reduced_costs(cost_);
  return out;
}

SimplexEngine::DualResult SimplexEngine::dual(long iteration_limit) {
  const int total = n_ + m_;
  // Perturbing nonbasic costs away from zero keeps the ratio test from
  // stalling on the many zero-cost columns; primal() removes the effect.
  work_cost_ = cost_;
  for (int j = 0; j < total; ++j) {
    if (status_[j] == VarStatus::kBasic || lo_(j) == up_(j)) continue;
    const double u = static_cast<double>((static_cast<std::uint32_t>(j) * 2654435761U) >> 8) / 16777216.0;
    const double mag = kPerturbation * (1.0 + std::abs(cost_(j))) * (1.0 + u);
    if (status_[j] == VarStatus::kAtLower) work_cost_(j) += mag;
    else if (status_[j] == VarStatus::kAtUpper) work_cost_(j) -= mag;
  }
  compute_reduced_costs(work_cost_);

  struct Candidate {
    int j;
    double ratio;
    double abs_alpha;
  };
  std::vector<Candidate> cands;
  Eigen::VectorXd rho(m_);
  Eigen::VectorXd alpha(m_);
  Eigen::VectorXd tau(m_);
  Eigen::VectorXd shift(m_);
  bool verified = false;

  while (true) {
    if (iterations_ >= iteration_limit) return DualResult::kLimit;

    int r = -1;
    double best = 0.0;
    for (int i = 0; i < m_; ++i) {
      const int j = head_[i];
      double infeas = 0.0;
      if (x_(j) < lo_(j) - kFeasTol) infeas = lo_(j) - x_(j);
      else if (x_(j) > up_(j) + kFeasTol) infeas = x_(j) - up_(j);
      else continue;
      const double score = infeas * infeas / dse_(i);
      if (score > best) {
        best = score;
        r = i;
      }
    }
    if (r < 0) {
      if (!verified && !etas_.empty()) {
        verified = true;
        refresh();
        compute_reduced_costs(work_cost_);
        continue;
      }
      return DualResult::kOptimal;
    }

    const int p = head_[r];
    const bool to_lower = x_(p) < lo_(p);
    const double sigma = to_lower ? -1.0 : 1.0;
    rho.setZero();
    rho(r) = 1.0;
    btran(rho);
    pivot_row(rho);

    cands.clear();
    for (int j : touched_) {
      const VarStatus s = status_[j];
      if (s == VarStatus::kBasic || lo_(j) == up_(j)) continue;
      const double a = row_alpha_(j);
      if (std::abs(a) < kPivotTol) continue;
      const double sa = sigma * a;
      double ratio = 0.0;
      if (s == VarStatus::kAtLower) {
        if (sa <= 0.0) continue;
        ratio = std::max(d_(j), 0.0) / sa;
      } else if (s == VarStatus::kAtUpper) {
        if (sa >= 0.0) continue;
        ratio = std::min(d_(j), 0.0) / sa;
      } else {
        ratio = std::abs(d_(j)) / std::abs(a);
      }
      cands.push_back({j, ratio, std::abs(a)});
    }
    if (cands.empty()) {
      if (!verified && !etas_.empty()) {
        verified = true;
        refresh();
        compute_reduced_costs(work_cost_);
        continue;
      }
      return DualResult::kInfeasible;
    }
    std::sort(cands.begin(), cands.end(), [](const Candidate& a, const Candidate& b) {
      return a.ratio != b.ratio ? a.ratio < b.ratio : a.j < b.j;
    });

    // bound flipping: pass breakpoints of boxed columns while the dual
    // objective keeps improving
    double slope = to_lower ? lo_(p) - x_(p) : x_(p) - up_(p);
    std::size_t k = 0;
    for (; k + 1 < cands.size(); ++k) {
      const int j = cands[k].j;
      if (!boxed(j)) break;
      const double drop = cands[k].abs_alpha * (up_(j) - lo_(j));
      if (slope - drop <= 0.0) break;
      slope -= drop;
    }
    // Harris pass over the remaining breakpoints
    double harris = kInfinity;
    for (std::size_t c = k; c < cands.size(); ++c)
      harris = std::min(harris, cands[c].ratio + kDualFeasTol / cands[c].abs_alpha);
    std::size_t chosen = k;
    for (std::size_t c = k; c < cands.size() && cands[c].ratio <= harris; ++c)
      if (cands[c].abs_alpha > cands[chosen].abs_alpha) chosen = c;
    const int q = cands[chosen].j;

    column(q, alpha);
    ftran(alpha);
    const double pivot_value = alpha(r);
    if (std::abs(pivot_value) < kPivotTol ||
        std::abs(pivot_value - row_alpha_(q)) > 1e-7 * (1.0 + std::abs(pivot_value))) {
      if (!etas_.empty()) {
        refresh();
        compute_reduced_costs(work_cost_);
        continue;
      }
      return DualResult::kGiveUp;
    }
    verified = false;
    ++iterations_;

    // flipped columns move to their opposite bound
    if (k > 0) {
      shift.setZero();
      for (std::size_t c = 0; c < k; ++c) {
        const int j = cands[c].j;
        const bool at_lower = status_[j] == VarStatus::kAtLower;
        const double delta = at_lower ? up_(j) - lo_(j) : lo_(j) - up_(j);
        add_column(j, delta, shift);
        x_(j) = at_lower ? up_(j) : lo_(j);
        status_[j] = at_lower ? VarStatus::kAtUpper : VarStatus::kAtLower;
      }
      ftran(shift);
      for (int i = 0; i < m_; ++i) x_(head_[i]) -= shift(i);
    }

    const double theta_d = d_(q) / row_alpha_(q);
    for (int j : touched_)
      if (status_[j] != VarStatus::kBasic) d_(j) -= theta_d * row_alpha_(j);
    d_(p) = -theta_d;
    d_(q) = 0.0;

    // steepest-edge weights
    tau = rho;
    ftran(tau);
    const double beta_r = rho.squaredNorm();
    for (int i = 0; i < m_; ++i) {
      if (i == r || alpha(i) == 0.0) continue;
      const double ratio = alpha(i) / pivot_value;
      dse_(i) = std::max(dse_(i) + ratio * (ratio * beta_r - 2.0 * tau(i)), 1e-6);
    }
    dse_(r) = std::max(beta_r / (pivot_value * pivot_value), 1e-6);

    const double target = to_lower ? lo_(p) : up_(p);
    const double delta = (x_(p) - target) / pivot_value;
    x_(q) += delta;
    for (int i = 0; i < m_; ++i) x_(head_[i]) -= alpha(i) * delta;
    x_(p) = target;
    status_[p] = to_lower ? VarStatus::kAtLower : VarStatus::kAtUpper;
    pivot(r, q, alpha);
    if (refactor_due()) {
      if (!refresh()) return DualResult::kGiveUp;
      compute_reduced_costs(work_cost_);
    }
  }
}

LpOutcome SimplexEngine::primal(long iteration_limit) {
  const int total = n_ + m_;
  Eigen::VectorXd phase_cost(total);
  Eigen::VectorXd y(m_);
  Eigen::VectorXd alpha(m_);
  int degenerate_run = 0;
  bool verified = false;

  while (true) {
    if (iterations_ >= iteration_limit) return LpOutcome::kIterationLimit;

    // phase selection: minimise the sum of infeasibilities while any basic
    // variable is out of bounds
    bool phase_one = false;
    for (int i = 0; i < m_; ++i) {
      const int j = head_[i];
      if (x_(j) < lo_(j) - kFeasTol || x_(j) > up_(j) + kFeasTol) {
        phase_one = true;
        break;
      }
    }
    const Eigen::VectorXd* cost = &cost_;
    if (phase_one) {
      phase_cost.setZero();
      for (int i = 0; i < m_; ++i) {
        const int j = head_[i];
        if (x_(j) < lo_(j) - kFeasTol) phase_cost(j) = -1.0;
        else if (x_(j) > up_(j) + kFeasTol) phase_cost(j) = 1.0;
      }
      cost = &phase_cost;
    }

    for (int i = 0; i < m_; ++i) y(i) = (*cost)(head_[i]);
    btran(y);

    const bool bland = degenerate_run > kStallThreshold;
    int entering = -1;
    double best = 0.0;
    double entering_d = 0.0;
    for (int j = 0; j < total; ++j) {
      const VarStatus s = status_[j];
      if (s == VarStatus::kBasic || lo_(j) == up_(j)) continue;
      const double d = (*cost)(j) - dot_column(j, y);
      double score = 0.0;
      if (s == VarStatus::kAtLower && d < -kOptTol) score = -d;
      else if (s == VarStatus::kAtUpper && d > kOptTol) score = d;
      else if (s == VarStatus::kFree && std::abs(d) > kOptTol) score = std::abs(d);
      if (score <= 0.0) continue;
      if (bland) {
        entering = j;
        entering_d = d;
        break;
      }
      if (score > best) {
        best = score;
        entering = j;
        entering_d = d;
      }
    }

    if (entering < 0) {
      if (!verified && !etas_.empty()) {
        verified = true;
        if (!refactor()) cold_start();
        compute_basic_values();
        continue;
      }
      if (phase_one) return LpOutcome::kInfeasible;
      return LpOutcome::kOptimal;
    }
    verified = false;

    const double dir = entering_d < 0.0 ? 1.0 : -1.0;
    column(entering, alpha);
    ftran(alpha);

    // Harris two-pass ratio test; the change of basic i per unit step is
    // rate_i = -dir * alpha_i
    double theta_max = kInfinity;
    for (int i = 0; i < m_; ++i) {
      if (std::abs(alpha(i)) < kPivotTol) continue;
      const int j = head_[i];
      const double rate = -dir * alpha(i);
      double room = kInfinity;
      if (x_(j) < lo_(j) - kFeasTol) {
        if (rate > 0.0) room = (lo_(j) - x_(j) + kFeasTol) / rate;
      } else if (x_(j) > up_(j) + kFeasTol) {
        if (rate < 0.0) room = (x_(j) - up_(j) + kFeasTol) / -rate;
      } else if (rate < 0.0) {
        if (std::isfinite(lo_(j))) room = (x_(j) - lo_(j) + kFeasTol) / -rate;
      } else if (std::isfinite(up_(j))) {
        room = (up_(j) - x_(j) + kFeasTol) / rate;
      }
      theta_max = std::min(theta_max, room);
    }

    int leave_row = -1;
    double theta = kInfinity;
    double leave_bound = 0.0;
    VarStatus leave_status = VarStatus::kAtLower;
    double best_alpha = 0.0;
    if (std::isfinite(theta_max)) {
      for (int i = 0; i < m_; ++i) {
        if (std::abs(alpha(i)) < kPivotTol) continue;
        const int j = head_[i];
        const double rate = -dir * alpha(i);
        double step = kInfinity;
        double bound = 0.0;
        VarStatus status = VarStatus::kAtLower;
        if (x_(j) < lo_(j) - kFeasTol) {
          if (rate > 0.0) { step = (lo_(j) - x_(j)) / rate; bound = lo_(j); }
        } else if (x_(j) > up_(j) + kFeasTol) {
          if (rate < 0.0) { step = (x_(j) - up_(j)) / -rate; bound = up_(j); status = VarStatus::kAtUpper; }
        } else if (rate < 0.0) {
          if (std::isfinite(lo_(j))) { step = (x_(j) - lo_(j)) / -rate; bound = lo_(j); }
        } else if (std::isfinite(up_(j))) {
          step = (up_(j) - x_(j)) / rate;
          bound = up_(j);
          status = VarStatus::kAtUpper;
        }
        if (!(step <= theta_max)) continue;
        const bool better = bland ? (leave_row < 0 || step < theta - 1e-12 ||
                                     (step <= theta + 1e-12 && j < head_[leave_row]))
                                  : std::abs(alpha(i)) > best_alpha;
        if (better) {
          best_alpha = std::abs(alpha(i));
          leave_row = i;
          theta = std::max(step, 0.0);
          leave_bound = bound;
          leave_status = status;
        }
      }
    }

    // the entering variable may reach its own opposite bound first
    const double span = up_(entering) - lo_(entering);
    const bool flip = std::isfinite(span) && span <= theta;
    if (leave_row < 0 && !flip) {
      if (!etas_.empty()) {
        if (!refactor()) cold_start();
        compute_basic_values();
        continue;
      }
      if (phase_one) return LpOutcome::kInfeasible;
      return LpOutcome::kUnbounded;
    }

    ++iterations_;
    const double step = flip ? span : theta;
    degenerate_run = step * std::abs(entering_d) < 1e-12 ? degenerate_run + 1 : 0;
    if (step != 0.0) {
      x_(entering) += dir * step;
      for (int i = 0; i < m_; ++i) x_(head_[i]) -= dir * step * alpha(i);
    }
    if (flip) {
      status_[entering] = dir > 0 ? VarStatus::kAtUpper : VarStatus::kAtLower;
      x_(entering) = dir > 0 ? up_(entering) : lo_(entering);
      continue;
    }
    const int leaving = head_[leave_row];
    x_(leaving) = leave_bound;
    status_[leaving] = leave_status;
    pivot(leave_row, entering, alpha);
    if (refactor_due()) refresh();
  }
}

}  // namespace sndh::detail
