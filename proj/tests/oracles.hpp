#pragma once

// Independent reference solvers used only by tests. None of these call into
// the simplex engine or the branch-and-bound driver.

#include "sndh/milp.hpp"
#include "sndh/network.hpp"
#include "sndh/random.hpp"

#include <cstdint>
#include <optional>
#include <vector>

namespace sndh::oracle {

/// Minimum of a pure binary program by trying all 2^n assignments, or
/// nullopt when no assignment is feasible.
std::optional<double> enumerate_binary(const LinearProgram& lp, double tol = 1e-9);

/// Minimum over all basic feasible solutions (vertices) of a bounded LP,
/// found by solving every full-rank subsystem of active constraints.
std::optional<double> enumerate_vertices(const LinearProgram& lp, double tol = 1e-9);

/// Random feasible, bounded LP with at most `max_vars` variables. Mixes
/// <=, >= and = rows and both bounded and half-bounded columns.
LinearProgram random_lp(std::uint64_t seed, int max_vars = 8, int max_rows = 6);

/// Random pure binary program with at most `max_vars` binaries and
/// `max_rows` rows; may be infeasible.
LinearProgram random_binary_program(std::uint64_t seed, int max_vars = 12, int max_rows = 20);

struct FlowEdge {
  int from;
  int to;
  double capacity;
};

/// Maximum s-t flow by breadth-first augmenting paths (Edmonds-Karp).
double max_flow(int num_nodes, const std::vector<FlowEdge>& edges, int source, int sink);

/// Random design satisfying vehicle balance: a union of up to three random
/// vehicle cycles, redrawn until no arc is used twice.
Eigen::VectorXd random_balanced_design(const Instance& inst, RandomStream& rng);

}  // namespace sndh::oracle
