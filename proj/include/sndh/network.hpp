#pragma once

#include <Eigen/Core>

#include <cstddef>
#include <cstdint>
#include <vector>

namespace sndh {

using Period = int;
using TerminalId = int;

/// A shipment request: available at (origin, avail_period), due at
/// (destination, deadline). Demand quantities live in the scenario set.
struct Commodity {
  TerminalId origin = 0;
  Period avail_period = 0;
  TerminalId destination = 0;
  Period deadline = 0;

  bool operator==(const Commodity&) const = default;
};

/// LTL carrier instance on a cyclic horizon of `horizon` periods.
///
/// `arc_cost(i, j)` is the fixed cost of opening the movement i -> j in one
/// period; the diagonal holds the cost of keeping a vehicle at a terminal.
/// `capacity` bounds the flow on every non-holding arc.
struct Instance {
  int num_terminals = 0;
  int horizon = 0;
  double capacity = 0.0;
  double outsourcing_cost = 0.0;
  Eigen::MatrixXd arc_cost;
  std::vector<Commodity> commodities;

  int num_commodities() const { return static_cast<int>(commodities.size()); }

  /// Number of design arcs (one per ordered terminal pair and period).
  int num_arcs() const { return num_terminals * num_terminals * horizon; }

  /// Dense index of arc (i, j, t): ((t * N) + i) * N + j.
  int arc_index(TerminalId from, TerminalId to, Period arrival) const {
    return (arrival * num_terminals + from) * num_terminals + to;
  }

  /// Throws std::invalid_argument describing the first violated invariant.
  void validate() const;
};

/// Movement (or holding) from (from_terminal, departure) to
/// (to_terminal, arrival).
struct SpaceTimeArc {
  TerminalId from_terminal = 0;
  TerminalId to_terminal = 0;
  Period arrival = 0;
  Period departure = 0;
  bool is_holding = false;
};

/// Cyclic predecessor of `t`: t - 1 for t >= 1, otherwise horizon - 1.
Period departure_time(Period t, int horizon);

/// Cyclic successor of `t`, the inverse of departure_time.
Period next_period(Period t, int horizon);

/// All N^2 * T arcs of the space-time network, ordered by Instance::arc_index.
std::vector<SpaceTimeArc> build_spacetime(const Instance& inst);

/// True iff `arrival` lies in the commodity's cyclic window (avail, deadline].
/// A commodity with avail_period == deadline may use every period.
bool period_in_window(const Commodity& k, Period arrival, int horizon);

bool commodity_arc_allowed(const Instance& inst, const Commodity& k,
                           const SpaceTimeArc& arc);

/// Arcs that lie on at least one path of allowed arcs from the commodity's
/// supply node to its demand node, as a mask indexed by Instance::arc_index.
/// Flow on any other allowed arc is zero in every feasible recourse solution.
std::vector<bool> useful_arcs(const Instance& inst, const Commodity& k);

/// Parameters of the random instance generator.
struct GeneratorConfig {
  int num_terminals = 12;
  int horizon = 5;
  int num_commodities = 6;
  double capacity = 12.0;
  double outsourcing_cost = 80.0;
  int min_arc_cost = 10;
  int max_arc_cost = 30;
  double holding_cost = 1.0;
};

/// Random instance: integer movement costs drawn uniformly from
/// [min_arc_cost, max_arc_cost], constant holding cost, distinct
/// origin/destination per commodity and a deadline at least two cyclic
/// periods after availability (the full cycle when the horizon is 2).
Instance generate_instance(const GeneratorConfig& cfg, std::uint64_t seed);

}  // namespace sndh
