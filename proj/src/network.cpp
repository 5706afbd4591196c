#include "sndh/network.hpp"

#include "sndh/random.hpp"

#include <deque>
#include <stdexcept>
#include <string>

namespace sndh {

void Instance::validate() const {
  if (num_terminals < 2) throw std::invalid_argument("instance needs at least 2 terminals");
  if (horizon < 2) throw std::invalid_argument("instance horizon must be at least 2");
  if (!(capacity > 0.0)) throw std::invalid_argument("capacity must be positive");
  if (!(outsourcing_cost > 0.0)) throw std::invalid_argument("outsourcing cost must be positive");
  if (arc_cost.rows() != num_terminals || arc_cost.cols() != num_terminals)
    throw std::invalid_argument("arc_cost must be num_terminals x num_terminals");
  if ((arc_cost.array() < 0.0).any() || !arc_cost.allFinite())
    throw std::invalid_argument("arc costs must be finite and nonnegative");
  for (std::size_t k = 0; k < commodities.size(); ++k) {
    const auto& c = commodities[k];
    const std::string tag = "commodity " + std::to_string(k) + ": ";
    if (c.origin < 0 || c.origin >= num_terminals || c.destination < 0 ||
        c.destination >= num_terminals)
      throw std::invalid_argument(tag + "terminal out of range");
    if (c.origin == c.destination) throw std::invalid_argument(tag + "origin equals destination");
    if (c.avail_period < 0 || c.avail_period >= horizon || c.deadline < 0 ||
        c.deadline >= horizon)
      throw std::invalid_argument(tag + "period out of range");
  }
}

Period departure_time(Period t, int horizon) {
  if (horizon < 1) throw std::invalid_argument("horizon must be positive");
  if (t < 0 || t >= horizon) throw std::invalid_argument("period out of range");
  return t >= 1 ? t - 1 : horizon - 1;
}

Period next_period(Period t, int horizon) {
  if (horizon < 1) throw std::invalid_argument("horizon must be positive");
  if (t < 0 || t >= horizon) throw std::invalid_argument("period out of range");
  return t + 1 < horizon ? t + 1 : 0;
}

std::vector<SpaceTimeArc> build_spacetime(const Instance& inst) {
  if (inst.num_terminals < 2 || inst.horizon < 2)
    throw std::invalid_argument("space-time network needs N >= 2 and T >= 2");
  std::vector<SpaceTimeArc> arcs;
  arcs.reserve(static_cast<std::size_t>(inst.num_arcs()));
  for (Period t = 0; t < inst.horizon; ++t)
    for (TerminalId i = 0; i < inst.num_terminals; ++i)
      for (TerminalId j = 0; j < inst.num_terminals; ++j)
        arcs.push_back({i, j, t, departure_time(t, inst.horizon), i == j});
  return arcs;
}

bool period_in_window(const Commodity& k, Period arrival, int horizon) {
  if (k.avail_period == k.deadline) return true;
  // steps walked forward from the availability period, in 1..T-1
  const int steps = ((arrival - k.avail_period) % horizon + horizon) % horizon;
  const int length = ((k.deadline - k.avail_period) % horizon + horizon) % horizon;
  return steps >= 1 && steps <= length;
}

bool commodity_arc_allowed(const Instance& inst, const Commodity& k, const SpaceTimeArc& arc) {
  return period_in_window(k, arc.arrival, inst.horizon);
}

std::vector<bool> useful_arcs(const Instance& inst, const Commodity& k) {
  const int n = inst.num_terminals;
  const int T = inst.horizon;
  auto node = [n](TerminalId i, Period t) { return t * n + i; };

  std::vector<bool> forward(static_cast<std::size_t>(n * T), false);
  std::vector<bool> backward(static_cast<std::size_t>(n * T), false);

  std::deque<int> queue{node(k.origin, k.avail_period)};
  forward[queue.front()] = true;
  while (!queue.empty()) {
    const int v = queue.front();
    queue.pop_front();
    const Period t_next = next_period(v / n, T);
    if (!period_in_window(k, t_next, T)) continue;
    for (TerminalId j = 0; j < n; ++j) {
      const int w = node(j, t_next);
      if (!forward[w]) {
        forward[w] = true;
        queue.push_back(w);
      }
    }
  }

  queue.assign({node(k.destination, k.deadline)});
  backward[queue.front()] = true;
  while (!queue.empty()) {
    const int v = queue.front();
    queue.pop_front();
    const Period t = v / n;
    if (!period_in_window(k, t, T)) continue;
    const Period t_prev = departure_time(t, T);
    for (TerminalId i = 0; i < n; ++i) {
      const int w = node(i, t_prev);
      if (!backward[w]) {
        backward[w] = true;
        queue.push_back(w);
      }
    }
  }

  std::vector<bool> mask(static_cast<std::size_t>(inst.num_arcs()), false);
  for (Period t = 0; t < T; ++t) {
    if (!period_in_window(k, t, T)) continue;
    const Period dep = departure_time(t, T);
    for (TerminalId i = 0; i < n; ++i)
      for (TerminalId j = 0; j < n; ++j)
        if (forward[node(i, dep)] && backward[node(j, t)]) mask[inst.arc_index(i, j, t)] = true;
  }
  return mask;
}

Instance generate_instance(const GeneratorConfig& cfg, std::uint64_t seed) {
  if (cfg.num_terminals < 2 || cfg.horizon < 2 || cfg.num_commodities < 0 ||
      cfg.min_arc_cost > cfg.max_arc_cost)
    throw std::invalid_argument("generator: invalid size parameters");
  RandomStream rng(seed);
  Instance inst;
  inst.num_terminals = cfg.num_terminals;
  inst.horizon = cfg.horizon;
  inst.capacity = cfg.capacity;
  inst.outsourcing_cost = cfg.outsourcing_cost;
  inst.arc_cost.resize(cfg.num_terminals, cfg.num_terminals);
  for (int i = 0; i < cfg.num_terminals; ++i)
    for (int j = 0; j < cfg.num_terminals; ++j)
      inst.arc_cost(i, j) = i == j ? cfg.holding_cost
                                   : static_cast<double>(rng.uniform_int(cfg.min_arc_cost, cfg.max_arc_cost));
  const int T = cfg.horizon;
  for (int k = 0; k < cfg.num_commodities; ++k) {
    Commodity c;
    c.origin = static_cast<int>(rng.uniform_int(0, cfg.num_terminals - 1));
    c.destination = static_cast<int>(rng.uniform_int(0, cfg.num_terminals - 2));
    if (c.destination >= c.origin) ++c.destination;
    c.avail_period = static_cast<int>(rng.uniform_int(0, T - 1));
    const int lead = T >= 3 ? static_cast<int>(rng.uniform_int(2, T - 1)) : 0;
    c.deadline = (c.avail_period + lead) % T;
    inst.commodities.push_back(c);
  }
  inst.validate();
  return inst;
}

}  // namespace sndh
