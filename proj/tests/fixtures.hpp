#pragma once

#include "sndh/network.hpp"
#include "sndh/scenarios.hpp"

#include <cstdint>

namespace sndh::fixtures {

inline Instance make_instance(int terminals, int horizon, int commodities, std::uint64_t seed) {
  GeneratorConfig cfg;
  cfg.num_terminals = terminals;
  cfg.horizon = horizon;
  cfg.num_commodities = commodities;
  return generate_instance(cfg, seed);
}

inline ScenarioSet make_scenarios(const Instance& inst, int n, std::uint64_t seed) {
  return generate_scenario_set(inst, n, TriangularDemand{}, seed, false);
}

// 3 terminals, 3 periods, 2 commodities, 4 scenarios.
inline Instance tiny_instance() { return make_instance(3, 3, 2, 20240601); }
inline ScenarioSet tiny_scenarios(const Instance& inst) { return make_scenarios(inst, 4, 77); }

}  // namespace sndh::fixtures
