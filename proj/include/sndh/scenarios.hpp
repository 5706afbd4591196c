#pragma once

#include "sndh/network.hpp"

#include <Eigen/Core>

#include <cstdint>

namespace sndh {

/// Demand scenarios: row s of `demands` is d^s (one column per commodity),
/// realised with probability `probabilities(s)`.
struct ScenarioSet {
  Eigen::MatrixXd demands;
  Eigen::VectorXd probabilities;
  std::uint64_t seed = 0;

  int size() const { return static_cast<int>(demands.rows()); }
  int num_commodities() const { return static_cast<int>(demands.cols()); }
  auto demand(int s) const { return demands.row(s); }

  /// Throws std::invalid_argument on negative demand or probabilities that
  /// are negative or do not sum to one within 1e-9.
  void validate() const;
};

struct TriangularDemand {
  double lo = 5.0;
  double hi = 11.0;
  double mode = 8.0;

  double mean() const { return (lo + hi + mode) / 3.0; }
  double variance() const {
    return (lo * lo + hi * hi + mode * mode - lo * hi - lo * mode - hi * mode) / 18.0;
  }
};

/// Inverse CDF of the triangular distribution evaluated at `u` in [0, 1].
double sample_triangular(double u, double lo, double hi, double mode);

/// `n` equiprobable scenarios with i.i.d. triangular demand per commodity.
/// With `moment_correct`, each commodity column is shifted and scaled so its
/// sample mean and (population) variance equal the analytic moments, then
/// clamped at zero.
ScenarioSet generate_scenario_set(const Instance& inst, int n, const TriangularDemand& dist,
                                  std::uint64_t seed, bool moment_correct);

}  // namespace sndh
