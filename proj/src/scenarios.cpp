#include "sndh/scenarios.hpp"

#include "sndh/random.hpp"

#include <cmath>
#include <stdexcept>

namespace sndh {

void ScenarioSet::validate() const {
  if (demands.rows() != probabilities.size())
    throw std::invalid_argument("scenario set: probabilities and demand rows disagree");
  if (demands.rows() == 0) throw std::invalid_argument("scenario set is empty");
  if ((demands.array() < 0.0).any() || !demands.allFinite())
    throw std::invalid_argument("scenario set: demands must be finite and nonnegative");
  if ((probabilities.array() < 0.0).any())
    throw std::invalid_argument("scenario set: negative probability");
  if (std::abs(probabilities.sum() - 1.0) > 1e-9)
    throw std::invalid_argument("scenario set: probabilities do not sum to 1");
}

double sample_triangular(double u, double lo, double hi, double mode) {
  if (!(lo < hi) || mode < lo || mode > hi)
    throw std::invalid_argument("triangular parameters must satisfy lo <= mode <= hi, lo < hi");
  if (u < 0.0 || u > 1.0) throw std::invalid_argument("uniform variate must lie in [0, 1]");
  const double width = hi - lo;
  if (u <= (mode - lo) / width) return lo + std::sqrt(u * width * (mode - lo));
  return hi - std::sqrt((1.0 - u) * width * (hi - mode));
}

ScenarioSet generate_scenario_set(const Instance& inst, int n, const TriangularDemand& dist,
                                  std::uint64_t seed, bool moment_correct) {
  if (n < 1) throw std::invalid_argument("scenario count must be at least 1");
  const int K = inst.num_commodities();
  RandomStream rng(seed);

  ScenarioSet set;
  set.seed = seed;
  set.demands.resize(n, K);
  for (int s = 0; s < n; ++s)
    for (int k = 0; k < K; ++k)
      set.demands(s, k) = sample_triangular(rng.uniform(), dist.lo, dist.hi, dist.mode);
  set.probabilities = Eigen::VectorXd::Constant(n, 1.0 / n);

  if (moment_correct) {
    const double target_sd = std::sqrt(dist.variance());
    for (int k = 0; k < K; ++k) {
      auto col = set.demands.col(k);
      const double mean = col.mean();
      const double sd = std::sqrt((col.array() - mean).square().mean());
      if (sd > 0.0)
        col = ((col.array() - mean) * (target_sd / sd) + dist.mean()).matrix();
      else
        col.setConstant(dist.mean());
      col = col.cwiseMax(0.0);
    }
  }
  return set;
}

}  // namespace sndh
