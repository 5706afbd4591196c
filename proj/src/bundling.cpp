#include "sndh/bundling.hpp"

#include "sndh/random.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace sndh {

namespace {

// Index of the scenario farthest from its nearest center.
Eigen::Index farthest_scenario(const Eigen::MatrixXd& features, const Eigen::MatrixXd& centers,
                               Eigen::Index skip_center) {
  Eigen::Index best = 0;
  double best_dist = -1.0;
  for (Eigen::Index s = 0; s < features.rows(); ++s) {
    double nearest = std::numeric_limits<double>::infinity();
    for (Eigen::Index b = 0; b < centers.rows(); ++b) {
      if (b == skip_center) continue;
      nearest = std::min(nearest, (features.row(s) - centers.row(b)).squaredNorm());
    }
    if (nearest > best_dist) {
      best_dist = nearest;
      best = s;
    }
  }
  return best;
}

bool all_identical(const Eigen::MatrixXd& features) {
  for (Eigen::Index s = 1; s < features.rows(); ++s)
    if (features.row(s) != features.row(0)) return false;
  return true;
}

}  // namespace

void FcmConfig::validate() const {
  if (num_bundles < 2) throw std::invalid_argument("fcm: need at least 2 bundles");
  if (!(exponent > 1.0)) throw std::invalid_argument("fcm: exponent must exceed 1");
  if (max_iterations < 1) throw std::invalid_argument("fcm: max_iterations must be positive");
  if (!(min_improvement > 0.0)) throw std::invalid_argument("fcm: min_improvement must be positive");
  if (!(score_threshold > 0.0 && score_threshold < 1.0))
    throw std::invalid_argument("fcm: score threshold must lie in (0, 1)");
  if (!(interval_param >= 0.0 && interval_param <= 1.0))
    throw std::invalid_argument("fcm: interval parameter must lie in [0, 1]");
}

void BundleSet::validate() const {
  const int S = num_scenarios();
  if (reweighted_prob.size() != S || bundle_prob.size() != num_bundles())
    throw std::invalid_argument("bundle set: probability vectors have wrong length");
  std::vector<int> seen(static_cast<std::size_t>(S), 0);
  for (const auto& b : bundles)
    for (int s : b) {
      if (s < 0 || s >= S) throw std::invalid_argument("bundle set: scenario index out of range");
      ++seen[static_cast<std::size_t>(s)];
    }
  for (int s = 0; s < S; ++s) {
    if (seen[static_cast<std::size_t>(s)] == 0)
      throw std::invalid_argument("bundle set: scenario " + std::to_string(s) + " in no bundle");
    if (seen[static_cast<std::size_t>(s)] != occurrence_count[static_cast<std::size_t>(s)])
      throw std::invalid_argument("bundle set: occurrence counts are stale");
  }
  if (std::abs(bundle_prob.sum() - 1.0) > 1e-9)
    throw std::invalid_argument("bundle set: bundle probabilities do not sum to 1");
}

double fcm_objective(const FuzzyPartition& partition, const ScenarioSet& scenarios, double m) {
  if (partition.membership.rows() != scenarios.size() ||
      partition.centers.rows() != partition.membership.cols() ||
      partition.centers.cols() != scenarios.num_commodities())
    throw std::invalid_argument("fcm_objective: dimension mismatch");
  return fcm_objective(scenarios.demands, partition.membership, partition.centers, m);
}

FuzzyPartition fcm_fit(const ScenarioSet& scenarios, const FcmConfig& cfg) {
  cfg.validate();
  const Eigen::MatrixXd& x = scenarios.demands;
  const int S = scenarios.size();
  const int g = cfg.num_bundles;
  if (g > S) throw std::invalid_argument("fcm: more bundles than scenarios");
  if (all_identical(x)) throw std::domain_error("fcm: all scenarios are identical");

  RandomStream rng(cfg.seed);
  FuzzyPartition out;
  out.membership.resize(S, g);
  for (int s = 0; s < S; ++s)
    for (int b = 0; b < g; ++b) out.membership(s, b) = rng.uniform() + 1e-12;
  for (int s = 0; s < S; ++s) out.membership.row(s) /= out.membership.row(s).sum();

  const double m = cfg.exponent;
  double j_old = std::numeric_limits<double>::infinity();
  out.centers = Eigen::MatrixXd::Zero(g, x.cols());
  while (out.iterations_used < cfg.max_iterations) {
    out.centers = fcm_centers(x, out.membership, m);
    const Eigen::VectorXd mass = out.membership.array().pow(m).colwise().sum().transpose();
    for (int b = 0; b < g; ++b)
      if (mass(b) < 1e-12) out.centers.row(b) = x.row(farthest_scenario(x, out.centers, b));

    out.membership = fcm_memberships(x, out.centers, m);
    out.objective = fcm_objective(x, out.membership, out.centers, m);
    out.objective_history.push_back(out.objective);
    ++out.iterations_used;
    if (std::abs(out.objective - j_old) <= cfg.min_improvement) break;
    j_old = out.objective;
  }
  return out;
}

BundleSet assign_bundles(const FuzzyPartition& partition, const FcmConfig& cfg) {
  const auto& u = partition.membership;
  BundleSet out;
  out.bundles.assign(static_cast<std::size_t>(u.cols()), {});
  for (Eigen::Index s = 0; s < u.rows(); ++s) {
    Eigen::Index top = 0;
    const double h = u.row(s).maxCoeff(&top);  // first maximum on ties
    if (h > cfg.score_threshold) {
      for (Eigen::Index b = 0; b < u.cols(); ++b)
        if (u(s, b) > cfg.score_threshold) out.bundles[b].push_back(static_cast<int>(s));
    } else {
      const double floor = cfg.interval_param * h;
      for (Eigen::Index b = 0; b < u.cols(); ++b)
        if (u(s, b) >= floor && u(s, b) <= h) out.bundles[b].push_back(static_cast<int>(s));
    }
  }
  return out;
}

BundleSet bundle_probabilities(BundleSet bundles, const ScenarioSet& scenarios) {
  const int S = scenarios.size();
  bundles.occurrence_count.assign(static_cast<std::size_t>(S), 0);
  for (const auto& b : bundles.bundles)
    for (int s : b) {
      if (s < 0 || s >= S) throw std::invalid_argument("bundle references unknown scenario");
      ++bundles.occurrence_count[static_cast<std::size_t>(s)];
    }
  bundles.reweighted_prob.resize(S);
  for (int s = 0; s < S; ++s) {
    const int count = bundles.occurrence_count[static_cast<std::size_t>(s)];
    if (count == 0)
      throw std::logic_error("scenario " + std::to_string(s) + " was placed in no bundle");
    bundles.reweighted_prob(s) = scenarios.probabilities(s) / count;
  }
  bundles.bundle_prob = Eigen::VectorXd::Zero(bundles.num_bundles());
  for (int b = 0; b < bundles.num_bundles(); ++b)
    for (int s : bundles.bundles[static_cast<std::size_t>(b)])
      bundles.bundle_prob(b) += bundles.reweighted_prob(s);
  return bundles;
}

BundleSet kmeans_fit(const ScenarioSet& scenarios, int num_bundles, std::uint64_t seed) {
  const Eigen::MatrixXd& x = scenarios.demands;
  const int S = scenarios.size();
  const int g = num_bundles;
  if (g < 1) throw std::invalid_argument("kmeans: need at least 1 bundle");
  if (g > S) throw std::invalid_argument("kmeans: more bundles than scenarios");

  // k-means++ seeding
  RandomStream rng(seed);
  Eigen::MatrixXd centers(g, x.cols());
  centers.row(0) = x.row(rng.uniform_int(0, S - 1));
  Eigen::VectorXd d2 = (x.rowwise() - centers.row(0)).rowwise().squaredNorm();
  for (int b = 1; b < g; ++b) {
    const double total = d2.sum();
    Eigen::Index pick = 0;
    if (total <= 0.0) {
      pick = rng.uniform_int(0, S - 1);
    } else {
      double target = rng.uniform() * total;
      pick = S - 1;
      for (Eigen::Index s = 0; s < S; ++s) {
        target -= d2(s);
        if (target < 0.0 && d2(s) > 0.0) {
          pick = s;
          break;
        }
      }
    }
    centers.row(b) = x.row(pick);
    d2 = d2.cwiseMin((x.rowwise() - centers.row(b)).rowwise().squaredNorm());
  }

  constexpr int kMaxIterations = 300;
  constexpr double kMinRelativeImprovement = 1e-9;
  std::vector<int> label(static_cast<std::size_t>(S), -1);
  double inertia_old = std::numeric_limits<double>::infinity();
  for (int it = 0; it < kMaxIterations; ++it) {
    const Eigen::MatrixXd dist = squared_distances(x, centers);
    bool changed = false;
    double inertia = 0.0;
    for (int s = 0; s < S; ++s) {
      Eigen::Index b = 0;
      inertia += dist.row(s).minCoeff(&b);
      if (label[static_cast<std::size_t>(s)] != static_cast<int>(b)) {
        label[static_cast<std::size_t>(s)] = static_cast<int>(b);
        changed = true;
      }
    }
    Eigen::MatrixXd sums = Eigen::MatrixXd::Zero(g, x.cols());
    Eigen::VectorXi counts = Eigen::VectorXi::Zero(g);
    for (int s = 0; s < S; ++s) {
      sums.row(label[static_cast<std::size_t>(s)]) += x.row(s);
      ++counts(label[static_cast<std::size_t>(s)]);
    }
    for (int b = 0; b < g; ++b) {
      if (counts(b) > 0) {
        centers.row(b) = sums.row(b) / counts(b);
      } else {
        const Eigen::Index far = farthest_scenario(x, centers, b);
        centers.row(b) = x.row(far);
        changed = true;
      }
    }
    const bool stalled =
        std::isfinite(inertia_old) && inertia_old - inertia <= kMinRelativeImprovement * inertia_old;
    if (!changed || stalled) break;
    inertia_old = inertia;
  }

  // final assignment against the settled centers; repair any empty cluster
  const Eigen::MatrixXd dist = squared_distances(x, centers);
  for (int s = 0; s < S; ++s) {
    Eigen::Index b = 0;
    dist.row(s).minCoeff(&b);
    label[static_cast<std::size_t>(s)] = static_cast<int>(b);
  }
  BundleSet out;
  out.bundles.assign(static_cast<std::size_t>(g), {});
  for (int s = 0; s < S; ++s) out.bundles[static_cast<std::size_t>(label[s])].push_back(s);
  for (int b = 0; b < g; ++b) {
    if (!out.bundles[static_cast<std::size_t>(b)].empty()) continue;
    // move the farthest member of the largest bundle here
    auto largest = std::max_element(out.bundles.begin(), out.bundles.end(),
                                    [](const auto& a, const auto& c) { return a.size() < c.size(); });
    if (largest->size() < 2) break;
    const int from = static_cast<int>(largest - out.bundles.begin());
    auto far = std::max_element(largest->begin(), largest->end(), [&](int a, int c) {
      return dist(a, from) < dist(c, from);
    });
    out.bundles[static_cast<std::size_t>(b)].push_back(*far);
    largest->erase(far);
  }
  return bundle_probabilities(std::move(out), scenarios);
}

OverlapStats overlap_stats(const BundleSet& bundles) {
  OverlapStats out;
  int num_scenarios = bundles.num_scenarios();
  for (const auto& b : bundles.bundles)
    for (int s : b) num_scenarios = std::max(num_scenarios, s + 1);
  out.occurrences.assign(static_cast<std::size_t>(num_scenarios), 0);
  for (const auto& b : bundles.bundles) {
    out.bundle_sizes.push_back(static_cast<int>(b.size()));
    out.total_size += static_cast<int>(b.size());
    for (int s : b) ++out.occurrences[static_cast<std::size_t>(s)];
  }
  out.repeated_scenarios = static_cast<int>(
      std::count_if(out.occurrences.begin(), out.occurrences.end(), [](int c) { return c >= 2; }));
  return out;
}

}  // namespace sndh
