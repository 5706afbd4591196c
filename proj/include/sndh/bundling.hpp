#pragma once

#include "sndh/scenarios.hpp"

#include <Eigen/Core>

#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

namespace sndh {

struct FcmConfig {
  int num_bundles = 5;
  double exponent = 2.0;
  int max_iterations = 100;
  double min_improvement = 1e-5;
  double score_threshold = 0.8;
  double interval_param = 0.95;
  std::uint64_t seed = 0;

  void validate() const;
};

/// Fuzzy partition of the scenarios: membership(s, b) is the degree to which
/// scenario s belongs to bundle b; rows sum to one.
struct FuzzyPartition {
  Eigen::MatrixXd membership;    // |S| x g
  Eigen::MatrixXd centers;       // g x |K|
  double objective = 0.0;
  int iterations_used = 0;
  std::vector<double> objective_history;  // J after each iteration
};

struct BundleSet {
  std::vector<std::vector<int>> bundles;
  std::vector<int> occurrence_count;     // per scenario
  Eigen::VectorXd reweighted_prob;       // q_s = p_s / occurrence_count(s)
  Eigen::VectorXd bundle_prob;           // p_b = sum of q_s over the bundle

  int num_bundles() const { return static_cast<int>(bundles.size()); }
  int num_scenarios() const { return static_cast<int>(occurrence_count.size()); }

  /// Throws std::invalid_argument unless every scenario is covered, the
  /// probabilities are consistent and indices are in range.
  void validate() const;
};

struct OverlapStats {
  std::vector<int> bundle_sizes;
  int total_size = 0;
  int repeated_scenarios = 0;     // scenarios placed in two or more bundles
  std::vector<int> occurrences;   // per scenario
};

// Alternating-optimisation kernels. Features are rows (one per scenario).

/// Membership-weighted centroids: row b is sum_s u_sb^m x_s / sum_s u_sb^m.
/// Bundles with total weight below 1e-12 get a zero row; callers repair them.
template <typename DerivedX, typename DerivedU>
Eigen::Matrix<typename DerivedX::Scalar, Eigen::Dynamic, Eigen::Dynamic> fcm_centers(
    const Eigen::MatrixBase<DerivedX>& features, const Eigen::MatrixBase<DerivedU>& membership,
    typename DerivedX::Scalar m) {
  using Scalar = typename DerivedX::Scalar;
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  const Matrix weights = membership.array().pow(m).matrix();  // |S| x g
  Matrix centers = weights.transpose() * features;            // g x |K|
  for (Eigen::Index b = 0; b < centers.rows(); ++b) {
    const Scalar mass = weights.col(b).sum();
    if (mass < Scalar(1e-12))
      centers.row(b).setZero();
    else
      centers.row(b) /= mass;
  }
  return centers;
}

/// Squared Euclidean distances, |S| x g.
template <typename DerivedX, typename DerivedV>
Eigen::Matrix<typename DerivedX::Scalar, Eigen::Dynamic, Eigen::Dynamic> squared_distances(
    const Eigen::MatrixBase<DerivedX>& features, const Eigen::MatrixBase<DerivedV>& centers) {
  using Matrix = Eigen::Matrix<typename DerivedX::Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  Matrix d2(features.rows(), centers.rows());
  for (Eigen::Index s = 0; s < features.rows(); ++s)
    for (Eigen::Index b = 0; b < centers.rows(); ++b)
      d2(s, b) = (features.row(s) - centers.row(b)).squaredNorm();
  return d2;
}

/// Membership update u_sb = [sum_l (|x_s - v_b| / |x_s - v_l|)^(2/(m-1))]^-1.
/// A scenario within 1e-12 of a center belongs fully to the nearest such
/// center (lowest index on ties).
template <typename DerivedX, typename DerivedV>
Eigen::Matrix<typename DerivedX::Scalar, Eigen::Dynamic, Eigen::Dynamic> fcm_memberships(
    const Eigen::MatrixBase<DerivedX>& features, const Eigen::MatrixBase<DerivedV>& centers,
    typename DerivedX::Scalar m) {
  using Scalar = typename DerivedX::Scalar;
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  const Matrix d2 = squared_distances(features, centers);
  const Scalar power = Scalar(1) / (m - Scalar(1));
  Matrix u(d2.rows(), d2.cols());
  for (Eigen::Index s = 0; s < d2.rows(); ++s) {
    Eigen::Index nearest = 0;
    const Scalar d2_min = d2.row(s).minCoeff(&nearest);
    u.row(s).setZero();
    if (std::sqrt(d2_min) < Scalar(1e-12)) {
      u(s, nearest) = Scalar(1);
      continue;
    }
    // ratios relative to the nearest center keep every term in (0, 1]
    for (Eigen::Index b = 0; b < d2.cols(); ++b) u(s, b) = std::pow(d2_min / d2(s, b), power);
    u.row(s) /= u.row(s).sum();
  }
  return u;
}

/// J = sum_s sum_b u_sb^m |x_s - v_b|^2.
template <typename DerivedX, typename DerivedU, typename DerivedV>
typename DerivedX::Scalar fcm_objective(const Eigen::MatrixBase<DerivedX>& features,
                                        const Eigen::MatrixBase<DerivedU>& membership,
                                        const Eigen::MatrixBase<DerivedV>& centers,
                                        typename DerivedX::Scalar m) {
  return (membership.array().pow(m) * squared_distances(features, centers).array()).sum();
}

double fcm_objective(const FuzzyPartition& partition, const ScenarioSet& scenarios, double m);

/// Fuzzy c-means on the scenario demand vectors.
FuzzyPartition fcm_fit(const ScenarioSet& scenarios, const FcmConfig& cfg);

/// Places each scenario into the bundles where its membership clears the
/// score threshold, or else into those within interval_param of its maximum.
/// Only `bundles` is filled in.
BundleSet assign_bundles(const FuzzyPartition& partition, const FcmConfig& cfg);

/// Tallies occurrences and fills the reweighted scenario and bundle
/// probabilities.
BundleSet bundle_probabilities(BundleSet bundles, const ScenarioSet& scenarios);

/// Hard clustering baseline: Lloyd iterations from k-means++ seeding.
BundleSet kmeans_fit(const ScenarioSet& scenarios, int num_bundles, std::uint64_t seed);

OverlapStats overlap_stats(const BundleSet& bundles);

}  // namespace sndh
