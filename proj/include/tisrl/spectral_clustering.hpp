#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <vector>

namespace tisrl {

struct SpectralConfig {
  int k = 2;
  int kmeans_restarts = 20;
  int kmeans_max_iters = 100;
  std::uint64_t seed = 0;
};

/// Throws InputError unless w is square, finite, exactly symmetric and
/// nonnegative.
void validate_affinity(const Eigen::MatrixXd& w);

/// Top-k eigenvectors of D^{-1/2} W D^{-1/2}, largest eigenvalue first, with
/// every row scaled to unit norm (zero rows stay zero). Zero-degree vertices
/// get degree 1e-12 and a warning on stderr.
Eigen::MatrixXd normalized_embedding(const Eigen::MatrixXd& w, int k);

struct KMeansResult {
  std::vector<int> labels;
  Eigen::MatrixXd centroids;  // k x dim
  double inertia = 0;
  /// Inertia after each Lloyd iteration of the winning restart.
  std::vector<double> history;
};

/// Lloyd iterations from the given centroids (k x dim, one per row) until
/// assignments stop changing or max_iters. A cluster that empties is
/// re-seeded at the point farthest from its current centroid.
KMeansResult lloyd(const Eigen::MatrixXd& points, Eigen::MatrixXd centroids,
                   int max_iters);

/// k-means++ seeding plus Lloyd, repeated with seeds seed+0 .. seed+R-1.
/// Returns the restart with the lowest inertia (earliest on ties).
KMeansResult kmeans(const Eigen::MatrixXd& points, const SpectralConfig& cfg);

/// normalized_embedding followed by kmeans on its rows.
std::vector<int> cluster(const Eigen::MatrixXd& w, const SpectralConfig& cfg);

}  // namespace tisrl
