#include "tisrl/spectral_clustering.hpp"

#include <cmath>
#include <iostream>
#include <limits>
#include <random>
#include <string>

#include "tisrl/errors.hpp"
#include "tisrl/parallel.hpp"

namespace tisrl {

namespace {

constexpr double kDegreeFloor = 1e-12;

double squared_distance(const Eigen::MatrixXd& points, Eigen::Index i,
                        const Eigen::MatrixXd& centroids, Eigen::Index c) {
  return (points.row(i) - centroids.row(c)).squaredNorm();
}

Eigen::MatrixXd kmeans_plus_plus(const Eigen::MatrixXd& points, int k,
                                 std::mt19937_64& rng) {
  const Eigen::Index n = points.rows();
  Eigen::MatrixXd centroids(k, points.cols());
  std::uniform_int_distribution<Eigen::Index> first(0, n - 1);
  centroids.row(0) = points.row(first(rng));
  Eigen::VectorXd nearest(n);
  for (Eigen::Index i = 0; i < n; ++i)
    nearest(i) = squared_distance(points, i, centroids, 0);

  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int c = 1; c < k; ++c) {
    const double total = nearest.sum();
    Eigen::Index pick = 0;
    if (total > 0) {
      double target = unit(rng) * total;
      pick = n - 1;
      for (Eigen::Index i = 0; i < n; ++i) {
        target -= nearest(i);
        if (target < 0) {
          pick = i;
          break;
        }
      }
    } else {
      pick = first(rng);
    }
    centroids.row(c) = points.row(pick);
    for (Eigen::Index i = 0; i < n; ++i)
      nearest(i) = std::min(nearest(i), squared_distance(points, i, centroids, c));
  }
  return centroids;
}

}  // namespace

void validate_affinity(const Eigen::MatrixXd& w) {
  if (w.rows() != w.cols())
    throw InputError("affinity must be square");
  if (!w.allFinite()) throw InputError("affinity has non-finite entries");
  if (w != w.transpose()) throw InputError("affinity is not symmetric");
  if ((w.array() < 0).any()) throw InputError("affinity has negative entries");
}

Eigen::MatrixXd normalized_embedding(const Eigen::MatrixXd& w, int k) {
  validate_affinity(w);
  const Eigen::Index n = w.rows();
  if (k < 1 || k > n) {
    throw ParameterError("normalized_embedding: k = " + std::to_string(k) +
                         " outside 1.." + std::to_string(n));
  }
  Eigen::VectorXd degree = w.rowwise().sum();
  Eigen::Index isolated = 0;
  for (Eigen::Index i = 0; i < n; ++i) {
    if (degree(i) <= 0) {
      degree(i) = kDegreeFloor;
      ++isolated;
    }
  }
  if (isolated) {
    std::cerr << "warning: " << isolated
              << " isolated vertices in affinity; degree regularized\n";
  }
  const Eigen::VectorXd inv_sqrt = degree.cwiseSqrt().cwiseInverse();
  Eigen::MatrixXd normalized = inv_sqrt.asDiagonal() * w * inv_sqrt.asDiagonal();
  normalized = 0.5 * (normalized + normalized.transpose());

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(normalized);
  // Eigenvalues ascend; walk from the top so the largest comes first.
  Eigen::MatrixXd embedding(n, k);
  for (int c = 0; c < k; ++c) embedding.col(c) = eig.eigenvectors().col(n - 1 - c);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double norm = embedding.row(i).norm();
    if (norm > 0) embedding.row(i) /= norm;
  }
  return embedding;
}

KMeansResult lloyd(const Eigen::MatrixXd& points, Eigen::MatrixXd centroids,
                   int max_iters) {
  const Eigen::Index n = points.rows();
  const Eigen::Index k = centroids.rows();
  KMeansResult result;
  result.labels.assign(static_cast<std::size_t>(n), -1);

  for (int iter = 0; iter < std::max(max_iters, 1); ++iter) {
    bool changed = false;
    double inertia = 0;
    for (Eigen::Index i = 0; i < n; ++i) {
      int best = 0;
      double best_d = std::numeric_limits<double>::infinity();
      for (Eigen::Index c = 0; c < k; ++c) {
        const double d = squared_distance(points, i, centroids, c);
        if (d < best_d) {
          best_d = d;
          best = static_cast<int>(c);
        }
      }
      if (result.labels[i] != best) changed = true;
      result.labels[i] = best;
      inertia += best_d;
    }
    result.history.push_back(inertia);
    result.inertia = inertia;
    if (!changed) break;

    Eigen::MatrixXd sums = Eigen::MatrixXd::Zero(k, points.cols());
    std::vector<Eigen::Index> counts(static_cast<std::size_t>(k), 0);
    for (Eigen::Index i = 0; i < n; ++i) {
      sums.row(result.labels[i]) += points.row(i);
      ++counts[result.labels[i]];
    }
    for (Eigen::Index c = 0; c < k; ++c) {
      if (counts[c] > 0) {
        centroids.row(c) = sums.row(c) / static_cast<double>(counts[c]);
        continue;
      }
      // Empty cluster: move it onto the worst-fitted point.
      Eigen::Index far = 0;
      double far_d = -1;
      for (Eigen::Index i = 0; i < n; ++i) {
        const double d = squared_distance(points, i, centroids, result.labels[i]);
        if (d > far_d) {
          far_d = d;
          far = i;
        }
      }
      centroids.row(c) = points.row(far);
    }
  }
  result.centroids = std::move(centroids);
  // The last centroid step may have run after the last assignment.
  result.inertia = 0;
  for (Eigen::Index i = 0; i < n; ++i)
    result.inertia +=
        squared_distance(points, i, result.centroids, result.labels[i]);
  return result;
}

KMeansResult kmeans(const Eigen::MatrixXd& points, const SpectralConfig& cfg) {
  const Eigen::Index n = points.rows();
  if (cfg.k < 1 || cfg.k > n) {
    throw ParameterError("kmeans: k = " + std::to_string(cfg.k) +
                         " outside 1.." + std::to_string(n));
  }
  if (cfg.kmeans_restarts < 1) throw ParameterError("kmeans: restarts must be >= 1");
  std::vector<KMeansResult> runs(static_cast<std::size_t>(cfg.kmeans_restarts));
  parallel_for(runs.size(), [&](std::size_t r) {
    std::mt19937_64 rng(cfg.seed + r);
    runs[r] = lloyd(points, kmeans_plus_plus(points, cfg.k, rng),
                    cfg.kmeans_max_iters);
  });
  std::size_t best = 0;
  for (std::size_t r = 1; r < runs.size(); ++r)
    if (runs[r].inertia < runs[best].inertia) best = r;
  return std::move(runs[best]);
}

std::vector<int> cluster(const Eigen::MatrixXd& w, const SpectralConfig& cfg) {
  if (cfg.k == 1) {
    validate_affinity(w);
    return std::vector<int>(static_cast<std::size_t>(w.rows()), 0);
  }
  return kmeans(normalized_embedding(w, cfg.k), cfg).labels;
}

}  // namespace tisrl
