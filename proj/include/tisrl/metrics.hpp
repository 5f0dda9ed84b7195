#pragma once

#include <Eigen/Dense>

#include <span>
#include <vector>

namespace tisrl {

/// Co-occurrence counts of true versus predicted labels. Label values are
/// arbitrary integers; rows and columns follow their sorted order.
struct Contingency {
  Eigen::MatrixXi table;  // k_true x k_pred
  int n = 0;

  static Contingency build(std::span<const int> truth, std::span<const int> pred);
};

/// Maximum-weight perfect matching on a square matrix (Hungarian method).
/// Returns assignment[row] = column.
std::vector<int> max_weight_assignment(const Eigen::MatrixXd& weight);

/// Best-bijection accuracy: optimal assignment of predicted to true labels
/// on the zero-padded square contingency table, divided by n.
double accuracy(std::span<const int> truth, std::span<const int> pred);

/// I(U;V) / sqrt(H(U) H(V)), natural logs. Two single-cluster partitions
/// score 1; a single-cluster partition against a nontrivial one scores 0.
double nmi(std::span<const int> truth, std::span<const int> pred);

struct PairScores {
  double fscore = 0;
  double precision = 0;
  double recall = 0;
};

/// Pair-counting scores over all unordered sample pairs. Precision (recall)
/// is 1 when no pair is co-clustered in pred (truth); F is 0 when P + R = 0.
PairScores pairwise_f_precision(std::span<const int> truth,
                                std::span<const int> pred);

struct ClusteringMetrics {
  double nmi = 0;
  double acc = 0;
  double fscore = 0;
  double precision = 0;
};

ClusteringMetrics evaluate(std::span<const int> truth, std::span<const int> pred);

}  // namespace tisrl
