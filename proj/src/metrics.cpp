#include "tisrl/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <string>

#include "tisrl/errors.hpp"

namespace tisrl {

namespace {

void require_pair(std::span<const int> truth, std::span<const int> pred,
                  std::size_t min_len) {
  if (truth.size() != pred.size()) {
    throw InputError("label vectors differ in length: " +
                     std::to_string(truth.size()) + " vs " +
                     std::to_string(pred.size()));
  }
  if (truth.size() < min_len) {
    throw InputError("need at least " + std::to_string(min_len) + " labels");
  }
}

std::vector<int> dense_codes(std::span<const int> labels, int& count) {
  std::map<int, int> codes;
  for (int label : labels) codes.emplace(label, 0);
  int next = 0;
  for (auto& [label, code] : codes) code = next++;
  count = next;
  std::vector<int> out;
  out.reserve(labels.size());
  for (int label : labels) out.push_back(codes.at(label));
  return out;
}

double entropy(const Eigen::VectorXd& counts, double n) {
  double h = 0;
  for (Eigen::Index i = 0; i < counts.size(); ++i) {
    if (counts(i) > 0) {
      const double p = counts(i) / n;
      h -= p * std::log(p);
    }
  }
  return h;
}

double pairs(double count) { return count * (count - 1) / 2; }

}  // namespace

Contingency Contingency::build(std::span<const int> truth,
                               std::span<const int> pred) {
  require_pair(truth, pred, 1);
  int k_true = 0, k_pred = 0;
  const auto t = dense_codes(truth, k_true);
  const auto p = dense_codes(pred, k_pred);
  Contingency c;
  c.table = Eigen::MatrixXi::Zero(k_true, k_pred);
  c.n = static_cast<int>(truth.size());
  for (std::size_t i = 0; i < t.size(); ++i) ++c.table(t[i], p[i]);
  return c;
}

std::vector<int> max_weight_assignment(const Eigen::MatrixXd& weight) {
  if (weight.rows() != weight.cols())
    throw ShapeError("max_weight_assignment: matrix must be square");
  // Shortest augmenting path with potentials, minimizing -weight. Arrays
  // are 1-based with index 0 as the virtual source.
  const int n = static_cast<int>(weight.rows());
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1, 0), v(n + 1, 0);
  std::vector<int> match(n + 1, 0), way(n + 1, 0);
  for (int row = 1; row <= n; ++row) {
    match[0] = row;
    int col0 = 0;
    std::vector<double> minv(n + 1, inf);
    std::vector<char> used(n + 1, false);
    do {
      used[col0] = true;
      const int row0 = match[col0];
      double delta = inf;
      int col1 = 0;
      for (int col = 1; col <= n; ++col) {
        if (used[col]) continue;
        const double cur = -weight(row0 - 1, col - 1) - u[row0] - v[col];
        if (cur < minv[col]) {
          minv[col] = cur;
          way[col] = col0;
        }
        if (minv[col] < delta) {
          delta = minv[col];
          col1 = col;
        }
      }
      for (int col = 0; col <= n; ++col) {
        if (used[col]) {
          u[match[col]] += delta;
          v[col] -= delta;
        } else {
          minv[col] -= delta;
        }
      }
      col0 = col1;
    } while (match[col0] != 0);
    do {
      const int col1 = way[col0];
      match[col0] = match[col1];
      col0 = col1;
    } while (col0);
  }
  std::vector<int> assignment(static_cast<std::size_t>(n), -1);
  for (int col = 1; col <= n; ++col) assignment[match[col] - 1] = col - 1;
  return assignment;
}

double accuracy(std::span<const int> truth, std::span<const int> pred) {
  const Contingency c = Contingency::build(truth, pred);
  const Eigen::Index m = std::max(c.table.rows(), c.table.cols());
  Eigen::MatrixXd weight = Eigen::MatrixXd::Zero(m, m);
  weight.topLeftCorner(c.table.rows(), c.table.cols()) = c.table.cast<double>();
  const auto assignment = max_weight_assignment(weight);
  double matched = 0;
  for (Eigen::Index r = 0; r < m; ++r) matched += weight(r, assignment[r]);
  return matched / c.n;
}

double nmi(std::span<const int> truth, std::span<const int> pred) {
  const Contingency c = Contingency::build(truth, pred);
  const double n = c.n;
  const Eigen::MatrixXd joint = c.table.cast<double>();
  const double h_true = entropy(joint.rowwise().sum(), n);
  const double h_pred = entropy(joint.colwise().sum().transpose(), n);
  if (h_true == 0 && h_pred == 0) return 1.0;
  if (h_true == 0 || h_pred == 0) return 0.0;
  double mi = 0;
  const Eigen::VectorXd row_sum = joint.rowwise().sum();
  const Eigen::VectorXd col_sum = joint.colwise().sum().transpose();
  for (Eigen::Index a = 0; a < joint.rows(); ++a)
    for (Eigen::Index b = 0; b < joint.cols(); ++b)
      if (joint(a, b) > 0)
        mi += joint(a, b) / n *
              std::log(n * joint(a, b) / (row_sum(a) * col_sum(b)));
  return std::clamp(mi / std::sqrt(h_true * h_pred), 0.0, 1.0);
}

PairScores pairwise_f_precision(std::span<const int> truth,
                                std::span<const int> pred) {
  require_pair(truth, pred, 2);
  const Contingency c = Contingency::build(truth, pred);
  const Eigen::MatrixXd joint = c.table.cast<double>();
  const double together_both = joint.unaryExpr(&pairs).sum();
  const double together_pred = joint.colwise().sum().unaryExpr(&pairs).sum();
  const double together_true = joint.rowwise().sum().unaryExpr(&pairs).sum();

  PairScores s;
  s.precision = together_pred > 0 ? together_both / together_pred : 1.0;
  s.recall = together_true > 0 ? together_both / together_true : 1.0;
  const double denom = s.precision + s.recall;
  s.fscore = denom > 0 ? 2 * s.precision * s.recall / denom : 0.0;
  return s;
}

ClusteringMetrics evaluate(std::span<const int> truth, std::span<const int> pred) {
  const PairScores pair = pairwise_f_precision(truth, pred);
  return {nmi(truth, pred), accuracy(truth, pred), pair.fscore, pair.precision};
}

}  // namespace tisrl
