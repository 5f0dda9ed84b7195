#pragma once

#include <Eigen/Dense>

#include <string>
#include <vector>

#include "tisrl/errors.hpp"

namespace tisrl {

/// Column-wise l2,1 shrinkage, the minimizer of
///   tau ||E||_{2,1} + 1/2 ||E - G||_F^2.
/// Columns with norm <= tau vanish; the rest are scaled by (norm - tau)/norm.
template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, Eigen::Dynamic>
l21_prox(const Eigen::MatrixBase<Derived>& g, typename Derived::Scalar tau) {
  using Scalar = typename Derived::Scalar;
  if (!(tau > 0)) {
    throw ParameterError("l21_prox: tau must be positive, got " +
                         std::to_string(tau));
  }
  Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> out =
      Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>::Zero(g.rows(),
                                                                   g.cols());
  for (Eigen::Index j = 0; j < g.cols(); ++j) {
    const Scalar norm = g.col(j).norm();
    if (norm > tau) out.col(j) = ((norm - tau) / norm) * g.col(j);
  }
  return out;
}

/// Nearest orthogonal matrix to m in Frobenius norm: U V^T from m = U S V^T.
/// Rank-deficient m gets an arbitrary completion of the singular bases.
template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, Eigen::Dynamic>
procrustes(const Eigen::MatrixBase<Derived>& m) {
  using Matrix =
      Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  if (m.rows() != m.cols()) {
    throw ShapeError("procrustes: matrix must be square, got " +
                     std::to_string(m.rows()) + "x" + std::to_string(m.cols()));
  }
  if (!m.allFinite()) throw InputError("procrustes: non-finite entries");
  Eigen::BDCSVD<Matrix> svd(m.derived(),
                            Eigen::ComputeFullU | Eigen::ComputeFullV);
  return svd.matrixU() * svd.matrixV().transpose();
}

/// Vertical concatenation of per-view error blocks E = [E_1; ...; E_v].
/// offsets has v+1 entries; block i spans rows [offsets[i], offsets[i+1]).
template <typename Scalar>
struct StackedError {
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

  Matrix stacked;
  std::vector<Eigen::Index> offsets;

  static StackedError stack(const std::vector<Matrix>& blocks) {
    if (blocks.empty()) throw ShapeError("StackedError: no blocks");
    StackedError out;
    out.offsets.push_back(0);
    const Eigen::Index cols = blocks.front().cols();
    for (std::size_t i = 0; i < blocks.size(); ++i) {
      if (blocks[i].cols() != cols) {
        throw ShapeError("StackedError: block " + std::to_string(i) + " has " +
                         std::to_string(blocks[i].cols()) + " columns, expected " +
                         std::to_string(cols));
      }
      out.offsets.push_back(out.offsets.back() + blocks[i].rows());
    }
    out.stacked.resize(out.offsets.back(), cols);
    for (std::size_t i = 0; i < blocks.size(); ++i)
      out.stacked.middleRows(out.offsets[i], blocks[i].rows()) = blocks[i];
    return out;
  }

  std::size_t num_blocks() const { return offsets.size() - 1; }

  auto block(std::size_t i) const {
    return stacked.middleRows(offsets[i], offsets[i + 1] - offsets[i]);
  }
};

}  // namespace tisrl
