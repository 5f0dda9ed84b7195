#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include "oracles.hpp"
#include "tisrl/errors.hpp"
#include "tisrl/prox_ops.hpp"

namespace tisrl {
namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

double l21_objective(const MatrixXd& e, const MatrixXd& g, double tau) {
  return tau * e.colwise().norm().sum() + 0.5 * (e - g).squaredNorm();
}

TEST(L21Prox, ShrinksColumnTowardZero) {
  VectorXd g(2);
  g << 3, 4;
  const MatrixXd e = l21_prox(g, 1.0);
  EXPECT_NEAR(e(0, 0), 2.4, 1e-15);
  EXPECT_NEAR(e(1, 0), 3.2, 1e-15);
}

TEST(L21Prox, SmallColumnsVanish) {
  MatrixXd g(2, 3);
  g << 0.3, 3, 0.6,
       0.4, 4, 0.8;
  const MatrixXd e = l21_prox(g, 1.0);
  EXPECT_TRUE(e.col(0).isZero(0));
  EXPECT_TRUE(e.col(2).isZero(0));  // norm exactly equal to tau
  EXPECT_GT(e.col(1).norm(), 0);
}

TEST(L21Prox, VanishingTauIsIdentity) {
  std::mt19937_64 rng(1);
  const MatrixXd g = oracle::random_matrix(rng, 4, 5);
  EXPECT_LE((l21_prox(g, 1e-14) - g).cwiseAbs().maxCoeff(), 1e-13);
}

TEST(L21Prox, NonPositiveTauThrows) {
  EXPECT_THROW(l21_prox(MatrixXd::Ones(2, 2), 0.0), ParameterError);
}

TEST(L21Prox, MatchesOneDimensionalMinimization) {
  // The minimizer is a nonnegative scaling of each column; search the scale
  // numerically.
  std::mt19937_64 rng(2);
  for (int trial = 0; trial < 50; ++trial) {
    const MatrixXd g = oracle::random_matrix(rng, 3, 4);
    const double tau = 0.25 * (1 + trial % 8);
    const MatrixXd e = l21_prox(g, tau);
    for (Eigen::Index j = 0; j < g.cols(); ++j) {
      const VectorXd col = g.col(j);
      auto f = [&](double s) {
        return tau * std::abs(s) * col.norm() + 0.5 * (s * col - col).squaredNorm();
      };
      const double s = oracle::golden_section_min(f, 0.0, 1.0);
      EXPECT_LE((e.col(j) - s * col).cwiseAbs().maxCoeff(), 1e-6);
    }
  }
}

TEST(L21Prox, BeatsColumnScalings) {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 30; ++trial) {
    const MatrixXd g = oracle::random_matrix(rng, 5, 6);
    const double tau = 0.5 + 0.2 * (trial % 6);
    const MatrixXd e = l21_prox(g, tau);
    const double best = l21_objective(e, g, tau);
    for (Eigen::Index j = 0; j < e.cols(); ++j) {
      for (double factor : {1 + 1e-3, 1 - 1e-3}) {
        MatrixXd probe = e;
        probe.col(j) *= factor;
        EXPECT_GE(l21_objective(probe, g, tau), best - 1e-14);
      }
    }
    for (double factor : {1 + 1e-3, 1 - 1e-3})
      EXPECT_GE(l21_objective(e * factor, g, tau), best - 1e-14);
  }
}

TEST(L21Prox, Nonexpansive) {
  std::mt19937_64 rng(4);
  for (int trial = 0; trial < 100; ++trial) {
    const MatrixXd g1 = oracle::random_matrix(rng, 4, 3);
    const MatrixXd g2 = oracle::random_matrix(rng, 4, 3);
    EXPECT_LE((l21_prox(g1, 0.8) - l21_prox(g2, 0.8)).norm(), (g1 - g2).norm() + 1e-14);
  }
}

TEST(Procrustes, IdentityMapsToIdentity) {
  EXPECT_LE((procrustes(MatrixXd::Identity(4, 4)) - MatrixXd::Identity(4, 4))
                .cwiseAbs()
                .maxCoeff(),
            1e-14);
}

TEST(Procrustes, RecoversScaledOrthogonal) {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 20; ++trial) {
    const MatrixXd r = oracle::random_orthogonal(rng, 5);
    EXPECT_LE((procrustes(2.5 * r) - r).cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(Procrustes, OrthogonalAndIdempotent) {
  std::mt19937_64 rng(6);
  for (int trial = 0; trial < 50; ++trial) {
    const MatrixXd m = oracle::random_matrix(rng, 6, 6);
    const MatrixXd p = procrustes(m);
    EXPECT_LE((p.transpose() * p - MatrixXd::Identity(6, 6)).cwiseAbs().maxCoeff(), 1e-10);
    EXPECT_LE((procrustes(p) - p).cwiseAbs().maxCoeff(), 1e-10);
  }
}

TEST(Procrustes, RankDeficientStillOrthogonal) {
  std::mt19937_64 rng(7);
  const MatrixXd u = oracle::random_matrix(rng, 5, 2);
  const MatrixXd p = procrustes(MatrixXd(u * u.transpose()));
  EXPECT_LE((p.transpose() * p - MatrixXd::Identity(5, 5)).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(Procrustes, MaximizesTraceAgainstSampledOrthogonals) {
  // argmin ||Z - P C|| over orthogonal P maximizes tr(P^T M) with M = Z C^T.
  std::mt19937_64 rng(8);
  const MatrixXd m = oracle::random_matrix(rng, 4, 4);
  const double best = (procrustes(m).transpose() * m).trace();
  for (int s = 0; s < 1000; ++s) {
    const MatrixXd r = oracle::random_orthogonal(rng, 4);
    EXPECT_LE((r.transpose() * m).trace(), best + 1e-12);
  }
}

TEST(Procrustes, TwoDimensionalAngleGrid) {
  std::mt19937_64 rng(9);
  for (int trial = 0; trial < 5; ++trial) {
    const MatrixXd m = oracle::random_matrix(rng, 2, 2);
    const double best = (procrustes(m).transpose() * m).trace();
    const int grid = 5000;
    for (int a = 0; a < grid; ++a) {
      const double t = 2 * std::numbers::pi * a / grid;
      MatrixXd rot(2, 2), refl(2, 2);
      rot << std::cos(t), -std::sin(t), std::sin(t), std::cos(t);
      refl << std::cos(t), std::sin(t), std::sin(t), -std::cos(t);
      EXPECT_LE((rot.transpose() * m).trace(), best + 1e-12);
      EXPECT_LE((refl.transpose() * m).trace(), best + 1e-12);
    }
  }
}

TEST(Procrustes, RejectsNonSquareAndNonFinite) {
  EXPECT_THROW(procrustes(MatrixXd::Ones(2, 3)), ShapeError);
  MatrixXd m = MatrixXd::Identity(2, 2);
  m(0, 1) = std::numeric_limits<double>::quiet_NaN();
  EXPECT_THROW(procrustes(m), InputError);
  m(0, 1) = std::numeric_limits<double>::infinity();
  EXPECT_THROW(procrustes(m), InputError);
}

TEST(StackedError, OffsetsPartitionRows) {
  const auto s = StackedError<double>::stack(
      {MatrixXd::Constant(2, 3, 1.0), MatrixXd::Constant(4, 3, 2.0),
       MatrixXd::Constant(1, 3, 3.0)});
  ASSERT_EQ(s.num_blocks(), 3u);
  EXPECT_EQ(s.offsets, (std::vector<Eigen::Index>{0, 2, 6, 7}));
  EXPECT_EQ(s.stacked.rows(), 7);
  EXPECT_EQ(s.block(1).rows(), 4);
  EXPECT_TRUE((s.block(1).array() == 2.0).all());
}

TEST(StackedError, ColumnMismatchThrows) {
  EXPECT_THROW(StackedError<double>::stack({MatrixXd(2, 3), MatrixXd(2, 4)}),
               ShapeError);
  EXPECT_THROW(StackedError<double>::stack({}), ShapeError);
}

}  // namespace
}  // namespace tisrl
