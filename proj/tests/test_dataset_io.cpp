#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <random>

#include <unistd.h>

#include "oracles.hpp"
#include "tisrl/dataset_io.hpp"
#include "tisrl/errors.hpp"

namespace tisrl {
namespace {

namespace fs = std::filesystem;
using Eigen::MatrixXd;

class TempDir {
 public:
  TempDir() {
    static int counter = 0;
    path_ = fs::temp_directory_path() /
            ("tisrl_io_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    fs::remove_all(path_);
    fs::create_directories(path_);
  }
  ~TempDir() { fs::remove_all(path_); }
  const fs::path& path() const { return path_; }

 private:
  fs::path path_;
};

std::string read_file(const fs::path& p) {
  std::ifstream in(p);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_file(const fs::path& p, const std::string& text) {
  std::ofstream out(p);
  out << text;
}

MultiViewDataset random_dataset(std::uint64_t seed, bool with_labels) {
  std::mt19937_64 rng(seed);
  MultiViewDataset d;
  d.name = "random";
  d.views = {oracle::random_matrix(rng, 3, 6), oracle::random_matrix(rng, 5, 6) * 1e-7};
  d.views[0](0, 0) = 1.0 / 3.0;
  d.views[1](2, 3) = -std::numeric_limits<double>::min();
  if (with_labels) {
    d.labels = std::vector<int>{0, 1, 0, 1, 1, 0};
    d.num_clusters = 2;
  }
  return d;
}

TEST(RoundTrip, BitExact) {
  TempDir dir;
  const MultiViewDataset d = random_dataset(1, true);
  save_dataset(d, dir.path());
  const MultiViewDataset back = load_dataset(dir.path());
  EXPECT_EQ(back.name, d.name);
  ASSERT_EQ(back.views.size(), 2u);
  EXPECT_EQ(back.views[0], d.views[0]);
  EXPECT_EQ(back.views[1], d.views[1]);
  EXPECT_EQ(back.labels, d.labels);
  EXPECT_EQ(back.num_clusters, d.num_clusters);
}

TEST(RoundTrip, WithoutLabels) {
  TempDir dir;
  save_dataset(random_dataset(2, false), dir.path());
  const MultiViewDataset back = load_dataset(dir.path());
  EXPECT_FALSE(back.labels.has_value());
  EXPECT_FALSE(back.num_clusters.has_value());
}

TEST(RoundTrip, ShortestDecimals) {
  EXPECT_EQ(format_shortest(0.1), "0.1");
  EXPECT_EQ(format_shortest(1.0), "1");
  const double third = 1.0 / 3.0;
  EXPECT_EQ(std::stod(format_shortest(third)), third);
}

TEST(Load, ColumnCountMismatchNamesTheView) {
  TempDir dir;
  save_dataset(random_dataset(3, true), dir.path());
  // Drop the last sample column from view 1.
  std::ifstream in(dir.path() / "view_1.csv");
  std::string line, rewritten;
  while (std::getline(in, line)) rewritten += line.substr(0, line.rfind(',')) + "\n";
  in.close();
  write_file(dir.path() / "view_1.csv", rewritten);
  try {
    load_dataset(dir.path());
    FAIL() << "expected DatasetError";
  } catch (const DatasetError& e) {
    EXPECT_NE(std::string(e.what()).find("view_1.csv"), std::string::npos) << e.what();
  }
}

TEST(Load, DistinctDiagnostics) {
  TempDir dir;
  EXPECT_THROW(load_dataset(dir.path()), DatasetError);  // no manifest

  save_dataset(random_dataset(4, true), dir.path());
  fs::remove(dir.path() / "view_0.csv");
  try {
    load_dataset(dir.path());
    FAIL();
  } catch (const DatasetError& e) {
    EXPECT_NE(std::string(e.what()).find("missing"), std::string::npos) << e.what();
  }

  save_dataset(random_dataset(4, true), dir.path());
  write_file(dir.path() / "labels.csv", "0\n1\n0\n5\n1\n0\n");
  try {
    load_dataset(dir.path());
    FAIL();
  } catch (const DatasetError& e) {
    EXPECT_NE(std::string(e.what()).find("label 5"), std::string::npos) << e.what();
  }

  save_dataset(random_dataset(4, true), dir.path());
  std::string csv = read_file(dir.path() / "view_0.csv");
  csv.replace(csv.find(','), 1, ",abc,");
  write_file(dir.path() / "view_0.csv", csv);
  try {
    load_dataset(dir.path());
    FAIL();
  } catch (const DatasetError& e) {
    EXPECT_NE(std::string(e.what()).find("view_0.csv:1"), std::string::npos) << e.what();
  }
}

TEST(Labels, MalformedLineReportsLineNumber) {
  TempDir dir;
  write_file(dir.path() / "l.csv", "0\n1\nx\n");
  try {
    read_labels(dir.path() / "l.csv");
    FAIL();
  } catch (const DatasetError& e) {
    EXPECT_NE(std::string(e.what()).find(":3"), std::string::npos) << e.what();
  }
}

TEST(Labels, RoundTrip) {
  TempDir dir;
  const std::vector<int> labels{2, 0, 1, 1, 0};
  write_labels(dir.path() / "l.csv", labels);
  EXPECT_EQ(read_labels(dir.path() / "l.csv"), labels);
}

TEST(Validate, Invariants) {
  MultiViewDataset d = random_dataset(5, true);
  EXPECT_NO_THROW(validate(d));
  d.views[1] = MatrixXd::Ones(5, 4);
  EXPECT_THROW(validate(d), DatasetError);
  d = random_dataset(5, true);
  d.labels = std::vector<int>{0, 0, 0, 0, 0, 0};  // cluster 1 empty
  EXPECT_THROW(validate(d), DatasetError);
  d = random_dataset(5, true);
  d.views[0](1, 1) = std::numeric_limits<double>::infinity();
  EXPECT_THROW(validate(d), DatasetError);
  d = random_dataset(5, false);
  d.views = {MatrixXd::Ones(2, 1), MatrixXd::Ones(2, 1)};  // n < v
  EXPECT_THROW(validate(d), DatasetError);
}

TEST(Normalize, UnitColumns) {
  MultiViewDataset d;
  d.views = {MatrixXd(2, 1)};
  d.views[0] << 3, 4;
  const MultiViewDataset out = normalize(d);
  EXPECT_NEAR(out.views[0](0, 0), 0.6, 1e-16);
  EXPECT_NEAR(out.views[0](1, 0), 0.8, 1e-16);
}

TEST(Normalize, Idempotent) {
  const MultiViewDataset once = normalize(random_dataset(6, true));
  const MultiViewDataset twice = normalize(once);
  for (std::size_t i = 0; i < once.views.size(); ++i)
    EXPECT_LE((once.views[i] - twice.views[i]).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(Normalize, ZeroColumnNamed) {
  MultiViewDataset d = random_dataset(7, false);
  d.views[1].col(4).setZero();
  try {
    normalize(d);
    FAIL();
  } catch (const InputError& e) {
    EXPECT_NE(std::string(e.what()).find("view 1 column 4"), std::string::npos) << e.what();
  }
}

SynthSpec small_spec(double sigma, std::uint64_t seed) {
  SynthSpec s;
  s.views = 2;
  s.n = 40;
  s.k = 3;
  s.r = 2;
  s.sigma = sigma;
  s.seed = seed;
  return s;
}

TEST(Synth, Deterministic) {
  const MultiViewDataset a = synth(small_spec(0.1, 42));
  const MultiViewDataset b = synth(small_spec(0.1, 42));
  const MultiViewDataset c = synth(small_spec(0.1, 43));
  EXPECT_EQ(a.views[0], b.views[0]);
  EXPECT_EQ(a.views[1], b.views[1]);
  EXPECT_EQ(a.labels, b.labels);
  EXPECT_NE(a.views[0], c.views[0]);
}

TEST(Synth, ShapesAndLabels) {
  SynthSpec s = small_spec(0.0, 1);
  s.dims = {9, 12};
  const MultiViewDataset d = synth(s);
  ASSERT_EQ(d.views.size(), 2u);
  EXPECT_EQ(d.views[0].rows(), 9);
  EXPECT_EQ(d.views[1].rows(), 12);
  EXPECT_EQ(d.num_samples(), 40);
  EXPECT_EQ(d.num_clusters, 3);
  EXPECT_NO_THROW(validate(d));
  std::vector<int> counts(3, 0);
  for (int l : *d.labels) ++counts[l];
  for (int c : counts) EXPECT_GE(c, s.r + 1);
}

TEST(Synth, NoiselessSamplesLieInClusterSubspace) {
  const MultiViewDataset d = synth(small_spec(0.0, 5));
  for (const auto& x : d.views) {
    for (int c = 0; c < 3; ++c) {
      std::vector<Eigen::Index> cols;
      for (Eigen::Index j = 0; j < x.cols(); ++j)
        if ((*d.labels)[j] == c) cols.push_back(j);
      MatrixXd block(x.rows(), static_cast<Eigen::Index>(cols.size()));
      for (std::size_t t = 0; t < cols.size(); ++t) block.col(t) = x.col(cols[t]);
      Eigen::JacobiSVD<MatrixXd> svd(block, Eigen::ComputeThinU);
      const Eigen::VectorXd sv = svd.singularValues();
      EXPECT_EQ((sv.array() > 1e-10 * sv(0)).count(), 2);
      const MatrixXd basis = svd.matrixU().leftCols(2);
      const MatrixXd residual = block - basis * (basis.transpose() * block);
      EXPECT_LE(residual.cwiseAbs().maxCoeff(), 1e-12);
    }
  }
}

TEST(Synth, InfeasibleSpecsRejected) {
  SynthSpec s = small_spec(0.0, 1);
  s.dims = {3, 12};  // r*k = 6 > 3
  EXPECT_THROW(synth(s), InputError);
  s = small_spec(0.0, 1);
  s.n = 8;  // below k*(r+1) = 9
  EXPECT_THROW(synth(s), InputError);
  s = small_spec(-1.0, 1);
  EXPECT_THROW(synth(s), InputError);
  s = small_spec(0.0, 1);
  s.dims = {10};
  EXPECT_THROW(synth(s), InputError);
}

}  // namespace
}  // namespace tisrl
