#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace tisrl {

/// v feature matrices over the same n samples. Column j of every view is
/// sample j.
struct MultiViewDataset {
  std::string name;
  std::vector<Eigen::MatrixXd> views;  // d_i x n
  std::optional<std::vector<int>> labels;
  std::optional<int> num_clusters;

  Eigen::Index num_views() const {
    return static_cast<Eigen::Index>(views.size());
  }
  Eigen::Index num_samples() const {
    return views.empty() ? 0 : views.front().cols();
  }
};

/// Throws DatasetError unless: v >= 1, every view has n columns and finite
/// entries, n >= v, labels (if any) have length n with every value in
/// 0..k-1 and every cluster nonempty, and k <= n.
void validate(const MultiViewDataset& dataset);

/// Directory layout:
///   manifest.json  {"name", "num_views", "num_samples", "num_clusters",
///                   "views": [{"file", "dim"}...], "labels": "labels.csv"}
///   <view file>    d_i rows of n comma-separated decimals, no header
///   labels.csv     one integer per line (optional)
/// num_clusters and labels may be absent or null.
MultiViewDataset load_dataset(const std::filesystem::path& dir);

/// Writes the layout above. Doubles use the shortest decimal that parses
/// back to the same value, so save followed by load is bit-exact.
void save_dataset(const MultiViewDataset& dataset,
                  const std::filesystem::path& dir);

/// Scales every sample column of every view to unit l2 norm. Throws
/// InputError naming the view and column of any all-zero column.
MultiViewDataset normalize(const MultiViewDataset& dataset);

/// Synthetic union-of-subspaces data.
///
/// Random streams are std::mt19937_64 engines seeded through std::seed_seq:
///   labels                     {seed, 0}
///   basis of (view i, cluster c) {seed, 1, i, c}
///   samples of view i          {seed, 2, i}
/// Labels are a shuffled balanced assignment (sample j gets j mod k before
/// shuffling). Each basis is the Q factor of a d_i x r standard normal
/// matrix; sample x = B_{i,label} a + sigma e with a, e standard normal.
struct SynthSpec {
  int views = 3;
  int n = 100;
  int k = 5;
  int r = 4;
  std::vector<int> dims;  // one per view; empty means default_dims()
  double sigma = 0.0;
  std::uint64_t seed = 0;

  /// k*r + 10*(i+1) for view i.
  std::vector<int> default_dims() const;
  std::vector<int> resolved_dims() const;
  /// Throws InputError for an infeasible spec.
  void validate() const;
};

MultiViewDataset synth(const SynthSpec& spec);

/// One integer per line; blank trailing lines are ignored. Throws
/// DatasetError with the 1-based line number on a malformed line.
std::vector<int> read_labels(const std::filesystem::path& path);
void write_labels(const std::filesystem::path& path,
                  const std::vector<int>& labels);

/// Shortest round-trip decimal rendering of a double.
std::string format_shortest(double value);

}  // namespace tisrl
