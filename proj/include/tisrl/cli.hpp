#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "tisrl/dataset_io.hpp"
#include "tisrl/metrics.hpp"
#include "tisrl/solver.hpp"

namespace tisrl {

/// Exit codes shared by every subcommand.
enum ExitCode : int { kExitOk = 0, kExitInputError = 1, kExitNotConverged = 2 };

/// Solver plus spectral clustering on one dataset.
struct ClusterRun {
  SolverResult solver;
  Eigen::MatrixXd affinity;
  std::vector<int> labels;  // from the first repeat
  /// Mean over repeats; present when the dataset has labels.
  std::optional<ClusteringMetrics> metrics;
};

/// Solves once, then clusters the affinity `repeats` times. Repeat r seeds
/// k-means with seed + 20 r (each repeat draws 20 restart seeds).
ClusterRun cluster_dataset(const MultiViewDataset& dataset,
                           const TisrlConfig& config, int k,
                           std::uint64_t seed, int repeats = 1);

/// The four metrics as a JSON object, every value with 6 decimals.
std::string metrics_json(const ClusteringMetrics& m);

/// Entry point of the `tisrl` executable:
///   cluster --data <dir> --lambda <f> [--k <int>] [--seed <int>]
///           [--normalize] [--repeats <int>] [--max-iters <int>] --out <dir>
///   synth   --views <int> --n <int> --k <int> --r <int> [--dims <list>]
///           [--sigma <f>] [--seed <int>] --out <dir>
///   sweep   --data <dir> --lambdas <list> [--k <int>] [--seed <int>]
///           [--normalize] [--repeats <int>] --out <dir>
///   eval    --truth <file> --pred <file> [--out <file>]
/// Returns 0 on success, 1 on input errors, 2 when the solver stops at its
/// iteration cap.
int run_cli(int argc, const char* const* argv, std::ostream& out,
            std::ostream& err);

}  // namespace tisrl
