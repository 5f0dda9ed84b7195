#include "tisrl/cli.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <ostream>

#include <CLI11.hpp>

#include "tisrl/errors.hpp"
#include "tisrl/spectral_clustering.hpp"

namespace tisrl {
namespace fs = std::filesystem;

namespace {

constexpr int kRestarts = 20;

std::string fixed6(double value) {
  char buffer[64];
  std::snprintf(buffer, sizeof(buffer), "%.6f", value);
  return buffer;
}

const char* status_name(SolverStatus status) {
  return status == SolverStatus::converged ? "converged" : "max_iters_reached";
}

void write_affinity(const fs::path& path, const Eigen::MatrixXd& w) {
  std::ofstream out(path);
  if (!out) throw DatasetError(path.string() + ": cannot write");
  char buffer[32];
  for (Eigen::Index i = 0; i < w.rows(); ++i) {
    for (Eigen::Index j = 0; j < w.cols(); ++j) {
      std::snprintf(buffer, sizeof(buffer), j ? ",%.6e" : "%.6e", w(i, j));
      out << buffer;
    }
    out << '\n';
  }
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw DatasetError(path.string() + ": cannot write");
  out << text;
}

int resolve_k(const MultiViewDataset& d, const std::optional<int>& flag) {
  if (flag) return *flag;
  if (d.num_clusters) return *d.num_clusters;
  throw InputError("number of clusters unknown: pass --k or set num_clusters");
}

struct ClusterFlags {
  std::string data;
  double lambda = 0;
  std::optional<int> k;
  std::uint64_t seed = 0;
  bool normalize = false;
  int repeats = 1;
  int max_iters = 200;
  std::string out;
};

MultiViewDataset prepare(const ClusterFlags& flags) {
  MultiViewDataset d = load_dataset(flags.data);
  return flags.normalize ? normalize(d) : d;
}

int cmd_cluster(const ClusterFlags& flags, std::ostream& out) {
  const MultiViewDataset d = prepare(flags);
  TisrlConfig config;
  config.lambda = flags.lambda;
  config.max_iters = flags.max_iters;
  const ClusterRun run =
      cluster_dataset(d, config, resolve_k(d, flags.k), flags.seed, flags.repeats);

  const fs::path dir = flags.out;
  fs::create_directories(dir);
  write_labels(dir / "labels.csv", run.labels);
  if (run.metrics) write_text(dir / "metrics.json", metrics_json(*run.metrics));
  {
    std::ofstream trace(dir / "trace.csv");
    if (!trace) throw DatasetError((dir / "trace.csv").string() + ": cannot write");
    run.solver.trace.write_csv(trace);
  }
  write_affinity(dir / "affinity.csv", run.affinity);

  out << status_name(run.solver.status) << " after "
      << run.solver.trace.rows.size() << " iterations\n";
  if (run.metrics) out << metrics_json(*run.metrics);
  return run.solver.status == SolverStatus::converged ? kExitOk
                                                      : kExitNotConverged;
}

int cmd_sweep(const ClusterFlags& flags, const std::vector<double>& lambdas,
              std::ostream& out) {
  if (lambdas.empty()) throw InputError("sweep: empty lambda grid");
  for (double l : lambdas)
    if (!(l > 0)) throw InputError("sweep: every lambda must be positive");
  const MultiViewDataset d = prepare(flags);
  if (!d.labels) throw InputError("sweep: dataset has no ground-truth labels");
  const int k = resolve_k(d, flags.k);

  std::string csv = "lambda,nmi,acc,fscore,precision,iters,status\n";
  for (double lambda : lambdas) {
    TisrlConfig config;
    config.lambda = lambda;
    config.max_iters = flags.max_iters;
    std::string row = format_shortest(lambda) + ",";
    try {
      const ClusterRun run = cluster_dataset(d, config, k, flags.seed, flags.repeats);
      const auto& m = *run.metrics;
      row += fixed6(m.nmi) + "," + fixed6(m.acc) + "," + fixed6(m.fscore) + "," +
             fixed6(m.precision) + "," +
             std::to_string(run.solver.trace.rows.size()) + "," +
             status_name(run.solver.status);
    } catch (const std::exception& e) {
      row += "nan,nan,nan,nan,0,error";
      out << "lambda " << format_shortest(lambda) << ": " << e.what() << '\n';
    }
    csv += row + "\n";
  }
  fs::create_directories(flags.out);
  write_text(fs::path(flags.out) / "sweep.csv", csv);
  out << csv;
  return kExitOk;
}

int cmd_synth(SynthSpec spec, const std::string& out_dir, std::ostream& out) {
  const MultiViewDataset d = synth(spec);
  save_dataset(d, out_dir);
  out << "wrote " << d.num_views() << " views x " << d.num_samples()
      << " samples to " << out_dir << '\n';
  return kExitOk;
}

int cmd_eval(const std::string& truth_path, const std::string& pred_path,
             const std::string& out_path, std::ostream& out) {
  const auto truth = read_labels(truth_path);
  const auto pred = read_labels(pred_path);
  if (truth.size() != pred.size()) {
    throw InputError("eval: " + std::to_string(truth.size()) + " true labels vs " +
                     std::to_string(pred.size()) + " predicted");
  }
  const std::string json = metrics_json(evaluate(truth, pred));
  if (!out_path.empty()) write_text(out_path, json);
  out << json;
  return kExitOk;
}

}  // namespace

ClusterRun cluster_dataset(const MultiViewDataset& dataset,
                           const TisrlConfig& config, int k,
                           std::uint64_t seed, int repeats) {
  validate(dataset);
  if (k < 1 || k > dataset.num_samples()) {
    throw InputError("k = " + std::to_string(k) + " outside 1.." +
                     std::to_string(dataset.num_samples()));
  }
  if (repeats < 1) throw InputError("repeats must be >= 1");

  ClusterRun run;
  run.solver = tisrl::run(dataset.views, config);
  run.affinity = intrinsic_affinity(run.solver.state);

  ClusteringMetrics sum;
  for (int r = 0; r < repeats; ++r) {
    SpectralConfig sc;
    sc.k = k;
    sc.kmeans_restarts = kRestarts;
    sc.seed = seed + static_cast<std::uint64_t>(r) * kRestarts;
    std::vector<int> labels = cluster(run.affinity, sc);
    if (dataset.labels) {
      const ClusteringMetrics m = evaluate(*dataset.labels, labels);
      sum.nmi += m.nmi;
      sum.acc += m.acc;
      sum.fscore += m.fscore;
      sum.precision += m.precision;
    }
    if (r == 0) run.labels = std::move(labels);
  }
  if (dataset.labels) {
    run.metrics = ClusteringMetrics{sum.nmi / repeats, sum.acc / repeats,
                                    sum.fscore / repeats, sum.precision / repeats};
  }
  return run;
}

std::string metrics_json(const ClusteringMetrics& m) {
  return "{\n  \"nmi\": " + fixed6(m.nmi) + ",\n  \"acc\": " + fixed6(m.acc) +
         ",\n  \"fscore\": " + fixed6(m.fscore) + ",\n  \"precision\": " +
         fixed6(m.precision) + "\n}\n";
}

int run_cli(int argc, const char* const* argv, std::ostream& out,
            std::ostream& err) {
  CLI::App app{"Multi-view clustering by tensor-regularized intrinsic subspace learning"};
  app.require_subcommand(1);

  ClusterFlags cluster_flags;
  auto* cluster_cmd = app.add_subcommand("cluster", "Learn the affinity and cluster a dataset");
  cluster_cmd->add_option("--data", cluster_flags.data, "Dataset directory")->required();
  cluster_cmd->add_option("--lambda", cluster_flags.lambda, "Error-term weight")->required();
  cluster_cmd->add_option("--k", cluster_flags.k, "Number of clusters (default: manifest)");
  cluster_cmd->add_option("--seed", cluster_flags.seed, "k-means seed");
  cluster_cmd->add_flag("--normalize", cluster_flags.normalize, "Scale samples to unit norm");
  cluster_cmd->add_option("--repeats", cluster_flags.repeats, "Spectral clustering repeats");
  cluster_cmd->add_option("--max-iters", cluster_flags.max_iters, "Solver iteration cap");
  cluster_cmd->add_option("--out", cluster_flags.out, "Output directory")->required();

  ClusterFlags sweep_flags;
  std::vector<double> lambdas;
  auto* sweep_cmd = app.add_subcommand("sweep", "Cluster once per lambda and tabulate metrics");
  sweep_cmd->add_option("--data", sweep_flags.data, "Dataset directory")->required();
  sweep_cmd->add_option("--lambdas", lambdas, "Comma-separated lambda grid")
      ->required()
      ->delimiter(',');
  sweep_cmd->add_option("--k", sweep_flags.k, "Number of clusters (default: manifest)");
  sweep_cmd->add_option("--seed", sweep_flags.seed, "k-means seed");
  sweep_cmd->add_flag("--normalize", sweep_flags.normalize, "Scale samples to unit norm");
  sweep_cmd->add_option("--repeats", sweep_flags.repeats, "Spectral clustering repeats");
  sweep_cmd->add_option("--max-iters", sweep_flags.max_iters, "Solver iteration cap");
  sweep_cmd->add_option("--out", sweep_flags.out, "Output directory")->required();

  SynthSpec spec;
  std::string synth_out;
  auto* synth_cmd = app.add_subcommand("synth", "Generate a union-of-subspaces dataset");
  synth_cmd->add_option("--views", spec.views, "Number of views");
  synth_cmd->add_option("--n", spec.n, "Number of samples");
  synth_cmd->add_option("--k", spec.k, "Number of clusters");
  synth_cmd->add_option("--r", spec.r, "Subspace dimension");
  synth_cmd->add_option("--dims", spec.dims, "Comma-separated ambient dims")->delimiter(',');
  synth_cmd->add_option("--sigma", spec.sigma, "Noise standard deviation");
  synth_cmd->add_option("--seed", spec.seed, "Random seed");
  synth_cmd->add_option("--out", synth_out, "Output directory")->required();

  std::string truth_path, pred_path, eval_out;
  auto* eval_cmd = app.add_subcommand("eval", "Score predicted labels against ground truth");
  eval_cmd->add_option("--truth", truth_path, "Ground-truth labels file")->required();
  eval_cmd->add_option("--pred", pred_path, "Predicted labels file")->required();
  eval_cmd->add_option("--out", eval_out, "Write metrics JSON here as well");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err) == 0 ? kExitOk : kExitInputError;
  }

  try {
    if (*cluster_cmd) return cmd_cluster(cluster_flags, out);
    if (*sweep_cmd) return cmd_sweep(sweep_flags, lambdas, out);
    if (*synth_cmd) return cmd_synth(spec, synth_out, out);
    if (*eval_cmd) return cmd_eval(truth_path, pred_path, eval_out, out);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitInputError;
  }
  return kExitInputError;
}

}  // namespace tisrl
