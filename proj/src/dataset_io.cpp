#include "tisrl/dataset_io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>
#include <string_view>

#include <json.hpp>

#include "tisrl/errors.hpp"

namespace tisrl {
namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return std::string(s.substr(first, last - first + 1));
}

Eigen::MatrixXd read_view_csv(const fs::path& path, Eigen::Index rows,
                              Eigen::Index cols) {
  std::ifstream in(path);
  if (!in) throw DatasetError(path.string() + ": cannot open view file");
  Eigen::MatrixXd m(rows, cols);
  std::string line;
  Eigen::Index row = 0;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    if (row >= rows) {
      throw DatasetError(path.string() + ":" + std::to_string(line_no) +
                         ": more rows than the declared dim " +
                         std::to_string(rows));
    }
    Eigen::Index col = 0;
    std::size_t start = 0;
    while (start <= line.size()) {
      std::size_t end = line.find(',', start);
      if (end == std::string::npos) end = line.size();
      const std::string field = trim(std::string_view(line).substr(start, end - start));
      if (col >= cols) {
        throw DatasetError(path.string() + ":" + std::to_string(line_no) +
                           ": more than the declared " + std::to_string(cols) +
                           " columns (num_samples)");
      }
      double value = 0;
      const auto [ptr, ec] =
          std::from_chars(field.data(), field.data() + field.size(), value);
      if (ec != std::errc() || ptr != field.data() + field.size() ||
          field.empty()) {
        throw DatasetError(path.string() + ":" + std::to_string(line_no) +
                           ": column " + std::to_string(col + 1) +
                           ": malformed number '" + field + "'");
      }
      m(row, col++) = value;
      start = end + 1;
    }
    if (col != cols) {
      throw DatasetError(path.string() + ":" + std::to_string(line_no) +
                         ": has " + std::to_string(col) +
                         " columns but num_samples is " + std::to_string(cols));
    }
    ++row;
  }
  if (row != rows) {
    throw DatasetError(path.string() + ": has " + std::to_string(row) +
                       " rows but the manifest declares dim " +
                       std::to_string(rows));
  }
  return m;
}

void write_view_csv(const fs::path& path, const Eigen::MatrixXd& m) {
  std::ofstream out(path);
  if (!out) throw DatasetError(path.string() + ": cannot write view file");
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      if (j) out << ',';
      out << format_shortest(m(i, j));
    }
    out << '\n';
  }
}

template <typename T>
T manifest_field(const json& manifest, const char* key, const fs::path& path) {
  if (!manifest.contains(key)) {
    throw DatasetError(path.string() + ": missing field '" + key + "'");
  }
  try {
    return manifest.at(key).get<T>();
  } catch (const json::exception& e) {
    throw DatasetError(path.string() + ": field '" + key + "': " + e.what());
  }
}

}  // namespace

std::string format_shortest(double value) {
  char buffer[64];
  const auto [ptr, ec] = std::to_chars(buffer, buffer + sizeof(buffer), value);
  return std::string(buffer, ptr);
}

void validate(const MultiViewDataset& d) {
  if (d.views.empty()) throw DatasetError(d.name + ": dataset has no views");
  const Eigen::Index n = d.num_samples();
  for (std::size_t i = 0; i < d.views.size(); ++i) {
    if (d.views[i].cols() != n) {
      throw DatasetError(d.name + ": view " + std::to_string(i) + " has " +
                         std::to_string(d.views[i].cols()) +
                         " samples, expected " + std::to_string(n));
    }
    if (d.views[i].rows() < 1) {
      throw DatasetError(d.name + ": view " + std::to_string(i) +
                         " has no features");
    }
    if (!d.views[i].allFinite()) {
      throw DatasetError(d.name + ": view " + std::to_string(i) +
                         " has non-finite entries");
    }
  }
  if (n < d.num_views()) {
    throw DatasetError(d.name + ": " + std::to_string(n) +
                       " samples is fewer than " +
                       std::to_string(d.num_views()) + " views");
  }
  if (d.num_clusters && (*d.num_clusters < 1 || *d.num_clusters > n)) {
    throw DatasetError(d.name + ": num_clusters " +
                       std::to_string(*d.num_clusters) + " outside 1.." +
                       std::to_string(n));
  }
  if (d.labels) {
    const auto& labels = *d.labels;
    if (static_cast<Eigen::Index>(labels.size()) != n) {
      throw DatasetError(d.name + ": " + std::to_string(labels.size()) +
                         " labels for " + std::to_string(n) + " samples");
    }
    const int k = d.num_clusters
                      ? *d.num_clusters
                      : *std::max_element(labels.begin(), labels.end()) + 1;
    std::vector<int> counts(static_cast<std::size_t>(std::max(k, 0)), 0);
    for (std::size_t j = 0; j < labels.size(); ++j) {
      if (labels[j] < 0 || labels[j] >= k) {
        throw DatasetError(d.name + ": label " + std::to_string(labels[j]) +
                           " of sample " + std::to_string(j) +
                           " outside 0.." + std::to_string(k - 1));
      }
      ++counts[labels[j]];
    }
    for (int c = 0; c < k; ++c) {
      if (counts[c] == 0) {
        throw DatasetError(d.name + ": cluster " + std::to_string(c) +
                           " has no samples");
      }
    }
  }
}

MultiViewDataset load_dataset(const fs::path& dir) {
  const fs::path manifest_path = dir / "manifest.json";
  std::ifstream in(manifest_path);
  if (!in) throw DatasetError(manifest_path.string() + ": cannot open manifest");
  json manifest;
  try {
    manifest = json::parse(in);
  } catch (const json::exception& e) {
    throw DatasetError(manifest_path.string() + ": " + e.what());
  }

  MultiViewDataset d;
  d.name = manifest.value("name", dir.filename().string());
  const auto num_views = manifest_field<int>(manifest, "num_views", manifest_path);
  const auto n = manifest_field<Eigen::Index>(manifest, "num_samples", manifest_path);
  if (n < 1) throw DatasetError(manifest_path.string() + ": num_samples must be positive");
  if (manifest.contains("num_clusters") && !manifest["num_clusters"].is_null())
    d.num_clusters = manifest_field<int>(manifest, "num_clusters", manifest_path);

  const auto views = manifest_field<json>(manifest, "views", manifest_path);
  if (!views.is_array() || static_cast<int>(views.size()) != num_views) {
    throw DatasetError(manifest_path.string() + ": 'views' must list " +
                       std::to_string(num_views) + " entries");
  }
  for (std::size_t i = 0; i < views.size(); ++i) {
    const auto file = manifest_field<std::string>(views[i], "file", manifest_path);
    const auto dim = manifest_field<Eigen::Index>(views[i], "dim", manifest_path);
    if (dim < 1) {
      throw DatasetError(manifest_path.string() + ": view " +
                         std::to_string(i) + " dim must be positive");
    }
    const fs::path view_path = dir / file;
    if (!fs::exists(view_path)) {
      throw DatasetError(view_path.string() + ": view " + std::to_string(i) +
                         " file is missing");
    }
    d.views.push_back(read_view_csv(view_path, dim, n));
  }

  if (manifest.contains("labels") && !manifest["labels"].is_null()) {
    const fs::path labels_path =
        dir / manifest_field<std::string>(manifest, "labels", manifest_path);
    if (!fs::exists(labels_path)) {
      throw DatasetError(labels_path.string() + ": labels file is missing");
    }
    d.labels = read_labels(labels_path);
    if (static_cast<Eigen::Index>(d.labels->size()) != n) {
      throw DatasetError(labels_path.string() + ": has " +
                         std::to_string(d.labels->size()) +
                         " labels but num_samples is " + std::to_string(n));
    }
  }
  validate(d);
  return d;
}

void save_dataset(const MultiViewDataset& d, const fs::path& dir) {
  validate(d);
  fs::create_directories(dir);
  json manifest;
  manifest["name"] = d.name;
  manifest["num_views"] = d.views.size();
  manifest["num_samples"] = d.num_samples();
  manifest["num_clusters"] = d.num_clusters ? json(*d.num_clusters) : json(nullptr);
  manifest["views"] = json::array();
  for (std::size_t i = 0; i < d.views.size(); ++i) {
    const std::string file = "view_" + std::to_string(i) + ".csv";
    manifest["views"].push_back({{"file", file}, {"dim", d.views[i].rows()}});
    write_view_csv(dir / file, d.views[i]);
  }
  if (d.labels) {
    manifest["labels"] = "labels.csv";
    write_labels(dir / "labels.csv", *d.labels);
  } else {
    manifest["labels"] = nullptr;
  }
  std::ofstream out(dir / "manifest.json");
  if (!out) throw DatasetError((dir / "manifest.json").string() + ": cannot write");
  out << manifest.dump(2) << '\n';
}

MultiViewDataset normalize(const MultiViewDataset& d) {
  MultiViewDataset out = d;
  for (std::size_t i = 0; i < out.views.size(); ++i) {
    auto& view = out.views[i];
    for (Eigen::Index j = 0; j < view.cols(); ++j) {
      const double norm = view.col(j).norm();
      if (norm == 0.0) {
        throw InputError("normalize: view " + std::to_string(i) + " column " +
                         std::to_string(j) + " is all zero");
      }
      view.col(j) /= norm;
    }
  }
  return out;
}

std::vector<int> SynthSpec::default_dims() const {
  std::vector<int> out;
  for (int i = 0; i < views; ++i) out.push_back(k * r + 10 * (i + 1));
  return out;
}

std::vector<int> SynthSpec::resolved_dims() const {
  return dims.empty() ? default_dims() : dims;
}

void SynthSpec::validate() const {
  if (views < 1) throw InputError("synth: views must be >= 1");
  if (k < 1) throw InputError("synth: k must be >= 1");
  if (r < 1) throw InputError("synth: r must be >= 1");
  if (!(sigma >= 0.0) || !std::isfinite(sigma))
    throw InputError("synth: sigma must be finite and >= 0");
  const auto d = resolved_dims();
  if (static_cast<int>(d.size()) != views) {
    throw InputError("synth: " + std::to_string(d.size()) + " dims for " +
                     std::to_string(views) + " views");
  }
  const int min_dim = *std::min_element(d.begin(), d.end());
  if (r > min_dim) {
    throw InputError("synth: subspace dim r = " + std::to_string(r) +
                     " exceeds smallest ambient dim " + std::to_string(min_dim));
  }
  if (k * r > min_dim) {
    throw InputError("synth: k*r = " + std::to_string(k * r) +
                     " exceeds smallest ambient dim " + std::to_string(min_dim) +
                     "; subspaces cannot be independent");
  }
  if (n < k * (r + 1)) {
    throw InputError("synth: n = " + std::to_string(n) + " is below k*(r+1) = " +
                     std::to_string(k * (r + 1)));
  }
  if (n < views) throw InputError("synth: n must be >= views");
}

MultiViewDataset synth(const SynthSpec& spec) {
  spec.validate();
  const auto dims = spec.resolved_dims();
  const auto stream = [&](std::initializer_list<std::uint32_t> key) {
    std::vector<std::uint32_t> words{static_cast<std::uint32_t>(spec.seed),
                                     static_cast<std::uint32_t>(spec.seed >> 32)};
    words.insert(words.end(), key.begin(), key.end());
    std::seed_seq seq(words.begin(), words.end());
    return std::mt19937_64(seq);
  };

  MultiViewDataset d;
  d.name = "synth";
  d.num_clusters = spec.k;

  std::vector<int> labels(static_cast<std::size_t>(spec.n));
  for (int j = 0; j < spec.n; ++j) labels[j] = j % spec.k;
  auto label_rng = stream({0});
  std::shuffle(labels.begin(), labels.end(), label_rng);
  d.labels = labels;

  for (int i = 0; i < spec.views; ++i) {
    const int dim = dims[i];
    std::vector<Eigen::MatrixXd> bases;
    for (int c = 0; c < spec.k; ++c) {
      auto rng = stream({1, static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(c)});
      std::normal_distribution<double> normal;
      Eigen::MatrixXd g(dim, spec.r);
      for (Eigen::Index col = 0; col < g.cols(); ++col)
        for (Eigen::Index row = 0; row < g.rows(); ++row) g(row, col) = normal(rng);
      Eigen::HouseholderQR<Eigen::MatrixXd> qr(g);
      bases.push_back(qr.householderQ() * Eigen::MatrixXd::Identity(dim, spec.r));
    }
    auto rng = stream({2, static_cast<std::uint32_t>(i)});
    std::normal_distribution<double> normal;
    Eigen::MatrixXd x(dim, spec.n);
    for (int j = 0; j < spec.n; ++j) {
      Eigen::VectorXd a(spec.r);
      for (int t = 0; t < spec.r; ++t) a(t) = normal(rng);
      Eigen::VectorXd e(dim);
      for (int t = 0; t < dim; ++t) e(t) = normal(rng);
      x.col(j) = bases[labels[j]] * a + spec.sigma * e;
    }
    d.views.push_back(std::move(x));
  }
  return d;
}

std::vector<int> read_labels(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw DatasetError(path.string() + ": cannot open labels file");
  std::vector<int> labels;
  std::string line;
  std::size_t line_no = 0;
  std::size_t blank_run = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string field = trim(line);
    if (field.empty()) {
      ++blank_run;
      continue;
    }
    if (blank_run) {
      throw DatasetError(path.string() + ":" + std::to_string(line_no - blank_run) +
                         ": blank line inside label list");
    }
    int value = 0;
    const auto [ptr, ec] =
        std::from_chars(field.data(), field.data() + field.size(), value);
    if (ec != std::errc() || ptr != field.data() + field.size()) {
      throw DatasetError(path.string() + ":" + std::to_string(line_no) +
                         ": malformed label '" + field + "'");
    }
    labels.push_back(value);
  }
  return labels;
}

void write_labels(const fs::path& path, const std::vector<int>& labels) {
  std::ofstream out(path);
  if (!out) throw DatasetError(path.string() + ": cannot write labels file");
  for (int label : labels) out << label << '\n';
}

}  // namespace tisrl
