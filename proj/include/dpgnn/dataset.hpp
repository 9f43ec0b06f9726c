#pragma once

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>

#include "dpgnn/graph.hpp"
#include "dpgnn/rng.hpp"

namespace dpgnn {

struct DatasetBundle {
  std::string name;
  LabeledGraph graph;
  NodeFeatures features;
  DataSplit split;

  /// Feature rows match n, split indices are valid.
  void validate() const;
};

/// Error raised by the dataset loader; the message names file and line.
class DatasetError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Reads edges.tsv, features.csv, labels.tsv and split.tsv from `dir`.
/// Duplicate edges collapse; self-loops in the input are ignored.
DatasetBundle load_dataset(const std::filesystem::path& dir);

/// Writes the four files in the same format load_dataset reads.
void save_dataset(const DatasetBundle& bundle, const std::filesystem::path& dir);

struct SyntheticSpec {
  std::size_t nodes = 600;
  int classes = 4;
  double p_in = 0.05;
  double p_out = 0.005;
  std::size_t dim = 32;
  double feature_noise = 0.3;
  std::uint64_t seed = 0;
};

/// Stochastic block model with equal blocks, centroid features and the
/// 20-per-class split protocol, scaled down for small graphs.
DatasetBundle generate_synthetic(const SyntheticSpec& spec);

/// Split protocol shared by the generator: `per_class` training nodes per
/// class (capped at half the smallest class), then validation and test drawn
/// uniformly from the rest in a 1:2 ratio, capped at 500 and 1000.
DataSplit make_standard_split(const LabeledGraph& graph, Rng& rng, std::size_t per_class = 20);

}  // namespace dpgnn
