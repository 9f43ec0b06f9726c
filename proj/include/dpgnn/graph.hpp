#pragma once

#include <cstddef>
#include <span>
#include <string_view>
#include <utility>
#include <vector>

#include "dpgnn/matrix.hpp"

namespace dpgnn {

using Edge = std::pair<std::size_t, std::size_t>;

/// Undirected simple graph with one class label per node. Edges are stored
/// canonically as (i, j) with i < j, sorted, without duplicates; self-loops
/// are never stored (add_self_loops adds them to the dense adjacency).
class LabeledGraph {
 public:
  LabeledGraph() = default;
  /// Validates strictly: throws on out-of-range endpoints, self-loops,
  /// duplicate unordered pairs or labels outside [0, num_classes).
  LabeledGraph(std::size_t n, std::vector<Edge> edges, std::vector<int> labels, int num_classes);

  /// Canonicalizing constructor: drops self-loops and collapses duplicates
  /// (in either orientation). Endpoints and labels are still validated.
  static LabeledGraph from_edge_list(std::size_t n, std::vector<Edge> edges, std::vector<int> labels, int num_classes);

  std::size_t num_nodes() const noexcept { return n_; }
  std::size_t num_edges() const noexcept { return edges_.size(); }
  int num_classes() const noexcept { return num_classes_; }
  std::span<const Edge> edges() const noexcept { return edges_; }
  std::span<const int> labels() const noexcept { return labels_; }
  int label(std::size_t i) const { return labels_.at(i); }
  std::span<const std::size_t> neighbors(std::size_t i) const { return adjacency_.at(i); }

 private:
  std::size_t n_ = 0;
  std::vector<Edge> edges_;
  std::vector<int> labels_;
  int num_classes_ = 0;
  std::vector<std::vector<std::size_t>> adjacency_;
};

/// Non-negative, finite n x d feature matrix.
class NodeFeatures {
 public:
  NodeFeatures() = default;
  explicit NodeFeatures(Matrix values);

  const Matrix& matrix() const noexcept { return values_; }
  std::size_t num_nodes() const noexcept { return values_.rows(); }
  std::size_t dim() const noexcept { return values_.cols(); }

 private:
  Matrix values_;
};

struct DataSplit {
  std::vector<std::size_t> train;
  std::vector<std::size_t> val;
  std::vector<std::size_t> test;

  /// Throws std::invalid_argument unless the sets are disjoint, in range
  /// and train is nonempty.
  void validate(std::size_t n) const;
};

enum class Space { topology, feature };
std::string_view space_name(Space space);

/// [I, Â, Â², ..., Â^{L-1}] for one space.
struct AdjacencyPowers {
  Space space = Space::topology;
  std::vector<Matrix> powers;

  std::size_t hop_count() const noexcept { return powers.size(); }
  std::size_t num_nodes() const noexcept { return powers.empty() ? 0 : powers.front().rows(); }
};

/// Dense adjacency with A_ij = 1 for every edge and on the diagonal.
Matrix add_self_loops(const LabeledGraph& graph);

/// D^{-1/2} A D^{-1/2}. Throws std::domain_error on a zero-degree row, which
/// means self-loops were not added first.
Matrix symmetric_normalize(const Matrix& adjacency);

/// Powers Â^0 .. Â^{L-1} by repeated multiplication. Throws
/// std::invalid_argument when hops < 1 or the matrix is not square.
AdjacencyPowers power_series(const Matrix& normalized, std::size_t hops, Space space = Space::topology);

}  // namespace dpgnn
