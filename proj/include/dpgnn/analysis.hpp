#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "dpgnn/graph.hpp"

namespace dpgnn {

/// Hop distances between all node pairs, truncated at max_hops. Self-loops
/// play no part; pairs farther than max_hops (or disconnected) are unreachable.
class DistanceProfile {
 public:
  static constexpr std::int16_t kUnreachable = -1;

  DistanceProfile(std::size_t n, std::size_t max_hops);

  std::size_t num_nodes() const noexcept { return n_; }
  std::size_t max_hops() const noexcept { return max_hops_; }
  /// Distance in hops, or kUnreachable.
  std::int16_t distance(std::size_t i, std::size_t j) const { return dist_[i * n_ + j]; }
  void set(std::size_t i, std::size_t j, std::int16_t d) { dist_[i * n_ + j] = d; }

 private:
  std::size_t n_;
  std::size_t max_hops_;
  std::vector<std::int16_t> dist_;
};

/// Breadth-first search from every source, stopping at depth max_hops.
/// Throws std::invalid_argument if max_hops < 1.
DistanceProfile shortest_paths_up_to(const LabeledGraph& graph, std::size_t max_hops);

struct PairCounts {
  std::size_t hops = 0;
  std::uint64_t pairs = 0;        // unordered pairs at exactly this distance
  std::uint64_t inter_class = 0;  // of which with differing labels

  /// Inter-class rate; empty when no pair sits at this distance.
  std::optional<double> rate() const {
    if (pairs == 0) return std::nullopt;
    return static_cast<double>(inter_class) / static_cast<double>(pairs);
  }
};

/// Counts for every distance 1..max_hops.
std::vector<PairCounts> pair_counts(const DistanceProfile& profile, std::span<const int> labels);

/// Fraction of unordered pairs at distance exactly `hops` whose labels
/// differ; nullopt when there are none. Throws std::invalid_argument if hops
/// is outside [1, profile.max_hops()].
std::optional<double> inter_class_rate(const DistanceProfile& profile, std::span<const int> labels, std::size_t hops);

struct TopologyReport {
  std::size_t nodes = 0;
  std::size_t edges = 0;  // self-loops excluded
  double average_degree = 0.0;
  std::vector<std::size_t> component_sizes;  // descending
  std::size_t max_hops = 0;
  std::vector<PairCounts> per_hop;
  std::uint64_t unreachable_pairs = 0;  // disconnected or beyond max_hops

  std::size_t component_count() const noexcept { return component_sizes.size(); }
};

/// Sizes of connected components via disjoint-set union, descending.
std::vector<std::size_t> connected_components(const LabeledGraph& graph);

TopologyReport graph_summary(const LabeledGraph& graph, std::size_t max_hops = 6);

}  // namespace dpgnn
