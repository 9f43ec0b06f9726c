#include "dpgnn/analysis.hpp"

#include <algorithm>
#include <functional>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>

namespace dpgnn {

DistanceProfile::DistanceProfile(std::size_t n, std::size_t max_hops)
    : n_(n), max_hops_(max_hops), dist_(n * n, kUnreachable) {
  for (std::size_t i = 0; i < n; ++i) dist_[i * n + i] = 0;
}

DistanceProfile shortest_paths_up_to(const LabeledGraph& graph, std::size_t max_hops) {
  if (max_hops < 1) throw std::invalid_argument("shortest_paths_up_to: max_hops must be >= 1");
  if (max_hops > static_cast<std::size_t>(std::numeric_limits<std::int16_t>::max()))
    throw std::invalid_argument("shortest_paths_up_to: max_hops too large");
  const std::size_t n = graph.num_nodes();
  DistanceProfile profile(n, max_hops);
  std::vector<std::size_t> frontier;
  std::vector<std::size_t> next;
  for (std::size_t source = 0; source < n; ++source) {
    frontier.assign(1, source);
    for (std::size_t depth = 1; depth <= max_hops && !frontier.empty(); ++depth) {
      next.clear();
      for (std::size_t u : frontier) {
        for (std::size_t v : graph.neighbors(u)) {
          if (profile.distance(source, v) != DistanceProfile::kUnreachable) continue;
          profile.set(source, v, static_cast<std::int16_t>(depth));
          next.push_back(v);
        }
      }
      frontier.swap(next);
    }
  }
  return profile;
}

std::vector<PairCounts> pair_counts(const DistanceProfile& profile, std::span<const int> labels) {
  std::vector<PairCounts> counts(profile.max_hops());
  for (std::size_t l = 0; l < counts.size(); ++l) counts[l].hops = l + 1;
  const std::size_t n = profile.num_nodes();
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const auto d = profile.distance(i, j);
      if (d <= 0) continue;
      auto& c = counts[static_cast<std::size_t>(d) - 1];
      ++c.pairs;
      if (labels[i] != labels[j]) ++c.inter_class;
    }
  }
  return counts;
}

std::optional<double> inter_class_rate(const DistanceProfile& profile, std::span<const int> labels, std::size_t hops) {
  if (hops < 1 || hops > profile.max_hops())
    throw std::invalid_argument("inter_class_rate: distance " + std::to_string(hops) + " outside the profile");
  PairCounts c{hops, 0, 0};
  const std::size_t n = profile.num_nodes();
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      if (profile.distance(i, j) != static_cast<std::int16_t>(hops)) continue;
      ++c.pairs;
      if (labels[i] != labels[j]) ++c.inter_class;
    }
  }
  return c.rate();
}

namespace {

class DisjointSets {
 public:
  explicit DisjointSets(std::size_t n) : parent_(n), size_(n, 1) { std::iota(parent_.begin(), parent_.end(), 0); }

  std::size_t find(std::size_t x) {
    while (parent_[x] != x) {
      parent_[x] = parent_[parent_[x]];
      x = parent_[x];
    }
    return x;
  }

  void unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a == b) return;
    if (size_[a] < size_[b]) std::swap(a, b);
    parent_[b] = a;
    size_[a] += size_[b];
  }

  std::size_t size_of_root(std::size_t root) const { return size_[root]; }

 private:
  std::vector<std::size_t> parent_;
  std::vector<std::size_t> size_;
};

}  // namespace

std::vector<std::size_t> connected_components(const LabeledGraph& graph) {
  DisjointSets sets(graph.num_nodes());
  for (const auto& [i, j] : graph.edges()) sets.unite(i, j);
  std::vector<std::size_t> sizes;
  for (std::size_t i = 0; i < graph.num_nodes(); ++i)
    if (sets.find(i) == i) sizes.push_back(sets.size_of_root(i));
  std::sort(sizes.begin(), sizes.end(), std::greater<>());
  return sizes;
}

TopologyReport graph_summary(const LabeledGraph& graph, std::size_t max_hops) {
  TopologyReport report;
  report.nodes = graph.num_nodes();
  report.edges = graph.num_edges();
  report.average_degree = 2.0 * static_cast<double>(report.edges) / static_cast<double>(report.nodes);
  report.component_sizes = connected_components(graph);
  report.max_hops = max_hops;
  const DistanceProfile profile = shortest_paths_up_to(graph, max_hops);
  report.per_hop = pair_counts(profile, graph.labels());
  const std::uint64_t n = report.nodes;
  std::uint64_t reached = 0;
  for (const auto& c : report.per_hop) reached += c.pairs;
  report.unreachable_pairs = n * (n - 1) / 2 - reached;
  return report;
}

}  // namespace dpgnn
