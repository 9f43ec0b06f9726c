#include "dpgnn/graph.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace dpgnn {

namespace {

void check_labels(std::size_t n, const std::vector<int>& labels, int num_classes) {
  if (num_classes < 2) throw std::invalid_argument("LabeledGraph: need at least 2 classes");
  if (labels.size() != n) {
    throw std::invalid_argument("LabeledGraph: " + std::to_string(labels.size()) + " labels for " +
                                std::to_string(n) + " nodes");
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (labels[i] < 0 || labels[i] >= num_classes) {
      throw std::invalid_argument("LabeledGraph: label of node " + std::to_string(i) + " out of range");
    }
  }
}

void check_endpoints(std::size_t n, const Edge& e) {
  if (e.first >= n || e.second >= n) {
    throw std::invalid_argument("LabeledGraph: edge (" + std::to_string(e.first) + ", " + std::to_string(e.second) +
                                ") out of range for " + std::to_string(n) + " nodes");
  }
}

Edge canonical(Edge e) { return e.first < e.second ? e : Edge{e.second, e.first}; }

}  // namespace

LabeledGraph::LabeledGraph(std::size_t n, std::vector<Edge> edges, std::vector<int> labels, int num_classes)
    : n_(n), labels_(std::move(labels)), num_classes_(num_classes), adjacency_(n) {
  if (n == 0) throw std::invalid_argument("LabeledGraph: need at least one node");
  check_labels(n, labels_, num_classes);
  for (auto& e : edges) {
    check_endpoints(n, e);
    if (e.first == e.second) throw std::invalid_argument("LabeledGraph: self-loop on node " + std::to_string(e.first));
    e = canonical(e);
  }
  std::sort(edges.begin(), edges.end());
  if (auto dup = std::adjacent_find(edges.begin(), edges.end()); dup != edges.end()) {
    throw std::invalid_argument("LabeledGraph: duplicate edge (" + std::to_string(dup->first) + ", " +
                                std::to_string(dup->second) + ")");
  }
  edges_ = std::move(edges);
  for (const auto& [i, j] : edges_) {
    adjacency_[i].push_back(j);
    adjacency_[j].push_back(i);
  }
  for (auto& list : adjacency_) std::sort(list.begin(), list.end());
}

LabeledGraph LabeledGraph::from_edge_list(std::size_t n, std::vector<Edge> edges, std::vector<int> labels,
                                          int num_classes) {
  std::vector<Edge> kept;
  kept.reserve(edges.size());
  for (const auto& e : edges) {
    check_endpoints(n, e);
    if (e.first != e.second) kept.push_back(canonical(e));
  }
  std::sort(kept.begin(), kept.end());
  kept.erase(std::unique(kept.begin(), kept.end()), kept.end());
  return LabeledGraph(n, std::move(kept), std::move(labels), num_classes);
}

NodeFeatures::NodeFeatures(Matrix values) : values_(std::move(values)) {
  for (std::size_t i = 0; i < values_.rows(); ++i) {
    for (std::size_t j = 0; j < values_.cols(); ++j) {
      const double v = values_(i, j);
      if (!std::isfinite(v) || v < 0.0) {
        throw std::invalid_argument("NodeFeatures: entry (" + std::to_string(i) + ", " + std::to_string(j) +
                                    ") must be finite and non-negative");
      }
    }
  }
}

void DataSplit::validate(std::size_t n) const {
  if (train.empty()) throw std::invalid_argument("DataSplit: train set is empty");
  std::vector<char> seen(n, 0);
  for (const auto* set : {&train, &val, &test}) {
    for (std::size_t i : *set) {
      if (i >= n) throw std::invalid_argument("DataSplit: index " + std::to_string(i) + " out of range");
      if (seen[i]) throw std::invalid_argument("DataSplit: node " + std::to_string(i) + " assigned twice");
      seen[i] = 1;
    }
  }
}

std::string_view space_name(Space space) { return space == Space::topology ? "topology" : "feature"; }

Matrix add_self_loops(const LabeledGraph& graph) {
  const std::size_t n = graph.num_nodes();
  Matrix a = Matrix::identity(n);
  for (const auto& [i, j] : graph.edges()) {
    a(i, j) = 1.0;
    a(j, i) = 1.0;
  }
  return a;
}

Matrix symmetric_normalize(const Matrix& adjacency) {
  const std::size_t n = adjacency.rows();
  if (adjacency.cols() != n) throw std::invalid_argument("symmetric_normalize: matrix is not square");
  std::vector<double> degrees(n);
  for (std::size_t i = 0; i < n; ++i) {
    double degree = 0.0;
    for (double v : adjacency.row(i)) degree += v;
    if (!(degree > 0.0)) {
      throw std::domain_error("symmetric_normalize: node " + std::to_string(i) +
                              " has zero degree (self-loops missing?)");
    }
    degrees[i] = degree;
  }
  Matrix out(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      const double v = adjacency(i, j);
      if (v != 0.0) out(i, j) = v / std::sqrt(degrees[i] * degrees[j]);
    }
  }
  // Exact symmetry even if the input is only symmetric up to round-off.
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) out(j, i) = out(i, j);
  return out;
}

AdjacencyPowers power_series(const Matrix& normalized, std::size_t hops, Space space) {
  if (hops < 1) throw std::invalid_argument("power_series: hop count must be at least 1");
  if (normalized.rows() != normalized.cols()) throw std::invalid_argument("power_series: matrix is not square");
  AdjacencyPowers out;
  out.space = space;
  out.powers.reserve(hops);
  out.powers.push_back(Matrix::identity(normalized.rows()));
  // Left-multiplying by the (sparse) base matrix lets matmul skip its zeros.
  for (std::size_t l = 1; l < hops; ++l) out.powers.push_back(matmul(normalized, out.powers.back()));
  return out;
}

}  // namespace dpgnn
