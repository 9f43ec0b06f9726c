#pragma once

#include <cstddef>

#include "dpgnn/graph.hpp"
#include "dpgnn/matrix.hpp"

namespace dpgnn {

/// Pairwise cosine similarity of feature rows. Symmetric, entries in [0, 1].
/// A zero-norm row has similarity 0 to every other node and 1 to itself.
Matrix cosine_similarity_matrix(const NodeFeatures& features);

/// Indices selected by node `i` from its similarity row: itself first, then
/// the k-1 most similar other nodes, ties going to the lower index.
std::vector<std::size_t> top_k_neighbors(const Matrix& similarity, std::size_t i, std::size_t k);

/// Feature graph adjacency: every node selects its top-k (self included),
/// then the directed selection is symmetrized by union. Entries in {0, 1},
/// unit diagonal. Throws std::invalid_argument unless 1 <= k <= n.
Matrix build_feature_graph(const Matrix& similarity, std::size_t k);

/// Number of nonzero entries of the directed (pre-union) selection. Always n*k.
std::size_t directed_selection_count(const Matrix& similarity, std::size_t k);

}  // namespace dpgnn
