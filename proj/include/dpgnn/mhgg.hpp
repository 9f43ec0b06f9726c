#pragma once

#include "dpgnn/graph.hpp"
#include "dpgnn/matrix.hpp"

namespace dpgnn {

/// Learnable n x L hop logits for one space.
struct HopAttentionWeights {
  Space space = Space::topology;
  Matrix logits;

  /// All-zero logits, i.e. uniform attention over the L hops.
  static HopAttentionWeights zeros(Space space, std::size_t nodes, std::size_t hops);
};

/// Per-node propagation matrix for one space together with the attention
/// that produced it. Not symmetric in general: each row uses its own mix.
struct MultiHopGraph {
  Space space = Space::topology;
  Matrix propagation;  // n x n
  Matrix attention;    // n x L, rows sum to 1
};

/// Row-wise softmax of the hop logits.
Matrix hop_attention(const Matrix& logits);

/// propagation_ij = sum_l attention_il * (Â^l)_ij. Throws std::invalid_argument
/// when the attention shape does not match (n, L) of the powers.
MultiHopGraph compose_multi_hop(const Matrix& attention, const AdjacencyPowers& powers);

/// Convenience: hop_attention followed by compose_multi_hop.
MultiHopGraph build_multi_hop(const HopAttentionWeights& weights, const AdjacencyPowers& powers);

/// Gradient of the loss w.r.t. the hop logits given dLoss/d(propagation).
/// g_il = sum_j upstream_ij (Â^l)_ij, then the softmax Jacobian per row.
Matrix multi_hop_gradient(const Matrix& upstream, const AdjacencyPowers& powers, const Matrix& attention);

}  // namespace dpgnn
