#include "dpgnn/mhgg.hpp"

#include <stdexcept>

#include "dpgnn/simd/kernels.hpp"
#include "dpgnn/softmax.hpp"

namespace dpgnn {

HopAttentionWeights HopAttentionWeights::zeros(Space space, std::size_t nodes, std::size_t hops) {
  return {space, Matrix(nodes, hops)};
}

Matrix hop_attention(const Matrix& logits) { return softmax_rows(logits); }

MultiHopGraph compose_multi_hop(const Matrix& attention, const AdjacencyPowers& powers) {
  const std::size_t n = powers.num_nodes();
  const std::size_t hops = powers.hop_count();
  if (hops == 0 || attention.rows() != n || attention.cols() != hops) {
    throw std::invalid_argument("compose_multi_hop: attention must be " + std::to_string(n) + "x" +
                                std::to_string(hops));
  }
  MultiHopGraph out{powers.space, Matrix(n, n), attention};
  for (std::size_t i = 0; i < n; ++i) {
    auto dst = out.propagation.row(i);
    for (std::size_t l = 0; l < hops; ++l) simd::axpy(dst, attention(i, l), powers.powers[l].row(i));
  }
  return out;
}

MultiHopGraph build_multi_hop(const HopAttentionWeights& weights, const AdjacencyPowers& powers) {
  MultiHopGraph out = compose_multi_hop(hop_attention(weights.logits), powers);
  out.space = weights.space;
  return out;
}

Matrix multi_hop_gradient(const Matrix& upstream, const AdjacencyPowers& powers, const Matrix& attention) {
  const std::size_t n = powers.num_nodes();
  const std::size_t hops = powers.hop_count();
  if (upstream.rows() != n || upstream.cols() != n || attention.rows() != n || attention.cols() != hops) {
    throw std::invalid_argument("multi_hop_gradient: shape mismatch");
  }
  Matrix grad(n, hops);
  std::vector<double> per_hop(hops);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t l = 0; l < hops; ++l) per_hop[l] = simd::dot(upstream.row(i), powers.powers[l].row(i));
    softmax_row_backward(attention.row(i), per_hop, grad.row(i));
  }
  return grad;
}

}  // namespace dpgnn
