#pragma once

#include <array>
#include <cstddef>
#include <memory>
#include <optional>
#include <string_view>
#include <utility>

#include "dpgnn/graph.hpp"
#include "dpgnn/matrix.hpp"
#include "dpgnn/mhgg.hpp"
#include "dpgnn/rng.hpp"

namespace dpgnn {

enum class AggregatorKind { attention, mean, max };
enum class PerceptionMode { dual, topology_only, feature_only, mlp_only };

std::string_view to_string(AggregatorKind kind);
std::string_view to_string(PerceptionMode mode);
/// Parse "attention" / "mean" / "max"; throws std::invalid_argument otherwise.
AggregatorKind parse_aggregator(std::string_view text);
/// Parse "dual" / "topology_only" / "feature_only" / "mlp_only" (also "topo", "feat", "mlp").
PerceptionMode parse_mode(std::string_view text);

constexpr bool uses_topology(PerceptionMode mode) {
  return mode == PerceptionMode::dual || mode == PerceptionMode::topology_only;
}
constexpr bool uses_feature(PerceptionMode mode) {
  return mode == PerceptionMode::dual || mode == PerceptionMode::feature_only;
}

struct ModelShape {
  std::size_t nodes = 0;
  std::size_t input_dim = 0;
  std::size_t hidden_dim = 0;
  std::size_t classes = 0;
  std::size_t hops_topo = 1;
  std::size_t hops_feat = 1;

  friend bool operator==(const ModelShape&, const ModelShape&) = default;
};

/// Every learnable tensor. Also used as the gradient record.
struct ModelParameters {
  Matrix w_hidden;   // d x d_h
  Matrix w_topo;     // d_h x C
  Matrix w_feat;     // d_h x C
  Matrix hop_topo;   // n x L_t, hop logits of the topology space
  Matrix hop_feat;   // n x L_f
  Matrix agg_score;  // 1 x C, score vector of the attention aggregator

  static constexpr std::size_t kTensorCount = 6;
  static constexpr std::array<std::string_view, kTensorCount> kNames{"w_hidden", "w_topo",   "w_feat",
                                                                     "hop_topo", "hop_feat", "agg_score"};

  std::array<Matrix*, kTensorCount> tensors() {
    return {&w_hidden, &w_topo, &w_feat, &hop_topo, &hop_feat, &agg_score};
  }
  std::array<const Matrix*, kTensorCount> tensors() const {
    return {&w_hidden, &w_topo, &w_feat, &hop_topo, &hop_feat, &agg_score};
  }

  ModelShape shape() const;
  /// Throws std::invalid_argument if any tensor disagrees with `expected`.
  void check_shape(const ModelShape& expected) const;

  static ModelParameters zeros(const ModelShape& shape);

  friend bool operator==(const ModelParameters&, const ModelParameters&) = default;
};

/// Glorot-uniform dense weights, zero hop logits and zero aggregator scores.
ModelParameters init_parameters(const ModelShape& shape, Rng& rng);

/// Preprocessed, immutable model inputs. A space's powers are only required
/// when the perception mode uses that space.
struct ModelInputs {
  Matrix features;
  std::optional<AdjacencyPowers> topo;
  std::optional<AdjacencyPowers> feat;
};

struct ForwardConfig {
  AggregatorKind aggregator = AggregatorKind::attention;
  PerceptionMode mode = PerceptionMode::dual;
  double dropout = 0.0;
};

/// Multi-hop graphs for the current hop logits. They do not depend on
/// dropout, so ensemble members share one instance.
struct PropagationGraphs {
  std::optional<MultiHopGraph> topo;
  std::optional<MultiHopGraph> feat;
};

PropagationGraphs build_propagation(const ModelInputs& inputs, const ModelParameters& params, PerceptionMode mode);

/// Inverted dropout. Training: each entry kept with probability 1 - rate and
/// scaled by 1 / (1 - rate). Evaluation: identity. Returns (output, mask).
/// Throws std::invalid_argument unless 0 <= rate < 1.
std::pair<Matrix, Matrix> dropout(const Matrix& values, double rate, Rng& rng, bool training);

struct DropoutMasks {
  Matrix input;   // n x d
  Matrix hidden;  // n x d_h
};

/// Everything the backward pass needs. Branch matrices are empty when the
/// mode does not use them.
struct ForwardTrace {
  DropoutMasks masks;
  Matrix input_dropped;   // n x d
  Matrix pre_activation;  // n x d_h
  Matrix hidden;          // ReLU output
  Matrix hidden_dropped;
  Matrix proj_topo;       // n x C
  Matrix proj_feat;
  Matrix z_topo;
  Matrix z_feat;
  Matrix output;          // n x C, pre-softmax
  Matrix agg_weights;     // n x 2 (topology, feature) for the attention aggregator
  std::shared_ptr<const PropagationGraphs> graphs;
};

struct AggregateResult {
  Matrix output;
  Matrix weights;  // n x 2, only filled for the attention aggregator
};

/// Combines the two branch representations node by node. Attention: per
/// node scores q.z_t and q.z_f, two-way softmax, convex combination.
AggregateResult aggregate(const Matrix& z_topo, const Matrix& z_feat, AggregatorKind kind, const Matrix& agg_score);

/// Forward pass: masks drawn from `rng` in training mode, graphs built from
/// the current hop logits.
ForwardTrace forward(const ModelInputs& inputs, const ModelParameters& params, const ForwardConfig& config, Rng& rng,
                     bool training);

/// Deterministic core with explicit graphs and masks; used by the ensemble
/// and by finite-difference checks that freeze the masks.
ForwardTrace forward_with(const ModelInputs& inputs, const ModelParameters& params, const ForwardConfig& config,
                          std::shared_ptr<const PropagationGraphs> graphs, DropoutMasks masks);

/// Draws the two dropout masks for one pass.
DropoutMasks draw_masks(const ModelShape& shape, double rate, Rng& rng, bool training);

/// Gradients of a scalar loss w.r.t. every parameter, given dLoss/d(output).
/// Tensors unused by the mode or aggregator get zero gradients.
ModelParameters backward(const ForwardTrace& trace, const Matrix& grad_output, const ModelInputs& inputs,
                         const ModelParameters& params, const ForwardConfig& config);

}  // namespace dpgnn
