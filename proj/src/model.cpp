#include "dpgnn/model.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "dpgnn/simd/kernels.hpp"
#include "dpgnn/softmax.hpp"

namespace dpgnn {

std::string_view to_string(AggregatorKind kind) {
  switch (kind) {
    case AggregatorKind::attention: return "attention";
    case AggregatorKind::mean: return "mean";
    case AggregatorKind::max: return "max";
  }
  return "unknown";
}

std::string_view to_string(PerceptionMode mode) {
  switch (mode) {
    case PerceptionMode::dual: return "dual";
    case PerceptionMode::topology_only: return "topology_only";
    case PerceptionMode::feature_only: return "feature_only";
    case PerceptionMode::mlp_only: return "mlp_only";
  }
  return "unknown";
}

AggregatorKind parse_aggregator(std::string_view text) {
  for (auto kind : {AggregatorKind::attention, AggregatorKind::mean, AggregatorKind::max})
    if (text == to_string(kind)) return kind;
  throw std::invalid_argument("unknown aggregator '" + std::string(text) + "' (attention|mean|max)");
}

PerceptionMode parse_mode(std::string_view text) {
  if (text == "topo") return PerceptionMode::topology_only;
  if (text == "feat") return PerceptionMode::feature_only;
  if (text == "mlp") return PerceptionMode::mlp_only;
  for (auto mode : {PerceptionMode::dual, PerceptionMode::topology_only, PerceptionMode::feature_only,
                    PerceptionMode::mlp_only})
    if (text == to_string(mode)) return mode;
  throw std::invalid_argument("unknown perception mode '" + std::string(text) +
                              "' (dual|topology_only|feature_only|mlp_only)");
}

ModelShape ModelParameters::shape() const {
  return {hop_topo.rows(), w_hidden.rows(), w_hidden.cols(), w_topo.cols(), hop_topo.cols(), hop_feat.cols()};
}

void ModelParameters::check_shape(const ModelShape& s) const {
  const std::array<std::pair<std::size_t, std::size_t>, kTensorCount> expected{{
      {s.input_dim, s.hidden_dim},
      {s.hidden_dim, s.classes},
      {s.hidden_dim, s.classes},
      {s.nodes, s.hops_topo},
      {s.nodes, s.hops_feat},
      {1, s.classes},
  }};
  const auto list = tensors();
  for (std::size_t t = 0; t < kTensorCount; ++t) {
    if (list[t]->rows() != expected[t].first || list[t]->cols() != expected[t].second) {
      throw std::invalid_argument("parameter " + std::string(kNames[t]) + " has shape " +
                                  std::to_string(list[t]->rows()) + "x" + std::to_string(list[t]->cols()) +
                                  ", expected " + std::to_string(expected[t].first) + "x" +
                                  std::to_string(expected[t].second));
    }
  }
}

ModelParameters ModelParameters::zeros(const ModelShape& s) {
  return {Matrix(s.input_dim, s.hidden_dim), Matrix(s.hidden_dim, s.classes), Matrix(s.hidden_dim, s.classes),
          Matrix(s.nodes, s.hops_topo),      Matrix(s.nodes, s.hops_feat),    Matrix(1, s.classes)};
}

namespace {

void glorot(Matrix& w, Rng& rng) {
  const double limit = std::sqrt(6.0 / static_cast<double>(w.rows() + w.cols()));
  for (double& v : w.values()) v = rng.uniform(-limit, limit);
}

}  // namespace

ModelParameters init_parameters(const ModelShape& shape, Rng& rng) {
  ModelParameters p = ModelParameters::zeros(shape);
  glorot(p.w_hidden, rng);
  glorot(p.w_topo, rng);
  glorot(p.w_feat, rng);
  return p;
}

PropagationGraphs build_propagation(const ModelInputs& inputs, const ModelParameters& params, PerceptionMode mode) {
  PropagationGraphs graphs;
  if (uses_topology(mode)) {
    if (!inputs.topo) throw std::invalid_argument("forward: topology powers required by mode");
    graphs.topo = compose_multi_hop(hop_attention(params.hop_topo), *inputs.topo);
  }
  if (uses_feature(mode)) {
    if (!inputs.feat) throw std::invalid_argument("forward: feature powers required by mode");
    graphs.feat = compose_multi_hop(hop_attention(params.hop_feat), *inputs.feat);
  }
  return graphs;
}

std::pair<Matrix, Matrix> dropout(const Matrix& values, double rate, Rng& rng, bool training) {
  if (!(rate >= 0.0 && rate < 1.0)) throw std::invalid_argument("dropout: rate must lie in [0, 1)");
  Matrix mask(values.rows(), values.cols(), 1.0);
  if (training && rate > 0.0) {
    const double keep_scale = 1.0 / (1.0 - rate);
    for (double& m : mask.values()) m = rng.bernoulli(rate) ? 0.0 : keep_scale;
  }
  return {hadamard(values, mask), std::move(mask)};
}

DropoutMasks draw_masks(const ModelShape& shape, double rate, Rng& rng, bool training) {
  DropoutMasks masks;
  masks.input = dropout(Matrix(shape.nodes, shape.input_dim), rate, rng, training).second;
  masks.hidden = dropout(Matrix(shape.nodes, shape.hidden_dim), rate, rng, training).second;
  return masks;
}

AggregateResult aggregate(const Matrix& z_topo, const Matrix& z_feat, AggregatorKind kind, const Matrix& agg_score) {
  if (!z_topo.same_shape(z_feat)) throw std::invalid_argument("aggregate: branch shapes differ");
  const std::size_t n = z_topo.rows();
  const std::size_t c = z_topo.cols();
  AggregateResult out{Matrix(n, c), {}};
  switch (kind) {
    case AggregatorKind::mean:
      for (std::size_t k = 0; k < z_topo.size(); ++k)
        out.output.data()[k] = 0.5 * (z_topo.data()[k] + z_feat.data()[k]);
      break;
    case AggregatorKind::max:
      for (std::size_t k = 0; k < z_topo.size(); ++k)
        out.output.data()[k] = std::max(z_topo.data()[k], z_feat.data()[k]);
      break;
    case AggregatorKind::attention: {
      if (agg_score.rows() != 1 || agg_score.cols() != c)
        throw std::invalid_argument("aggregate: score vector must be 1x" + std::to_string(c));
      out.weights = Matrix(n, 2);
      const auto q = agg_score.row(0);
      for (std::size_t i = 0; i < n; ++i) {
        const double s_t = simd::dot(q, z_topo.row(i));
        const double s_f = simd::dot(q, z_feat.row(i));
        const double top = std::max(s_t, s_f);
        const double e_t = std::exp(s_t - top);
        const double e_f = std::exp(s_f - top);
        const double a_t = e_t / (e_t + e_f);
        const double a_f = e_f / (e_t + e_f);
        out.weights(i, 0) = a_t;
        out.weights(i, 1) = a_f;
        for (std::size_t j = 0; j < c; ++j) out.output(i, j) = a_t * z_topo(i, j) + a_f * z_feat(i, j);
      }
      break;
    }
  }
  return out;
}

namespace {

// z = A x computed as dot products against the columns of x, which keeps the
// long n-dimension in the SIMD loop.
Matrix propagate(const Matrix& propagation, const Matrix& projected) {
  return matmul_a_bt(propagation, transpose(projected));
}

}  // namespace

ForwardTrace forward_with(const ModelInputs& inputs, const ModelParameters& params, const ForwardConfig& config,
                          std::shared_ptr<const PropagationGraphs> graphs, DropoutMasks masks) {
  const Matrix& x = inputs.features;
  if (x.cols() != params.w_hidden.rows()) throw std::invalid_argument("forward: feature dimension mismatch");
  if (!masks.input.same_shape(x) || masks.hidden.rows() != x.rows() || masks.hidden.cols() != params.w_hidden.cols())
    throw std::invalid_argument("forward: dropout mask shape mismatch");

  ForwardTrace t;
  t.graphs = std::move(graphs);
  t.input_dropped = hadamard(x, masks.input);
  t.pre_activation = matmul(t.input_dropped, params.w_hidden);
  t.hidden = t.pre_activation;
  for (double& v : t.hidden.values()) v = std::max(v, 0.0);
  t.hidden_dropped = hadamard(t.hidden, masks.hidden);
  t.masks = std::move(masks);

  const PerceptionMode mode = config.mode;
  if (mode == PerceptionMode::mlp_only) {
    t.proj_topo = matmul(t.hidden_dropped, params.w_topo);
    t.output = t.proj_topo;
    return t;
  }
  if (uses_topology(mode)) {
    if (!t.graphs || !t.graphs->topo) throw std::invalid_argument("forward: topology graph missing");
    t.proj_topo = matmul(t.hidden_dropped, params.w_topo);
    t.z_topo = propagate(t.graphs->topo->propagation, t.proj_topo);
  }
  if (uses_feature(mode)) {
    if (!t.graphs || !t.graphs->feat) throw std::invalid_argument("forward: feature graph missing");
    t.proj_feat = matmul(t.hidden_dropped, params.w_feat);
    t.z_feat = propagate(t.graphs->feat->propagation, t.proj_feat);
  }
  if (mode == PerceptionMode::topology_only) {
    t.output = t.z_topo;
  } else if (mode == PerceptionMode::feature_only) {
    t.output = t.z_feat;
  } else {
    auto agg = aggregate(t.z_topo, t.z_feat, config.aggregator, params.agg_score);
    t.output = std::move(agg.output);
    t.agg_weights = std::move(agg.weights);
  }
  return t;
}

ForwardTrace forward(const ModelInputs& inputs, const ModelParameters& params, const ForwardConfig& config, Rng& rng,
                     bool training) {
  auto graphs = std::make_shared<const PropagationGraphs>(build_propagation(inputs, params, config.mode));
  const ModelShape shape{inputs.features.rows(), inputs.features.cols(), params.w_hidden.cols(), 0, 0, 0};
  return forward_with(inputs, params, config, std::move(graphs), draw_masks(shape, config.dropout, rng, training));
}

namespace {

struct BranchGrads {
  Matrix topo;
  Matrix feat;
};

BranchGrads aggregate_backward(const ForwardTrace& t, const Matrix& grad, AggregatorKind kind, const Matrix& agg_score,
                               Matrix& grad_score) {
  const std::size_t n = grad.rows();
  const std::size_t c = grad.cols();
  BranchGrads g{Matrix(n, c), Matrix(n, c)};
  switch (kind) {
    case AggregatorKind::mean:
      g.topo = scaled(grad, 0.5);
      g.feat = scaled(grad, 0.5);
      break;
    case AggregatorKind::max:
      // Ties route the gradient to the topology branch, matching std::max.
      for (std::size_t k = 0; k < grad.size(); ++k) {
        if (t.z_topo.data()[k] >= t.z_feat.data()[k]) {
          g.topo.data()[k] = grad.data()[k];
        } else {
          g.feat.data()[k] = grad.data()[k];
        }
      }
      break;
    case AggregatorKind::attention: {
      const auto q = agg_score.row(0);
      auto dq = grad_score.row(0);
      for (std::size_t i = 0; i < n; ++i) {
        const double a_t = t.agg_weights(i, 0);
        const double a_f = t.agg_weights(i, 1);
        const auto gi = grad.row(i);
        const auto zt = t.z_topo.row(i);
        const auto zf = t.z_feat.row(i);
        double diff = 0.0;
        for (std::size_t j = 0; j < c; ++j) diff += gi[j] * (zt[j] - zf[j]);
        const double score_grad = a_t * a_f * diff;  // dL/ds_t; dL/ds_f is its negative
        for (std::size_t j = 0; j < c; ++j) {
          g.topo(i, j) = a_t * gi[j] + score_grad * q[j];
          g.feat(i, j) = a_f * gi[j] - score_grad * q[j];
          dq[j] += score_grad * (zt[j] - zf[j]);
        }
      }
      break;
    }
  }
  return g;
}

// Backward through z = A x for one branch. Accumulates into the projection
// weights, the hop logits and dL/d(hidden_dropped).
void branch_backward(const Matrix& grad_z, const Matrix& projected, const MultiHopGraph& graph,
                     const AdjacencyPowers& powers, const Matrix& hidden_dropped, const Matrix& weights,
                     Matrix& grad_weights, Matrix& grad_hops, Matrix& grad_hidden) {
  // A^T g as (g^T A)^T: axpy rows of A over the long n-dimension.
  const Matrix grad_proj = transpose(matmul(transpose(grad_z), graph.propagation));
  const Matrix grad_propagation = matmul(grad_z, transpose(projected));
  grad_hops = multi_hop_gradient(grad_propagation, powers, graph.attention);
  grad_weights = matmul_at_b(hidden_dropped, grad_proj);
  add_in_place(grad_hidden, matmul_a_bt(grad_proj, weights));
}

}  // namespace

ModelParameters backward(const ForwardTrace& t, const Matrix& grad_output, const ModelInputs& inputs,
                         const ModelParameters& params, const ForwardConfig& config) {
  if (!grad_output.same_shape(t.output)) throw std::invalid_argument("backward: gradient shape mismatch");
  ModelParameters grads = ModelParameters::zeros(params.shape());
  Matrix grad_hidden(t.hidden_dropped.rows(), t.hidden_dropped.cols());
  const PerceptionMode mode = config.mode;

  if (mode == PerceptionMode::mlp_only) {
    grads.w_topo = matmul_at_b(t.hidden_dropped, grad_output);
    grad_hidden = matmul_a_bt(grad_output, params.w_topo);
  } else {
    BranchGrads branch;
    if (mode == PerceptionMode::topology_only) {
      branch.topo = grad_output;
    } else if (mode == PerceptionMode::feature_only) {
      branch.feat = grad_output;
    } else {
      branch = aggregate_backward(t, grad_output, config.aggregator, params.agg_score, grads.agg_score);
    }
    if (uses_topology(mode)) {
      branch_backward(branch.topo, t.proj_topo, *t.graphs->topo, *inputs.topo, t.hidden_dropped, params.w_topo,
                      grads.w_topo, grads.hop_topo, grad_hidden);
    }
    if (uses_feature(mode)) {
      branch_backward(branch.feat, t.proj_feat, *t.graphs->feat, *inputs.feat, t.hidden_dropped, params.w_feat,
                      grads.w_feat, grads.hop_feat, grad_hidden);
    }
  }

  Matrix grad_pre = hadamard(grad_hidden, t.masks.hidden);
  for (std::size_t k = 0; k < grad_pre.size(); ++k)
    if (!(t.pre_activation.data()[k] > 0.0)) grad_pre.data()[k] = 0.0;
  grads.w_hidden = matmul_at_b(t.input_dropped, grad_pre);
  return grads;
}

}  // namespace dpgnn
