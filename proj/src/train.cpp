#include "dpgnn/train.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "dpgnn/feature_graph.hpp"
#include "dpgnn/softmax.hpp"

namespace dpgnn {

namespace {

constexpr double kLogFloor = 1e-30;

double floored_log(double p) { return std::log(std::max(p, kLogFloor)); }

void require(bool ok, const std::string& what) {
  if (!ok) throw std::invalid_argument("TrainConfig: " + what);
}

}  // namespace

void TrainConfig::validate() const {
  require(top_k >= 1, "top_k must be >= 1");
  require(hops_topo >= 1 && hops_feat >= 1, "hop counts must be >= 1");
  require(samples >= 1, "samples must be >= 1");
  require(temperature > 0.0 && std::isfinite(temperature), "temperature must be > 0");
  require(lambda >= 0.0 && std::isfinite(lambda), "lambda must be >= 0");
  require(dropout >= 0.0 && dropout < 1.0, "dropout must lie in [0, 1)");
  require(hidden_dim >= 1, "hidden_dim must be >= 1");
  require(learning_rate >= 0.0 && std::isfinite(learning_rate), "learning_rate must be >= 0");
  require(weight_decay >= 0.0 && std::isfinite(weight_decay), "weight_decay must be >= 0");
  require(max_epochs >= 1, "max_epochs must be >= 1");
  require(patience >= 1, "patience must be >= 1");
}

ModelInputs prepare_inputs(const DatasetBundle& data, const TrainConfig& config) {
  config.validate();
  ModelInputs inputs;
  inputs.features = data.features.matrix();
  if (uses_topology(config.mode)) {
    inputs.topo = power_series(symmetric_normalize(add_self_loops(data.graph)), config.hops_topo, Space::topology);
  }
  if (uses_feature(config.mode)) {
    const Matrix sim = cosine_similarity_matrix(data.features);
    inputs.feat = power_series(symmetric_normalize(build_feature_graph(sim, config.top_k)), config.hops_feat,
                               Space::feature);
  }
  return inputs;
}

ModelShape model_shape(const DatasetBundle& data, const TrainConfig& config) {
  return {data.graph.num_nodes(), data.features.dim(), config.hidden_dim,
          static_cast<std::size_t>(data.graph.num_classes()), config.hops_topo, config.hops_feat};
}

EnsembleOutput ensemble_forward(const ModelInputs& inputs, const ModelParameters& params, const ForwardConfig& config,
                                std::size_t samples, std::uint64_t stream_seed) {
  if (samples < 1) throw std::invalid_argument("ensemble_forward: need at least one sample");
  auto graphs = std::make_shared<const PropagationGraphs>(build_propagation(inputs, params, config.mode));
  const ModelShape shape = params.shape();
  EnsembleOutput out;
  out.probs.reserve(samples);
  out.traces.reserve(samples);
  for (std::size_t s = 0; s < samples; ++s) {
    Rng rng(derive_seed(stream_seed, s));
    out.traces.push_back(forward_with(inputs, params, config, graphs, draw_masks(shape, config.dropout, rng, true)));
    out.probs.push_back(softmax_rows(out.traces.back().output));
  }
  return out;
}

Matrix average_prediction(const EnsembleOutput& ensemble) {
  if (ensemble.samples() == 0) throw std::invalid_argument("average_prediction: empty ensemble");
  Matrix mean = ensemble.probs.front();
  for (std::size_t s = 1; s < ensemble.samples(); ++s) add_in_place(mean, ensemble.probs[s]);
  const double inv = 1.0 / static_cast<double>(ensemble.samples());
  for (double& v : mean.values()) v *= inv;
  return mean;
}

SharpenedTarget sharpen(const Matrix& mean_probs, double temperature) {
  if (!(temperature > 0.0)) throw std::invalid_argument("sharpen: temperature must be > 0");
  Matrix logits(mean_probs.rows(), mean_probs.cols());
  for (std::size_t k = 0; k < mean_probs.size(); ++k) logits.data()[k] = floored_log(mean_probs.data()[k]) / temperature;
  return {softmax_rows(logits), temperature};
}

double supervised_loss(const EnsembleOutput& ensemble, std::span<const int> labels, std::span<const std::size_t> train) {
  if (train.empty()) throw std::invalid_argument("supervised_loss: empty training set");
  double total = 0.0;
  for (const Matrix& p : ensemble.probs)
    for (std::size_t i : train) total -= floored_log(p(i, static_cast<std::size_t>(labels[i])));
  return total / static_cast<double>(ensemble.samples());
}

double consistency_loss(const EnsembleOutput& ensemble, const SharpenedTarget& target) {
  double total = 0.0;
  for (const Matrix& p : ensemble.probs) {
    if (!p.same_shape(target.probs)) throw std::invalid_argument("consistency_loss: shape mismatch");
    for (std::size_t k = 0; k < p.size(); ++k) {
      const double d = target.probs.data()[k] - p.data()[k];
      total += d * d;
    }
  }
  return total / static_cast<double>(ensemble.samples());
}

LossBreakdown total_loss(double sup, double unsup, double lambda) { return {sup, unsup, sup + lambda * unsup, lambda}; }

ModelParameters compute_gradients(const EnsembleOutput& ensemble, const SharpenedTarget& target,
                                  std::span<const int> labels, std::span<const std::size_t> train, double lambda,
                                  const ModelInputs& inputs, const ModelParameters& params,
                                  const ForwardConfig& config) {
  if (ensemble.traces.size() != ensemble.probs.size() || ensemble.samples() == 0)
    throw std::invalid_argument("compute_gradients: ensemble traces and outputs disagree");
  const double inv_s = 1.0 / static_cast<double>(ensemble.samples());
  ModelParameters total = ModelParameters::zeros(params.shape());
  std::vector<double> grad_probs;
  for (std::size_t s = 0; s < ensemble.samples(); ++s) {
    const Matrix& p = ensemble.probs[s];
    if (!p.same_shape(target.probs) || !ensemble.traces[s].output.same_shape(p))
      throw std::invalid_argument("compute_gradients: trace/target shape mismatch");
    Matrix grad_logits(p.rows(), p.cols());
    grad_probs.resize(p.cols());
    if (lambda != 0.0) {
      for (std::size_t i = 0; i < p.rows(); ++i) {
        for (std::size_t c = 0; c < p.cols(); ++c) grad_probs[c] = 2.0 * lambda * inv_s * (p(i, c) - target.probs(i, c));
        softmax_row_backward(p.row(i), grad_probs, grad_logits.row(i));
      }
    }
    // Fused softmax + cross-entropy: (p - y) / S on training rows.
    for (std::size_t i : train) {
      const auto y = static_cast<std::size_t>(labels[i]);
      for (std::size_t c = 0; c < p.cols(); ++c) grad_logits(i, c) += inv_s * (p(i, c) - (c == y ? 1.0 : 0.0));
    }
    const ModelParameters g = backward(ensemble.traces[s], grad_logits, inputs, params, config);
    auto dst = total.tensors();
    const auto src = g.tensors();
    for (std::size_t t = 0; t < ModelParameters::kTensorCount; ++t) add_in_place(*dst[t], *src[t]);
  }
  return total;
}

OptimizerState OptimizerState::for_parameters(const ModelParameters& params, double learning_rate,
                                              double weight_decay) {
  OptimizerState state;
  const auto list = params.tensors();
  for (std::size_t t = 0; t < ModelParameters::kTensorCount; ++t) {
    state.first_moment[t] = Matrix(list[t]->rows(), list[t]->cols());
    state.second_moment[t] = Matrix(list[t]->rows(), list[t]->cols());
  }
  state.learning_rate = learning_rate;
  state.weight_decay = weight_decay;
  return state;
}

void adam_update(ModelParameters& params, const ModelParameters& grads, OptimizerState& state) {
  state.step += 1;
  const double t = static_cast<double>(state.step);
  const double bias1 = 1.0 - std::pow(state.beta1, t);
  const double bias2 = 1.0 - std::pow(state.beta2, t);
  auto list = params.tensors();
  const auto grad_list = grads.tensors();
  for (std::size_t k = 0; k < ModelParameters::kTensorCount; ++k) {
    Matrix& theta = *list[k];
    const Matrix& g = *grad_list[k];
    Matrix& m = state.first_moment[k];
    Matrix& v = state.second_moment[k];
    if (!theta.same_shape(g) || !theta.same_shape(m) || !theta.same_shape(v))
      throw std::invalid_argument("adam_update: shape mismatch on " + std::string(ModelParameters::kNames[k]));
    for (std::size_t e = 0; e < theta.size(); ++e) {
      const double grad = g.data()[e] + state.weight_decay * theta.data()[e];
      double& m1 = m.data()[e];
      double& m2 = v.data()[e];
      m1 = state.beta1 * m1 + (1.0 - state.beta1) * grad;
      m2 = state.beta2 * m2 + (1.0 - state.beta2) * grad * grad;
      const double m_hat = m1 / bias1;
      const double v_hat = m2 / bias2;
      theta.data()[e] -= state.learning_rate * m_hat / (std::sqrt(v_hat) + state.epsilon);
    }
  }
}

Matrix predict(const ModelInputs& inputs, const ModelParameters& params, const ForwardConfig& config) {
  Rng unused(0);
  return forward(inputs, params, config, unused, false).output;
}

std::vector<int> argmax_rows(const Matrix& scores) {
  std::vector<int> out(scores.rows());
  for (std::size_t i = 0; i < scores.rows(); ++i) {
    const auto row = scores.row(i);
    out[i] = static_cast<int>(std::max_element(row.begin(), row.end()) - row.begin());
  }
  return out;
}

double accuracy(const Matrix& scores, std::span<const int> labels, std::span<const std::size_t> nodes) {
  if (nodes.empty()) throw std::invalid_argument("accuracy: empty node set");
  std::size_t correct = 0;
  for (std::size_t i : nodes) {
    const auto row = scores.row(i);
    const auto best = static_cast<int>(std::max_element(row.begin(), row.end()) - row.begin());
    if (best == labels[i]) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(nodes.size());
}

double evaluate_accuracy(const ModelInputs& inputs, const ModelParameters& params, const ForwardConfig& config,
                         std::span<const int> labels, std::span<const std::size_t> nodes) {
  if (nodes.empty()) throw std::invalid_argument("evaluate_accuracy: empty node set");
  return accuracy(predict(inputs, params, config), labels, nodes);
}

namespace {

double mean_cross_entropy(const Matrix& probs, std::span<const int> labels, std::span<const std::size_t> nodes) {
  double total = 0.0;
  for (std::size_t i : nodes) total -= floored_log(probs(i, static_cast<std::size_t>(labels[i])));
  return total / static_cast<double>(nodes.size());
}

}  // namespace

FitResult fit(const DatasetBundle& data, const TrainConfig& config) {
  return fit(data, prepare_inputs(data, config), config);
}

FitResult fit(const DatasetBundle& data, const ModelInputs& inputs, const TrainConfig& config) {
  config.validate();
  data.validate();
  const ForwardConfig fwd = config.forward_config();
  const auto labels = data.graph.labels();
  const auto& train = data.split.train;
  const auto& monitor = data.split.val.empty() ? data.split.train : data.split.val;

  Rng init_rng(derive_seed(config.seed, 0x1a17));
  FitResult result;
  result.params = init_parameters(model_shape(data, config), init_rng);
  result.optimizer = OptimizerState::for_parameters(result.params, config.learning_rate, config.weight_decay);

  ModelParameters current = result.params;
  double best_acc = -1.0;
  double best_loss = std::numeric_limits<double>::infinity();

  for (std::size_t epoch = 1; epoch <= config.max_epochs; ++epoch) {
    const EnsembleOutput ensemble = ensemble_forward(inputs, current, fwd, config.samples, derive_seed(config.seed, epoch));
    const SharpenedTarget target = sharpen(average_prediction(ensemble), config.temperature);
    const LossBreakdown loss =
        total_loss(supervised_loss(ensemble, labels, train), consistency_loss(ensemble, target), config.lambda);
    if (!std::isfinite(loss.total)) {
      throw std::runtime_error("training diverged: non-finite loss at epoch " + std::to_string(epoch));
    }
    const ModelParameters grads =
        compute_gradients(ensemble, target, labels, train, config.lambda, inputs, current, fwd);
    adam_update(current, grads, result.optimizer);

    const Matrix eval_probs = softmax_rows(predict(inputs, current, fwd));
    EpochRecord record{epoch, loss, accuracy(eval_probs, labels, train), accuracy(eval_probs, labels, monitor),
                       mean_cross_entropy(eval_probs, labels, monitor)};
    result.history.push_back(record);
    result.epochs_run = epoch;

    if (record.val_accuracy > best_acc || (record.val_accuracy == best_acc && record.val_loss < best_loss)) {
      best_acc = record.val_accuracy;
      best_loss = record.val_loss;
      result.best_epoch = epoch;
      result.params = current;
    } else if (epoch - result.best_epoch >= config.patience) {
      break;
    }
  }
  return result;
}

}  // namespace dpgnn
