#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "dpgnn/dataset.hpp"
#include "dpgnn/model.hpp"

namespace dpgnn {

/// All hyperparameters of one run.
struct TrainConfig {
  std::size_t top_k = 10;
  std::size_t hops_topo = 3;
  std::size_t hops_feat = 3;
  std::size_t samples = 3;  // S, stochastic passes per epoch
  double temperature = 0.5;
  double lambda = 1.0;
  double dropout = 0.5;
  std::size_t hidden_dim = 64;
  double learning_rate = 0.01;
  double weight_decay = 5e-4;
  std::size_t patience = 100;
  std::size_t max_epochs = 1000;
  std::uint64_t seed = 0;
  AggregatorKind aggregator = AggregatorKind::attention;
  PerceptionMode mode = PerceptionMode::dual;

  /// Throws std::invalid_argument naming the first out-of-range field.
  void validate() const;
  ForwardConfig forward_config() const { return {aggregator, mode, dropout}; }

  friend bool operator==(const TrainConfig&, const TrainConfig&) = default;
};

/// Builds the normalized topology and feature power series the mode needs.
ModelInputs prepare_inputs(const DatasetBundle& data, const TrainConfig& config);

ModelShape model_shape(const DatasetBundle& data, const TrainConfig& config);

struct EnsembleOutput {
  std::vector<Matrix> probs;  // S softmax outputs, n x C each
  std::vector<ForwardTrace> traces;

  std::size_t samples() const noexcept { return probs.size(); }
};

/// S training-mode passes sharing the multi-hop graphs and differing only in
/// their dropout masks. Member s draws from Rng(derive_seed(stream_seed, s)).
EnsembleOutput ensemble_forward(const ModelInputs& inputs, const ModelParameters& params, const ForwardConfig& config,
                                std::size_t samples, std::uint64_t stream_seed);

Matrix average_prediction(const EnsembleOutput& ensemble);

struct SharpenedTarget {
  Matrix probs;
  double temperature = 1.0;
};

/// Raises each row to 1/T and renormalizes, in log space. Throws
/// std::invalid_argument when T <= 0.
SharpenedTarget sharpen(const Matrix& mean_probs, double temperature);

/// -(1/S) sum_s sum_{i in train} log p^s_{i, y_i}, logs floored at 1e-30.
double supervised_loss(const EnsembleOutput& ensemble, std::span<const int> labels, std::span<const std::size_t> train);

/// (1/S) sum_s sum_i || target_i - p^s_i ||^2 over all nodes.
double consistency_loss(const EnsembleOutput& ensemble, const SharpenedTarget& target);

struct LossBreakdown {
  double sup = 0.0;
  double unsup = 0.0;
  double total = 0.0;
  double lambda = 0.0;

  friend bool operator==(const LossBreakdown&, const LossBreakdown&) = default;
};

LossBreakdown total_loss(double sup, double unsup, double lambda);

/// Analytic gradient of sup + lambda * unsup for every parameter, holding the
/// sharpened target constant.
ModelParameters compute_gradients(const EnsembleOutput& ensemble, const SharpenedTarget& target,
                                  std::span<const int> labels, std::span<const std::size_t> train, double lambda,
                                  const ModelInputs& inputs, const ModelParameters& params, const ForwardConfig& config);

struct OptimizerState {
  std::array<Matrix, ModelParameters::kTensorCount> first_moment;
  std::array<Matrix, ModelParameters::kTensorCount> second_moment;
  std::uint64_t step = 0;
  double learning_rate = 0.01;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  double weight_decay = 5e-4;

  static OptimizerState for_parameters(const ModelParameters& params, double learning_rate, double weight_decay);

  friend bool operator==(const OptimizerState&, const OptimizerState&) = default;
};

/// One Adam step. Weight decay is added to the gradient (L2 form) before the
/// moment update and applies to every tensor.
void adam_update(ModelParameters& params, const ModelParameters& grads, OptimizerState& state);

/// Eval-mode forward: no dropout, single pass. Returns the pre-softmax output.
Matrix predict(const ModelInputs& inputs, const ModelParameters& params, const ForwardConfig& config);

/// Index of the largest entry of each row, ties to the lower class.
std::vector<int> argmax_rows(const Matrix& scores);

/// Fraction of `nodes` whose argmax prediction equals the label. Throws
/// std::invalid_argument for an empty node set.
double accuracy(const Matrix& scores, std::span<const int> labels, std::span<const std::size_t> nodes);

double evaluate_accuracy(const ModelInputs& inputs, const ModelParameters& params, const ForwardConfig& config,
                         std::span<const int> labels, std::span<const std::size_t> nodes);

struct EpochRecord {
  std::size_t epoch = 0;
  LossBreakdown loss;
  double train_accuracy = 0.0;
  double val_accuracy = 0.0;
  double val_loss = 0.0;

  friend bool operator==(const EpochRecord&, const EpochRecord&) = default;
};

struct FitResult {
  ModelParameters params;  // restored best-validation parameters
  OptimizerState optimizer;
  std::vector<EpochRecord> history;
  std::size_t best_epoch = 0;
  std::size_t epochs_run = 0;
};

/// Full-graph training with self-ensembling and early stopping on validation
/// accuracy (ties: lower validation loss). Falls back to the training set
/// when the split has no validation nodes. Throws std::runtime_error naming
/// the epoch if a loss becomes non-finite.
FitResult fit(const DatasetBundle& data, const TrainConfig& config);
FitResult fit(const DatasetBundle& data, const ModelInputs& inputs, const TrainConfig& config);

}  // namespace dpgnn
