#include <gtest/gtest.h>

#include <cmath>

#include "dpgnn/dataset.hpp"
#include "dpgnn/softmax.hpp"
#include "dpgnn/train.hpp"
#include "support/gradcheck.hpp"

using namespace dpgnn;

namespace {

EnsembleOutput from_probs(std::vector<Matrix> probs) {
  EnsembleOutput e;
  e.probs = std::move(probs);
  return e;
}

double entropy(std::span<const double> row) {
  double h = 0.0;
  for (double p : row)
    if (p > 0) h -= p * std::log(p);
  return h;
}

Matrix random_distribution(std::size_t n, std::size_t c, Rng& rng) {
  Matrix z(n, c);
  for (double& v : z.values()) v = rng.uniform(-3, 3);
  return softmax_rows(z);
}

DatasetBundle separable(std::size_t nodes, int classes, std::uint64_t seed) {
  SyntheticSpec spec;
  spec.nodes = nodes;
  spec.classes = classes;
  spec.dim = 8;
  spec.feature_noise = 0.0;
  spec.p_in = 0.3;
  spec.p_out = 0.02;
  spec.seed = seed;
  return generate_synthetic(spec);
}

}  // namespace

TEST(Average, Examples) {
  const Matrix a = Matrix::from_rows({{0.8, 0.2}});
  EXPECT_EQ(average_prediction(from_probs({a, a, a})), a);
  EXPECT_EQ(average_prediction(from_probs({Matrix::from_rows({{1, 0}}), Matrix::from_rows({{0, 1}})})),
            Matrix::from_rows({{0.5, 0.5}}));
  const Matrix m = average_prediction(from_probs({a, Matrix::from_rows({{0.6, 0.4}})}));
  EXPECT_NEAR(m(0, 0), 0.7, 1e-15);
  EXPECT_NEAR(m(0, 1), 0.3, 1e-15);
  EXPECT_THROW(average_prediction(EnsembleOutput{}), std::invalid_argument);
}

TEST(Sharpen, Examples) {
  Rng rng(1);
  const Matrix z = random_distribution(20, 4, rng);
  EXPECT_LE(max_abs_diff(sharpen(z, 1.0).probs, z), 1e-12);

  const auto half = sharpen(Matrix::from_rows({{0.5, 0.5}}), 0.1).probs;
  EXPECT_NEAR(half(0, 0), 0.5, 1e-15);

  const auto s = sharpen(Matrix::from_rows({{0.8, 0.2}}), 0.5).probs;
  EXPECT_NEAR(s(0, 0), 0.94117647, 1e-8);
  EXPECT_NEAR(s(0, 1), 0.05882353, 1e-8);

  EXPECT_THROW(sharpen(z, 0.0), std::invalid_argument);
  EXPECT_THROW(sharpen(z, -1.0), std::invalid_argument);
}

TEST(Sharpen, SurvivesTinyTemperatureAndZeros) {
  const auto s = sharpen(Matrix::from_rows({{0.6, 0.4, 0.0}}), 1e-3).probs;
  EXPECT_TRUE(all_finite(s));
  EXPECT_NEAR(s(0, 0), 1.0, 1e-12);
  EXPECT_EQ(s(0, 2), 0.0);
}

TEST(Sharpen, PreservesArgmaxAndReducesEntropy) {
  Rng rng(2);
  for (int trial = 0; trial < 20; ++trial) {
    const Matrix z = random_distribution(15, 5, rng);
    for (double t : {0.05, 0.3, 0.5, 0.9, 1.0, 2.0, 7.0}) {
      const Matrix s = sharpen(z, t).probs;
      EXPECT_EQ(argmax_rows(s), argmax_rows(z));
      for (std::size_t i = 0; i < z.rows(); ++i) {
        double sum = 0.0;
        for (double v : s.row(i)) sum += v;
        EXPECT_NEAR(sum, 1.0, 1e-9);
        if (t < 1.0) {
          EXPECT_LE(entropy(s.row(i)), entropy(z.row(i)) + 1e-12);
        }
      }
    }
  }
}

TEST(SupervisedLoss, Examples) {
  const std::vector<int> labels{0, 1, 2, 0};
  const std::vector<std::size_t> train{0, 1, 2};
  const Matrix perfect = Matrix::from_rows({{1, 0, 0}, {0, 1, 0}, {0, 0, 1}, {0, 1, 0}});
  EXPECT_EQ(supervised_loss(from_probs({perfect}), labels, train), 0.0);

  const Matrix uniform(4, 3, 1.0 / 3.0);
  EXPECT_NEAR(supervised_loss(from_probs({uniform, uniform}), labels, train), 3 * std::log(3.0), 1e-12);

  const std::vector<int> one{0};
  const std::vector<std::size_t> first{0};
  EXPECT_NEAR(supervised_loss(from_probs({Matrix::from_rows({{0.75, 0.25}})}), one, first), 0.28768207, 1e-8);

  EXPECT_THROW(supervised_loss(from_probs({perfect}), labels, {}), std::invalid_argument);
}

TEST(SupervisedLoss, FloorKeepsItFinite) {
  const std::vector<int> labels{1};
  const std::vector<std::size_t> train{0};
  const double v = supervised_loss(from_probs({Matrix::from_rows({{1, 0}})}), labels, train);
  EXPECT_NEAR(v, -std::log(1e-30), 1e-9);
}

TEST(ConsistencyLoss, Examples) {
  const Matrix t = Matrix::from_rows({{1, 0}});
  EXPECT_EQ(consistency_loss(from_probs({t, t}), {t, 0.5}), 0.0);
  const Matrix half = Matrix::from_rows({{0.5, 0.5}});
  EXPECT_EQ(consistency_loss(from_probs({half}), {t, 0.5}), 0.5);

  Rng rng(3);
  const Matrix a = random_distribution(6, 3, rng);
  const Matrix b = random_distribution(6, 3, rng);
  const SharpenedTarget target = sharpen(random_distribution(6, 3, rng), 0.5);
  const double two = consistency_loss(from_probs({a, b}), target);
  EXPECT_NEAR(consistency_loss(from_probs({a, b, a, b}), target), two, 1e-14);
  EXPECT_GE(two, 0.0);
}

TEST(TotalLoss, Examples) {
  EXPECT_EQ(total_loss(1.25, 9.0, 0.0).total, 1.25);
  EXPECT_EQ(total_loss(1.0, 0.5, 2.0).total, 2.0);
  EXPECT_EQ(total_loss(0.0, 0.0, 1.0).total, 0.0);
  Rng rng(4);
  for (int k = 0; k < 100; ++k) {
    const double sup = rng.uniform(0, 50), unsup = rng.uniform(0, 5), lambda = rng.uniform(0, 3);
    const LossBreakdown b = total_loss(sup, unsup, lambda);
    EXPECT_EQ(b.total, sup + lambda * unsup);
    EXPECT_EQ(b.sup, sup);
    EXPECT_EQ(b.unsup, unsup);
    EXPECT_EQ(b.lambda, lambda);
  }
}

TEST(EnsembleForward, Contracts) {
  auto inst = oracle::make_instance({}, 1);
  const ForwardConfig no_drop{AggregatorKind::attention, PerceptionMode::dual, 0.0};
  const auto e = ensemble_forward(inst.inputs, inst.params, no_drop, 3, 77);
  ASSERT_EQ(e.samples(), 3u);
  EXPECT_EQ(e.probs[0], e.probs[1]);
  EXPECT_EQ(e.probs[0], e.probs[2]);

  const ForwardConfig drop{AggregatorKind::attention, PerceptionMode::dual, 0.5};
  const auto x = ensemble_forward(inst.inputs, inst.params, drop, 3, 77);
  const auto y = ensemble_forward(inst.inputs, inst.params, drop, 3, 77);
  for (std::size_t s = 0; s < 3; ++s) EXPECT_EQ(x.probs[s], y.probs[s]);
  EXPECT_NE(x.probs[0], x.probs[1]);

  EXPECT_THROW(ensemble_forward(inst.inputs, inst.params, drop, 0, 77), std::invalid_argument);
}

TEST(Gradients, MatchFiniteDifferencesOnReferenceInstance) {
  const auto inst = oracle::make_instance({}, 2024);
  const auto report = oracle::check_gradients(inst);
  EXPECT_LE(report.worst, 1e-5) << report.worst_tensor;
}

TEST(Gradients, FusedCrossEntropyIdentity) {
  // lambda = 0 and one pass: dL/d(output) is p - y on training rows, zero elsewhere.
  auto inst = oracle::make_instance({}, 5);
  inst.masks.resize(1);
  inst.lambda = 0.0;
  const auto e = oracle::frozen_ensemble(inst, inst.params);
  const auto target = sharpen(average_prediction(e), 0.5);
  const auto grads =
      compute_gradients(e, target, inst.labels, inst.train, 0.0, inst.inputs, inst.params, inst.config);

  Matrix upstream(10, 3);
  for (std::size_t i : inst.train) {
    for (std::size_t c = 0; c < 3; ++c) upstream(i, c) = e.probs[0](i, c);
    upstream(i, static_cast<std::size_t>(inst.labels[i])) -= 1.0;
  }
  const auto expected = backward(e.traces[0], upstream, inst.inputs, inst.params, inst.config);
  for (std::size_t t = 0; t < ModelParameters::kTensorCount; ++t)
    EXPECT_LE(max_abs_diff(*grads.tensors()[t], *expected.tensors()[t]), 1e-12) << ModelParameters::kNames[t];
}

TEST(Gradients, PerfectPredictionsGiveZeroSupervisedGradient) {
  ModelInputs inputs;
  inputs.features = Matrix::from_rows({{1, 0}, {0, 1}});
  ModelParameters p = ModelParameters::zeros({2, 2, 2, 2, 1, 1});
  p.w_hidden = Matrix::identity(2);
  p.w_topo = scaled(Matrix::identity(2), 200.0);
  const ForwardConfig cfg{AggregatorKind::mean, PerceptionMode::mlp_only, 0.0};
  const auto e = ensemble_forward(inputs, p, cfg, 1, 0);
  const std::vector<int> labels{0, 1};
  const std::vector<std::size_t> train{0, 1};
  const auto g = compute_gradients(e, sharpen(average_prediction(e), 0.5), labels, train, 0.0, inputs, p, cfg);
  for (const Matrix* m : g.tensors())
    for (double v : m->values()) EXPECT_NEAR(v, 0.0, 1e-80);
}

TEST(Adam, ZeroGradientIsNoop) {
  Rng rng(1);
  ModelParameters p = init_parameters({6, 4, 3, 2, 2, 2}, rng);
  const ModelParameters before = p;
  auto state = OptimizerState::for_parameters(p, 0.01, 0.0);
  adam_update(p, ModelParameters::zeros(p.shape()), state);
  EXPECT_EQ(p, before);
  EXPECT_EQ(state.step, 1u);
}

TEST(Adam, FirstStepIsSignedLearningRate) {
  Rng rng(2);
  ModelParameters p = init_parameters({6, 4, 3, 2, 2, 2}, rng);
  const ModelParameters before = p;
  ModelParameters g = ModelParameters::zeros(p.shape());
  for (Matrix* m : g.tensors())
    for (double& v : m->values()) v = rng.bernoulli(0.5) ? rng.uniform(0.1, 4) : -rng.uniform(0.1, 4);
  auto state = OptimizerState::for_parameters(p, 0.01, 0.0);
  adam_update(p, g, state);
  for (std::size_t t = 0; t < ModelParameters::kTensorCount; ++t) {
    for (std::size_t k = 0; k < p.tensors()[t]->size(); ++k) {
      const double gk = g.tensors()[t]->data()[k];
      const double delta = p.tensors()[t]->data()[k] - before.tensors()[t]->data()[k];
      EXPECT_NEAR(delta, -0.01 * gk / (std::abs(gk) + 1e-8), 1e-12);
    }
  }
}

TEST(Adam, DeterministicGivenState) {
  Rng rng(3);
  ModelParameters p = init_parameters({6, 4, 3, 2, 2, 2}, rng);
  ModelParameters g = p;
  auto s1 = OptimizerState::for_parameters(p, 0.01, 5e-4);
  auto s2 = s1;
  ModelParameters a = p, b = p;
  for (int k = 0; k < 3; ++k) {
    adam_update(a, g, s1);
    adam_update(b, g, s2);
  }
  EXPECT_EQ(a, b);
  EXPECT_EQ(s1, s2);
}

TEST(Accuracy, Counting) {
  const Matrix scores = Matrix::from_rows({{2, 1}, {0, 3}, {1, 1}, {5, 0}});
  const std::vector<int> labels{0, 1, 0, 1};
  const std::vector<std::size_t> all{0, 1, 2, 3};
  EXPECT_EQ(accuracy(scores, labels, all), 0.75);
  EXPECT_EQ(accuracy(scores, labels, std::vector<std::size_t>{0, 1}), 1.0);
  EXPECT_EQ(accuracy(scores, labels, std::vector<std::size_t>{3}), 0.0);
  EXPECT_EQ(argmax_rows(scores)[2], 0);
  EXPECT_THROW(accuracy(scores, labels, {}), std::invalid_argument);
}

TEST(Fit, SeparableProblemReachesFullTrainAccuracy) {
  const auto data = separable(30, 3, 1);
  TrainConfig cfg;
  cfg.max_epochs = 200;
  cfg.patience = 200;
  cfg.top_k = 4;
  cfg.seed = 1;
  const auto r = fit(data, cfg);
  bool reached = false;
  for (const auto& h : r.history) reached = reached || h.train_accuracy == 1.0;
  EXPECT_TRUE(reached);
}

TEST(Fit, PatienceStopsExactly) {
  const auto data = separable(40, 2, 2);
  TrainConfig cfg;
  cfg.learning_rate = 0.0;
  cfg.patience = 10;
  cfg.top_k = 4;
  const auto r = fit(data, cfg);
  EXPECT_EQ(r.epochs_run, r.best_epoch + 10);
  EXPECT_EQ(r.history.size(), r.epochs_run);
}

TEST(Fit, SameSeedSameHistory) {
  const auto data = separable(40, 2, 3);
  TrainConfig cfg;
  cfg.max_epochs = 40;
  cfg.top_k = 4;
  cfg.seed = 9;
  const auto a = fit(data, cfg);
  const auto b = fit(data, cfg);
  EXPECT_EQ(a.history, b.history);
  EXPECT_EQ(a.params, b.params);
  cfg.seed = 10;
  EXPECT_NE(fit(data, cfg).history, a.history);
}

TEST(Fit, EnsembleSizeIrrelevantWithoutDropout) {
  const auto data = separable(40, 2, 4);
  TrainConfig cfg;
  cfg.max_epochs = 40;
  cfg.top_k = 4;
  cfg.dropout = 0.0;
  cfg.samples = 1;
  const auto one = fit(data, cfg);
  cfg.samples = 3;
  const auto three = fit(data, cfg);
  ASSERT_EQ(one.history.size(), three.history.size());
  for (std::size_t k = 0; k < one.history.size(); ++k) {
    EXPECT_NEAR(one.history[k].loss.total, three.history[k].loss.total, 1e-9 * one.history[k].loss.total);
    EXPECT_EQ(one.history[k].val_accuracy, three.history[k].val_accuracy);
  }
  for (std::size_t t = 0; t < ModelParameters::kTensorCount; ++t)
    EXPECT_LE(max_abs_diff(*one.params.tensors()[t], *three.params.tensors()[t]), 1e-9);
}

TEST(Fit, NonFiniteLossNamesEpoch) {
  auto data = separable(20, 2, 5);
  Matrix huge = data.features.matrix();
  for (double& v : huge.values()) v = 1.7e308;
  data.features = NodeFeatures(huge);
  TrainConfig cfg;
  cfg.mode = PerceptionMode::mlp_only;
  try {
    fit(data, cfg);
    FAIL() << "expected divergence";
  } catch (const std::runtime_error& e) {
    EXPECT_NE(std::string(e.what()).find("epoch 1"), std::string::npos) << e.what();
  }
}

TEST(Fit, FallsBackToTrainWithoutValidation) {
  auto data = separable(30, 3, 6);
  data.split.val.clear();
  TrainConfig cfg;
  cfg.max_epochs = 30;
  cfg.top_k = 4;
  const auto r = fit(data, cfg);
  for (const auto& h : r.history) EXPECT_EQ(h.val_accuracy, h.train_accuracy);
}

TEST(TrainConfig, Validation) {
  TrainConfig cfg;
  EXPECT_NO_THROW(cfg.validate());
  cfg.temperature = 0.0;
  EXPECT_THROW(cfg.validate(), std::invalid_argument);
  cfg = {};
  cfg.dropout = 1.0;
  EXPECT_THROW(cfg.validate(), std::invalid_argument);
  cfg = {};
  cfg.samples = 0;
  EXPECT_THROW(cfg.validate(), std::invalid_argument);
}
