#include <gtest/gtest.h>

#include <cmath>

#include "support/support.hpp"
#include "tfgnn/error.hpp"
#include "tfgnn/train.hpp"

namespace tfgnn {
namespace {

NodeMask first_k(std::size_t n, std::size_t k) {
  NodeMask m(n);
  for (NodeId v = 0; v < k; ++v) m.insert(v);
  return m;
}

TEST(SampleBatch, SizesAndDeterminism) {
  const NodeMask train = first_k(200, 140);
  Rng a(1);
  EXPECT_EQ(sample_batch(train, 1.0, a), train);
  Rng b(1);
  EXPECT_EQ(sample_batch(train, 1e-9, b).count(), 1u);
  Rng c(1);
  EXPECT_EQ(sample_batch(train, 0.5, c).count(), 70u);
  Rng d(1);
  EXPECT_EQ(sample_batch(train, 0.3, d).count(), 42u);
  Rng e(1);
  EXPECT_EQ(sample_batch(train, 0.301, e).count(), 43u);

  Rng s1(9);
  Rng s2(9);
  EXPECT_EQ(sample_batch(train, 0.5, s1), sample_batch(train, 0.5, s2));

  Rng r(0);
  EXPECT_THROW(sample_batch(NodeMask(5), 0.5, r), InputError);
  EXPECT_THROW(sample_batch(train, 0.0, r), InputError);
}

TEST(SampleBatch, SubsetOfTrainAndUniform) {
  const std::size_t n = 20;
  NodeMask train(n);
  for (NodeId v = 0; v < n; v += 2) train.insert(v);
  Rng rng(3);
  std::vector<double> hits(n, 0.0);
  const int draws = 20000;
  for (int i = 0; i < draws; ++i) {
    const NodeMask b = sample_batch(train, 0.3, rng);
    ASSERT_EQ(b.count(), 3u);
    for (NodeId v : b.indices()) {
      ASSERT_TRUE(train.contains(v));
      hits[v] += 1.0;
    }
  }
  // Each of the 10 train nodes is picked with probability 3/10.
  const double p = 0.3;
  const double sd = std::sqrt(draws * p * (1 - p));
  for (NodeId v = 0; v < n; v += 2) EXPECT_NEAR(hits[v], draws * p, 4.0 * sd);
}

TEST(AdamW, OneHandStep) {
  Matrix theta = Matrix::from_rows({{1.0}});
  AdamState state{Matrix(1, 1), Matrix(1, 1)};
  TrainConfig cfg;
  adamw_update(theta, Matrix::from_rows({{1.0}}), state, 1, cfg);
  // m_hat = 1, v_hat = 1, so the step is lr * (1 / (1 + eps) + wd).
  EXPECT_NEAR(theta(0, 0), 1.0 - 1e-4 * (1.0 / (1.0 + 1e-8) + 0.01), 1e-15);
  EXPECT_NEAR(theta(0, 0), 0.999899, 1e-9);
  EXPECT_NEAR(state.m(0, 0), 0.1, 1e-15);
  EXPECT_NEAR(state.v(0, 0), 0.001, 1e-15);
}

TEST(AdamW, ZeroGradient) {
  TrainConfig cfg;
  cfg.weight_decay = 0.0;
  Matrix theta = Matrix::from_rows({{2.0, -3.0}});
  AdamState state{Matrix::from_rows({{0.5, 0.5}}), Matrix::from_rows({{0.25, 0.25}})};
  adamw_update(theta, Matrix(1, 2), state, 3, cfg);
  EXPECT_EQ(state.m, Matrix::from_rows({{0.45, 0.45}}));
  EXPECT_NEAR(state.v(0, 0), 0.25 * 0.999, 1e-17);

  cfg.weight_decay = 0.01;
  Matrix decayed = Matrix::from_rows({{2.0}});
  AdamState fresh{Matrix(1, 1), Matrix(1, 1)};
  adamw_update(decayed, Matrix(1, 1), fresh, 1, cfg);
  EXPECT_EQ(decayed(0, 0), 2.0 - 1e-4 * 0.01 * 2.0);
}

TEST(AdamW, ZeroLearningRateIsBitIdentical) {
  TrainConfig cfg;
  cfg.learning_rate = 0.0;
  Rng rng(4);
  Matrix theta = testing::random_matrix(4, 5, rng);
  const Matrix before = theta;
  AdamState state{Matrix(4, 5), Matrix(4, 5)};
  for (std::size_t step = 1; step <= 5; ++step) {
    adamw_update(theta, testing::random_matrix(4, 5, rng), state, step, cfg);
  }
  EXPECT_EQ(theta, before);
}

TEST(AdamW, ShapeMismatchThrows) {
  Matrix theta(2, 2);
  AdamState state{Matrix(2, 2), Matrix(2, 2)};
  TrainConfig cfg;
  EXPECT_THROW(adamw_update(theta, Matrix(2, 3), state, 1, cfg), InputError);
  EXPECT_THROW(adamw_update(theta, Matrix(2, 2), state, 0, cfg), InputError);
}

TEST(TrainConfig, Validation) {
  TrainConfig cfg;
  EXPECT_NO_THROW(cfg.validate());
  cfg.mask_fraction = 0.0;
  EXPECT_THROW(cfg.validate(), ConfigError);
  cfg.mask_fraction = 1.5;
  EXPECT_THROW(cfg.validate(), ConfigError);
  cfg = TrainConfig{};
  cfg.eval_every = 0;
  EXPECT_THROW(cfg.validate(), ConfigError);
  cfg = TrainConfig{};
  cfg.learning_rate = -1.0;
  EXPECT_THROW(cfg.validate(), ConfigError);
}

TEST(EvaluateAccuracy, Examples) {
  const std::vector<int> labels{0, 1, 2, 1};
  const NodeMask all = first_k(4, 4);
  EXPECT_EQ(evaluate_accuracy(labels, labels, all), 1.0);
  EXPECT_EQ(evaluate_accuracy(std::vector<int>{1, 0, 0, 0}, labels, all), 0.0);
  EXPECT_EQ(evaluate_accuracy(std::vector<int>{0, 1, 2, 0}, labels, all), 0.75);
  EXPECT_EQ(evaluate_accuracy(std::vector<int>{0, 0, 0, 0}, labels, first_k(4, 1)), 1.0);
  EXPECT_THROW(evaluate_accuracy(labels, labels, NodeMask(4)), InputError);
}

TEST(PerturbFeatures, ZeroSigmaAndErrors) {
  Rng rng(1);
  const Matrix x = testing::random_matrix(5, 3, rng);
  EXPECT_EQ(perturb_features(x, 0.0, 7), x);
  EXPECT_THROW(perturb_features(x, -0.1, 7), InputError);
  EXPECT_EQ(perturb_features(x, 0.5, 7), perturb_features(x, 0.5, 7));
  EXPECT_NE(perturb_features(x, 0.5, 7), perturb_features(x, 0.5, 8));
}

TEST(PerturbFeatures, NoiseMoments) {
  const double sigma = 0.7;
  const Matrix x(1000, 1000, 2.0);
  const Matrix noisy = perturb_features(x, sigma, 123);
  double sum = 0.0;
  double sq = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double d = noisy.data()[i] - x.data()[i];
    sum += d;
    sq += d * d;
  }
  const double count = static_cast<double>(x.size());
  const double mean = sum / count;
  const double sd = std::sqrt(sq / count - mean * mean);
  EXPECT_LE(std::abs(mean), 4.0 * sigma / 1000.0);
  EXPECT_NEAR(sd, sigma, 0.01 * sigma);
}

TEST(TrainLoop, ZeroIterationsReturnsInitialModel) {
  const Dataset ds = testing::random_dataset(20, 0.3, 3, 4, 1);
  TrainConfig cfg;
  cfg.max_iters = 0;
  cfg.seed = 5;
  const TrainResult r = train_loop(ModelKind::Tfgnn, ds, {2, 8}, cfg);
  ASSERT_EQ(r.history.points.size(), 1u);
  EXPECT_EQ(r.history.points[0].iteration, 0u);
  const NodeClassifier init =
      NodeClassifier::initialize(ModelKind::Tfgnn, 4, 3, {2, 8}, derive_seed(5, 0));
  const auto a = r.best.parameters();
  const auto b = init.parameters();
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_EQ(a[i].value(), b[i].value());
  EXPECT_EQ(evaluate(r.best, ds).test_acc, r.history.points[0].test_acc);
}

TEST(TrainLoop, HistoryIsReproducibleAndOrdered) {
  const Dataset ds = testing::random_dataset(30, 0.2, 2, 3, 2);
  TrainConfig cfg;
  cfg.max_iters = 25;
  cfg.eval_every = 10;
  cfg.learning_rate = 0.01;
  cfg.seed = 3;
  for (ModelKind kind : {ModelKind::Tfgnn, ModelKind::Gcn, ModelKind::GcnLaf}) {
    const TrainResult a = train_loop(kind, ds, {2, 8}, cfg);
    const TrainResult b = train_loop(kind, ds, {2, 8}, cfg);
    EXPECT_EQ(a.history, b.history);
    std::vector<std::size_t> iters;
    for (const auto& p : a.history.points) iters.push_back(p.iteration);
    EXPECT_EQ(iters, (std::vector<std::size_t>{0, 10, 20, 25}));
    const double best = a.history.points[a.history.best_index].val_acc;
    for (std::size_t i = 0; i < a.history.points.size(); ++i) {
      EXPECT_LE(a.history.points[i].val_acc, best);
      if (i < a.history.best_index) EXPECT_LT(a.history.points[i].val_acc, best);
    }
    EXPECT_EQ(evaluate(a.best, ds).val_acc, best);
  }
}

// Smoothed batch loss falls over the first 100 iterations on a fixed
// 20-node ER dataset.
TEST(TrainLoop, LossDecreases) {
  const Dataset ds = testing::random_dataset(20, 0.3, 2, 4, 11);
  TrainConfig cfg;
  cfg.max_iters = 100;
  cfg.eval_every = 1;
  cfg.learning_rate = 0.01;
  cfg.seed = 1;
  for (ModelKind kind : {ModelKind::Tfgnn, ModelKind::Gcn}) {
    const TrainResult r = train_loop(kind, ds, {2, 8}, cfg);
    ASSERT_EQ(r.history.points.size(), 101u);
    double head = 0.0;
    double tail = 0.0;
    for (std::size_t i = 0; i < 20; ++i) {
      head += r.history.points[i].loss;
      tail += r.history.points[81 + i].loss;
    }
    EXPECT_LT(tail, head) << to_string(kind);
  }
}

// With every train node masked, the loss input carries no train label, so
// changing the train labels only changes the targets, not the logits.
TEST(TrainLoop, FullMaskHidesAllTrainLabels) {
  Dataset ds = testing::random_dataset(15, 0.3, 3, 2, 4);
  const NodeClassifier model = NodeClassifier::initialize(ModelKind::Tfgnn, 2, 3, {2, 8}, 1);
  const NodeMask all_train = ds.split.train;
  const ForwardResult a =
      model.forward(ds.graph, ds.features, ds.labels, ds.split.train, all_train);
  for (NodeId v : all_train.indices()) ds.labels[v] = (ds.labels[v] + 1) % 3;
  const ForwardResult b =
      model.forward(ds.graph, ds.features, ds.labels, ds.split.train, all_train);
  EXPECT_EQ(a.logits.value(), b.logits.value());
}

// The batch loss only reads logits of batch nodes.
TEST(TrainLoop, LossIgnoresNodesOutsideBatch) {
  const Dataset ds = testing::random_dataset(20, 0.3, 2, 3, 6);
  const NodeClassifier model = NodeClassifier::initialize(ModelKind::Gcn, 3, 2, {2, 8}, 1);
  NodeMask batch(20);
  batch.insert(0);
  const ad::Tensor loss = batch_loss(model, ds, batch);
  const ForwardResult fwd = model.forward(ds.graph, ds.features, ds.labels, ds.split.train, batch);
  const Matrix p = ad::softmax_rows(fwd.logits.value());
  EXPECT_NEAR(loss.value()(0, 0), -std::log(p(0, static_cast<std::size_t>(ds.labels[0]))), 1e-12);
}

}  // namespace
}  // namespace tfgnn
