#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "tfgnn/autodiff.hpp"
#include "tfgnn/dataset.hpp"
#include "tfgnn/matrix.hpp"
#include "tfgnn/model.hpp"
#include "tfgnn/node_mask.hpp"
#include "tfgnn/rng.hpp"

namespace tfgnn {

struct TrainConfig {
  double learning_rate = 1e-4;
  double weight_decay = 0.01;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  std::size_t max_iters = 2000;
  double mask_fraction = 0.5;
  std::size_t eval_every = 10;
  std::uint64_t seed = 0;

  // Throws ConfigError unless 0 < mask_fraction <= 1, learning_rate >= 0,
  // weight_decay >= 0, betas in [0, 1), eps > 0 and eval_every > 0.
  void validate() const;
};

struct HistoryPoint {
  std::size_t iteration = 0;
  double loss = 0.0;  // masked-batch loss at the parameters being evaluated
  double val_acc = 0.0;
  double test_acc = 0.0;

  friend bool operator==(const HistoryPoint&, const HistoryPoint&) = default;
};

struct TrainHistory {
  std::vector<HistoryPoint> points;
  std::size_t best_index = 0;  // best validation accuracy, ties to the earliest

  friend bool operator==(const TrainHistory&, const TrainHistory&) = default;
};

// Uniform sample without replacement of ceil(fraction * |train_nodes|) nodes,
// at least one. Throws InputError if train_nodes is empty or fraction is not
// in (0, 1].
NodeMask sample_batch(const NodeMask& train_nodes, double fraction, Rng& rng);

struct AdamState {
  Matrix m;
  Matrix v;
};

// One AdamW update with bias correction and decoupled weight decay:
//   theta <- theta - lr * (m_hat / (sqrt(v_hat) + eps) + wd * theta)
// `step` is 1-based. Throws InputError on shape mismatch or step == 0.
void adamw_update(Matrix& param, const Matrix& grad, AdamState& state, std::size_t step,
                  const TrainConfig& cfg);

class AdamW {
 public:
  AdamW(std::vector<ad::Tensor> params, const TrainConfig& cfg);

  // Applies one update from the accumulated gradients.
  void step();
  void zero_grad();
  std::size_t steps_taken() const { return step_; }

 private:
  std::vector<ad::Tensor> params_;
  std::vector<AdamState> state_;
  TrainConfig cfg_;
  std::size_t step_ = 0;
};

// |{v in mask : pred_v == labels_v}| / |mask|. Throws InputError if the mask
// is empty or sizes disagree.
double evaluate_accuracy(std::span<const int> pred, std::span<const int> labels,
                         const NodeMask& mask);

// X + N(0, sigma^2) i.i.d. per entry. Throws InputError if sigma < 0.
Matrix perturb_features(const Matrix& x, double sigma, std::uint64_t seed);

struct Evaluation {
  double val_acc = 0.0;
  double test_acc = 0.0;
  std::vector<int> predictions;
};

// Forward with every train label visible and accuracy on the labelled part
// of the validation and test sets. Missing sets score 0.
Evaluation evaluate(const NodeClassifier& model, const Dataset& ds);

// Cross-entropy of `model` on the nodes of `batch`, with those nodes' labels
// hidden from the input.
ad::Tensor batch_loss(const NodeClassifier& model, const Dataset& ds, const NodeMask& batch);

struct TrainResult {
  NodeClassifier best;
  TrainHistory history;
};

// Trains from the initialisation given by (kind, shape, cfg.seed). History
// point t is evaluated at the parameters after t updates, so t = 0 is the
// untrained model. Throws NumericalError on a non-finite loss.
TrainResult train_loop(ModelKind kind, const Dataset& ds, const ModelShape& shape,
                       const TrainConfig& cfg);

}  // namespace tfgnn
