#include "tfgnn/train.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "tfgnn/error.hpp"

namespace tfgnn {

namespace {

constexpr std::uint64_t kInitStream = 0;
constexpr std::uint64_t kBatchStream = 1;

}  // namespace

void TrainConfig::validate() const {
  if (!(mask_fraction > 0.0 && mask_fraction <= 1.0)) {
    throw ConfigError("mask_fraction must be in (0, 1], got " + std::to_string(mask_fraction));
  }
  if (!(learning_rate >= 0.0) || !std::isfinite(learning_rate)) {
    throw ConfigError("learning_rate must be finite and non-negative");
  }
  if (!(weight_decay >= 0.0) || !std::isfinite(weight_decay)) {
    throw ConfigError("weight_decay must be finite and non-negative");
  }
  if (!(beta1 >= 0.0 && beta1 < 1.0) || !(beta2 >= 0.0 && beta2 < 1.0)) {
    throw ConfigError("beta1 and beta2 must be in [0, 1)");
  }
  if (!(eps > 0.0)) throw ConfigError("eps must be positive");
  if (eval_every == 0) throw ConfigError("eval_every must be positive");
}

NodeMask sample_batch(const NodeMask& train_nodes, double fraction, Rng& rng) {
  if (!(fraction > 0.0 && fraction <= 1.0)) {
    throw InputError("sample_batch: fraction must be in (0, 1]");
  }
  std::vector<NodeId> pool = train_nodes.indices();
  if (pool.empty()) throw InputError("sample_batch: empty train set");
  const std::size_t n = pool.size();
  // The slack keeps fraction * n from rounding just above an integer.
  auto k = static_cast<std::size_t>(std::ceil(fraction * static_cast<double>(n) - 1e-9));
  k = std::clamp<std::size_t>(k, 1, n);
  for (std::size_t i = 0; i < k; ++i) {
    std::swap(pool[i], pool[i + rng.below(n - i)]);
  }
  NodeMask batch(train_nodes.size());
  for (std::size_t i = 0; i < k; ++i) batch.insert(pool[i]);
  return batch;
}

void adamw_update(Matrix& param, const Matrix& grad, AdamState& state, std::size_t step,
                  const TrainConfig& cfg) {
  if (!param.same_shape(grad) || !param.same_shape(state.m) || !param.same_shape(state.v)) {
    throw InputError("adamw_update: parameter, gradient and moment shapes differ");
  }
  if (step == 0) throw InputError("adamw_update: step is 1-based");
  const double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(step));
  const double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(step));
  double* theta = param.data();
  const double* g = grad.data();
  double* m = state.m.data();
  double* v = state.v.data();
  for (std::size_t i = 0; i < param.size(); ++i) {
    m[i] = cfg.beta1 * m[i] + (1.0 - cfg.beta1) * g[i];
    v[i] = cfg.beta2 * v[i] + (1.0 - cfg.beta2) * g[i] * g[i];
    const double m_hat = m[i] / bc1;
    const double v_hat = v[i] / bc2;
    theta[i] -= cfg.learning_rate * (m_hat / (std::sqrt(v_hat) + cfg.eps) +
                                     cfg.weight_decay * theta[i]);
  }
}

AdamW::AdamW(std::vector<ad::Tensor> params, const TrainConfig& cfg)
    : params_(std::move(params)), cfg_(cfg) {
  for (const auto& p : params_) {
    if (!p.is_leaf() || !p.requires_grad()) {
      throw InputError("AdamW: every tensor must be a trainable parameter");
    }
    state_.push_back({Matrix(p.rows(), p.cols()), Matrix(p.rows(), p.cols())});
  }
}

void AdamW::step() {
  ++step_;
  for (std::size_t i = 0; i < params_.size(); ++i) {
    adamw_update(params_[i].mutable_value(), params_[i].grad(), state_[i], step_, cfg_);
  }
}

void AdamW::zero_grad() {
  for (auto& p : params_) p.zero_grad();
}

double evaluate_accuracy(std::span<const int> pred, std::span<const int> labels,
                         const NodeMask& mask) {
  if (pred.size() != labels.size() || mask.size() != labels.size()) {
    throw InputError("evaluate_accuracy: predictions, labels and mask sizes differ");
  }
  const std::size_t total = mask.count();
  if (total == 0) throw InputError("evaluate_accuracy: empty mask");
  std::size_t correct = 0;
  for (NodeId v : mask.indices()) correct += pred[v] == labels[v];
  return static_cast<double>(correct) / static_cast<double>(total);
}

Matrix perturb_features(const Matrix& x, double sigma, std::uint64_t seed) {
  if (!(sigma >= 0.0)) throw InputError("perturb_features: sigma must be non-negative");
  Matrix out = x;
  if (sigma == 0.0) return out;
  Rng rng(seed);
  for (double& value : out.values()) value += sigma * rng.normal();
  return out;
}

Evaluation evaluate(const NodeClassifier& model, const Dataset& ds) {
  ad::NoGradGuard no_grad;
  const NodeMask none(ds.num_nodes());
  const ForwardResult fwd =
      model.forward(ds.graph, ds.features, ds.labels, ds.split.train, none);
  Evaluation out;
  out.predictions = predict(fwd.probs);
  const NodeMask val = ds.labelled(ds.split.val);
  const NodeMask test = ds.labelled(ds.split.test);
  if (!val.empty()) out.val_acc = evaluate_accuracy(out.predictions, ds.labels, val);
  if (!test.empty()) out.test_acc = evaluate_accuracy(out.predictions, ds.labels, test);
  return out;
}

ad::Tensor batch_loss(const NodeClassifier& model, const Dataset& ds, const NodeMask& batch) {
  const ForwardResult fwd =
      model.forward(ds.graph, ds.features, ds.labels, ds.split.train, batch);
  const std::vector<NodeId> nodes = batch.indices();
  Matrix targets(nodes.size(), model.num_classes());
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    targets(i, static_cast<std::size_t>(ds.labels[nodes[i]])) = 1.0;
  }
  return ad::softmax_cross_entropy(ad::gather_rows(fwd.logits, nodes), targets);
}

TrainResult train_loop(ModelKind kind, const Dataset& ds, const ModelShape& shape,
                       const TrainConfig& cfg) {
  cfg.validate();
  ds.validate();
  if (ds.split.train.empty()) throw InputError("train_loop: dataset has no train nodes");

  NodeClassifier model = NodeClassifier::initialize(
      kind, ds.feature_dim(), ds.num_classes, shape, derive_seed(cfg.seed, kInitStream));
  Rng batch_rng(derive_seed(cfg.seed, kBatchStream));
  AdamW optimizer(model.parameters(), cfg);

  TrainResult result{model.clone(), {}};
  double best_val = -1.0;
  for (std::size_t it = 0;; ++it) {
    const NodeMask batch = sample_batch(ds.split.train, cfg.mask_fraction, batch_rng);
    const ad::Tensor loss = batch_loss(model, ds, batch);
    const double loss_value = loss.value()(0, 0);
    if (!std::isfinite(loss_value)) {
      throw NumericalError("non-finite loss " + std::to_string(loss_value) + " at iteration " +
                           std::to_string(it) + " (" + std::string(to_string(kind)) + ")");
    }

    if (it % cfg.eval_every == 0 || it == cfg.max_iters) {
      const Evaluation eval = evaluate(model, ds);
      result.history.points.push_back({it, loss_value, eval.val_acc, eval.test_acc});
      if (eval.val_acc > best_val) {
        best_val = eval.val_acc;
        result.history.best_index = result.history.points.size() - 1;
        result.best = model.clone();
      }
    }
    if (it == cfg.max_iters) break;

    optimizer.zero_grad();
    ad::backward(loss);
    optimizer.step();
  }
  return result;
}

}  // namespace tfgnn
