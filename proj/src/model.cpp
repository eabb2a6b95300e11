#include "tfgnn/model.hpp"

#include <cmath>
#include <string>

#include "tfgnn/error.hpp"
#include "tfgnn/rng.hpp"

namespace tfgnn {

namespace {

Matrix xavier_uniform(std::size_t out, std::size_t in, Rng& rng) {
  const double bound = std::sqrt(6.0 / static_cast<double>(in + out));
  Matrix m(out, in);
  for (double& x : m.values()) x = rng.uniform(-bound, bound);
  return m;
}

// Zeroes the last `block` rows, then optionally writes an identity into
// their last `block` columns.
void set_reserved_rows(Matrix& w, std::size_t block, bool identity) {
  const std::size_t first_row = w.rows() - block;
  const std::size_t first_col = w.cols() - block;
  for (std::size_t r = first_row; r < w.rows(); ++r) {
    auto row = w.row(r);
    std::fill(row.begin(), row.end(), 0.0);
    if (identity) row[first_col + (r - first_row)] = 1.0;
  }
}

}  // namespace

Matrix build_laf(const Matrix& features, std::span<const int> labels, std::size_t num_classes,
                 const NodeMask& train, const NodeMask& masked) {
  const std::size_t n = features.rows();
  if (labels.size() != n || train.size() != n || masked.size() != n) {
    throw InputError("build_laf: features, labels and masks must cover the same nodes");
  }
  const std::size_t d = features.cols();
  Matrix out(n, d + label_block_width(num_classes));
  for (NodeId v = 0; v < n; ++v) {
    if (masked.contains(v) && !train.contains(v)) {
      throw InputError("build_laf: masked node " + std::to_string(v) + " is not a train node");
    }
    const auto src = features.row(v);
    auto dst = out.row(v);
    std::copy(src.begin(), src.end(), dst.begin());
    if (train.contains(v) && !masked.contains(v)) {
      const int y = labels[v];
      if (y < 0 || static_cast<std::size_t>(y) >= num_classes) {
        throw InputError("build_laf: train node " + std::to_string(v) + " has invalid class " +
                         std::to_string(y));
      }
      dst[d] = 1.0;
      dst[d + 1 + static_cast<std::size_t>(y)] = 1.0;
    }
  }
  return out;
}

std::vector<ad::Tensor> TfgnnParams::tensors() const {
  std::vector<ad::Tensor> out;
  for (const auto& layer : layers) {
    out.insert(out.end(),
               {layer.train_self, layer.train_neighbor, layer.test_self, layer.test_neighbor});
  }
  out.push_back(head);
  return out;
}

TfgnnParams init_tfgnn(const TfgnnShape& shape, std::uint64_t seed) {
  const std::size_t block = label_block_width(shape.num_classes);
  if (shape.num_classes == 0) throw ConfigError("TFGNN needs at least one class");
  if (shape.hidden <= block) {
    throw ConfigError("hidden width " + std::to_string(shape.hidden) +
                      " leaves no free channel next to the " + std::to_string(block) +
                      "-wide label block");
  }
  if (shape.layers == 0) throw ConfigError("TFGNN needs at least one layer");

  Rng rng(seed);
  TfgnnParams params;
  params.shape = shape;
  std::size_t in = shape.feature_dim + block;
  for (std::size_t l = 0; l < shape.layers; ++l) {
    const std::size_t out = shape.hidden;
    Matrix train_self = xavier_uniform(out, in, rng);
    Matrix train_neighbor = xavier_uniform(out, in, rng);
    Matrix test_self = xavier_uniform(out, in, rng);
    Matrix test_neighbor = xavier_uniform(out, in, rng);
    set_reserved_rows(train_self, block, true);
    set_reserved_rows(train_neighbor, block, false);
    set_reserved_rows(test_self, block, false);
    set_reserved_rows(test_neighbor, block, true);
    params.layers.push_back({ad::Tensor::parameter(std::move(train_self)),
                             ad::Tensor::parameter(std::move(train_neighbor)),
                             ad::Tensor::parameter(std::move(test_self)),
                             ad::Tensor::parameter(std::move(test_neighbor))});
    in = out;
  }

  Matrix head(shape.num_classes, shape.hidden);
  const std::size_t first_col = shape.hidden - shape.num_classes;
  for (std::size_t c = 0; c < shape.num_classes; ++c) head(c, first_col + c) = 1.0;
  params.head = ad::Tensor::parameter(std::move(head));
  return params;
}

ForwardResult tfgnn_forward(const TfgnnParams& params, const Graph& g, const Matrix& input,
                            const NodeMask& train) {
  if (params.layers.empty()) throw InputError("tfgnn_forward: no layers");
  if (input.rows() != g.num_nodes() || train.size() != g.num_nodes()) {
    throw InputError("tfgnn_forward: input rows and train mask must match the node count");
  }
  if (input.cols() != params.layers.front().train_self.cols()) {
    throw InputError("tfgnn_forward: input width " + std::to_string(input.cols()) +
                     " does not match the first layer (" +
                     std::to_string(params.layers.front().train_self.cols()) + ")");
  }

  ForwardResult result;
  ad::Tensor h = ad::Tensor::constant(input);
  result.hidden.push_back(h);
  for (const auto& layer : params.layers) {
    const ad::Tensor neighbor_mean = ad::mean_neighbor_aggregate(g, h);
    const ad::Tensor as_train =
        ad::add(ad::linear(h, layer.train_self), ad::linear(neighbor_mean, layer.train_neighbor));
    const ad::Tensor as_test =
        ad::add(ad::linear(h, layer.test_self), ad::linear(neighbor_mean, layer.test_neighbor));
    h = ad::relu(ad::select_rows(train, as_train, as_test));
    result.hidden.push_back(h);
  }
  result.logits = ad::linear(h, params.head);
  result.probs = ad::softmax_rows(result.logits.value());
  return result;
}

std::vector<ad::Tensor> GcnParams::tensors() const {
  std::vector<ad::Tensor> out = layers;
  out.push_back(head);
  return out;
}

GcnParams init_gcn(const GcnShape& shape, std::uint64_t seed) {
  if (shape.num_classes == 0) throw ConfigError("GCN needs at least one class");
  if (shape.layers == 0 || shape.hidden == 0) throw ConfigError("GCN needs layers and width");
  Rng rng(seed);
  GcnParams params;
  params.shape = shape;
  std::size_t in = shape.input_dim;
  for (std::size_t l = 0; l < shape.layers; ++l) {
    params.layers.push_back(ad::Tensor::parameter(xavier_uniform(shape.hidden, in, rng)));
    in = shape.hidden;
  }
  params.head = ad::Tensor::parameter(xavier_uniform(shape.num_classes, shape.hidden, rng));
  return params;
}

ForwardResult gcn_forward(const GcnParams& params, const Graph& g, const Matrix& input) {
  if (params.layers.empty()) throw InputError("gcn_forward: no layers");
  if (input.rows() != g.num_nodes()) {
    throw InputError("gcn_forward: input rows must match the node count");
  }
  if (input.cols() != params.layers.front().cols()) {
    throw InputError("gcn_forward: input width " + std::to_string(input.cols()) +
                     " does not match the first layer (" +
                     std::to_string(params.layers.front().cols()) + ")");
  }
  ForwardResult result;
  ad::Tensor h = ad::Tensor::constant(input);
  result.hidden.push_back(h);
  for (const auto& weight : params.layers) {
    h = ad::relu(ad::gcn_propagate(g, ad::linear(h, weight)));
    result.hidden.push_back(h);
  }
  result.logits = ad::linear(h, params.head);
  result.probs = ad::softmax_rows(result.logits.value());
  return result;
}

std::vector<int> predict(const Matrix& probs) {
  std::vector<int> out(probs.rows(), 0);
  for (std::size_t v = 0; v < probs.rows(); ++v) {
    const auto row = probs.row(v);
    std::size_t best = 0;
    for (std::size_t i = 1; i < row.size(); ++i) {
      if (row[i] > row[best]) best = i;
    }
    out[v] = static_cast<int>(best);
  }
  return out;
}

std::string_view to_string(ModelKind kind) {
  switch (kind) {
    case ModelKind::Tfgnn:
      return "tfgnn";
    case ModelKind::Gcn:
      return "gcn";
    case ModelKind::GcnLaf:
      return "gcn-laf";
  }
  return "unknown";
}

std::optional<ModelKind> parse_model_kind(std::string_view name) {
  if (name == "tfgnn") return ModelKind::Tfgnn;
  if (name == "gcn") return ModelKind::Gcn;
  if (name == "gcn-laf") return ModelKind::GcnLaf;
  return std::nullopt;
}

NodeClassifier NodeClassifier::initialize(ModelKind kind, std::size_t feature_dim,
                                          std::size_t num_classes, const ModelShape& shape,
                                          std::uint64_t seed) {
  switch (kind) {
    case ModelKind::Tfgnn:
      return NodeClassifier(kind, num_classes,
                            init_tfgnn({feature_dim, shape.hidden, shape.layers, num_classes}, seed));
    case ModelKind::Gcn:
      return NodeClassifier(kind, num_classes,
                            init_gcn({feature_dim, shape.hidden, shape.layers, num_classes}, seed));
    case ModelKind::GcnLaf:
      return NodeClassifier(
          kind, num_classes,
          init_gcn({feature_dim + label_block_width(num_classes), shape.hidden, shape.layers,
                    num_classes},
                   seed));
  }
  throw ConfigError("unknown model kind");
}

std::vector<ad::Tensor> NodeClassifier::parameters() const {
  return std::visit([](const auto& p) { return p.tensors(); }, params_);
}

ForwardResult NodeClassifier::forward(const Graph& g, const Matrix& features,
                                      std::span<const int> labels, const NodeMask& train,
                                      const NodeMask& masked) const {
  if (kind_ == ModelKind::Gcn) return gcn_forward(std::get<GcnParams>(params_), g, features);
  const Matrix input = build_laf(features, labels, num_classes_, train, masked);
  if (kind_ == ModelKind::GcnLaf) return gcn_forward(std::get<GcnParams>(params_), g, input);
  return tfgnn_forward(std::get<TfgnnParams>(params_), g, input, train);
}

NodeClassifier NodeClassifier::clone() const {
  auto copy_tensor = [](const ad::Tensor& t) { return ad::Tensor::parameter(t.value()); };
  if (const auto* p = tfgnn()) {
    TfgnnParams out;
    out.shape = p->shape;
    for (const auto& layer : p->layers) {
      out.layers.push_back({copy_tensor(layer.train_self), copy_tensor(layer.train_neighbor),
                            copy_tensor(layer.test_self), copy_tensor(layer.test_neighbor)});
    }
    out.head = copy_tensor(p->head);
    return NodeClassifier(kind_, num_classes_, std::move(out));
  }
  const auto& p = std::get<GcnParams>(params_);
  GcnParams out;
  out.shape = p.shape;
  for (const auto& w : p.layers) out.layers.push_back(copy_tensor(w));
  out.head = copy_tensor(p.head);
  return NodeClassifier(kind_, num_classes_, std::move(out));
}

}  // namespace tfgnn
