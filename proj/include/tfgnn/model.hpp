#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <variant>
#include <vector>

#include "tfgnn/autodiff.hpp"
#include "tfgnn/graph.hpp"
#include "tfgnn/matrix.hpp"
#include "tfgnn/node_mask.hpp"

namespace tfgnn {

// Labels-as-features input: [x_v, indicator, one-hot(y_v)] for train nodes
// outside `masked`, [x_v, 0, ..., 0] for every other node.
//
// Throws InputError if `masked` contains a non-train node, a train node has a
// label outside [0, num_classes), or sizes disagree.
Matrix build_laf(const Matrix& features, std::span<const int> labels, std::size_t num_classes,
                 const NodeMask& train, const NodeMask& masked);

// Width of the label block appended by build_laf.
inline std::size_t label_block_width(std::size_t num_classes) { return 1 + num_classes; }

struct TfgnnShape {
  std::size_t feature_dim = 0;
  std::size_t hidden = 32;  // total width, reserved label block included
  std::size_t layers = 3;
  std::size_t num_classes = 0;
};

// One message-passing layer. Train nodes use the `train_*` pair, all other
// nodes the `test_*` pair:
//   h'_v = ReLU(self h_v + neighbor * mean_{u in N(v)} h_u)
// Weights are (out_width x in_width).
struct TfgnnLayer {
  ad::Tensor train_self;
  ad::Tensor train_neighbor;
  ad::Tensor test_self;
  ad::Tensor test_neighbor;
};

struct TfgnnParams {
  TfgnnShape shape;
  std::vector<TfgnnLayer> layers;
  ad::Tensor head;  // num_classes x hidden

  std::vector<ad::Tensor> tensors() const;
};

// Structured initialisation. The last 1+C output rows of every layer carry
// the label block: train_self and test_neighbor hold an identity on the last
// 1+C input columns and zeros elsewhere, train_neighbor and test_self are
// zero. The head reads the last C channels through an identity. Everything
// else is Xavier-uniform from `seed`.
//
// With these weights, the last C channels after L layers equal the L-step
// first-hit probabilities of label propagation.
//
// Throws ConfigError when hidden <= 1 + C or layers == 0.
TfgnnParams init_tfgnn(const TfgnnShape& shape, std::uint64_t seed);

struct ForwardResult {
  ad::Tensor logits;                // n x C
  Matrix probs;                     // row-wise softmax of logits
  std::vector<ad::Tensor> hidden;   // hidden[0] is the input, hidden[l] layer l
};

// Branch selection follows `train` membership, not the indicator bit, so
// masked train nodes keep the train branch.
ForwardResult tfgnn_forward(const TfgnnParams& params, const Graph& g, const Matrix& input,
                            const NodeMask& train);

struct GcnShape {
  std::size_t input_dim = 0;
  std::size_t hidden = 32;
  std::size_t layers = 3;
  std::size_t num_classes = 0;
};

// Layers h <- ReLU(A_hat h W^T) with A_hat = D^-1/2 (A + I) D^-1/2, then a
// linear head. No bias terms.
struct GcnParams {
  GcnShape shape;
  std::vector<ad::Tensor> layers;
  ad::Tensor head;

  std::vector<ad::Tensor> tensors() const;
};

GcnParams init_gcn(const GcnShape& shape, std::uint64_t seed);

ForwardResult gcn_forward(const GcnParams& params, const Graph& g, const Matrix& input);

// Row-wise argmax; ties go to the smallest class index.
std::vector<int> predict(const Matrix& probs);

enum class ModelKind { Tfgnn, Gcn, GcnLaf };

std::string_view to_string(ModelKind kind);
std::optional<ModelKind> parse_model_kind(std::string_view name);

struct ModelShape {
  std::size_t layers = 3;
  std::size_t hidden = 32;
};

// A TFGNN, GCN or GCN+LaF behind one interface, so training and evaluation
// code does not branch on the architecture.
class NodeClassifier {
 public:
  static NodeClassifier initialize(ModelKind kind, std::size_t feature_dim,
                                   std::size_t num_classes, const ModelShape& shape,
                                   std::uint64_t seed);

  ModelKind kind() const noexcept { return kind_; }
  bool uses_laf() const noexcept { return kind_ != ModelKind::Gcn; }
  std::size_t num_classes() const noexcept { return num_classes_; }

  std::vector<ad::Tensor> parameters() const;

  // Full-graph forward. `masked` train nodes get an empty label block.
  ForwardResult forward(const Graph& g, const Matrix& features, std::span<const int> labels,
                        const NodeMask& train, const NodeMask& masked) const;

  // Independent copy of the current parameter values.
  NodeClassifier clone() const;

  const TfgnnParams* tfgnn() const { return std::get_if<TfgnnParams>(&params_); }
  const GcnParams* gcn() const { return std::get_if<GcnParams>(&params_); }

 private:
  NodeClassifier(ModelKind kind, std::size_t num_classes,
                 std::variant<TfgnnParams, GcnParams> params)
      : kind_(kind), num_classes_(num_classes), params_(std::move(params)) {}

  ModelKind kind_;
  std::size_t num_classes_;
  std::variant<TfgnnParams, GcnParams> params_;
};

}  // namespace tfgnn
