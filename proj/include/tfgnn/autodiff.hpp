#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <span>
#include <vector>

#include "tfgnn/graph.hpp"
#include "tfgnn/matrix.hpp"
#include "tfgnn/node_mask.hpp"

// Reverse-mode automatic differentiation over dense matrices.
//
// A Tensor is a shared handle to a node of the recorded computation. Every
// operation below returns a new node that remembers its inputs and how to
// push gradients back to them; `backward` walks the record in reverse
// topological order. A recorded computation belongs to one thread.
namespace tfgnn::ad {

namespace detail {
struct Node;
}

class Tensor {
 public:
  Tensor() = default;

  // Leaf that never receives a gradient.
  static Tensor constant(Matrix values);
  // Leaf whose gradient accumulates across backward calls until zero_grad().
  static Tensor parameter(Matrix values);

  bool defined() const noexcept { return static_cast<bool>(node_); }
  std::size_t rows() const;
  std::size_t cols() const;

  const Matrix& value() const;
  // Writable access for optimisers. Only leaves may be modified.
  Matrix& mutable_value();

  bool requires_grad() const;
  bool is_leaf() const;
  // Same shape as value(); throws InputError if the tensor has no gradient.
  const Matrix& grad() const;
  Matrix& grad();
  void zero_grad();

  // Name of the operation that produced this tensor ("leaf" for leaves).
  const char* op_name() const;

  const detail::Node* node() const noexcept { return node_.get(); }

 private:
  explicit Tensor(std::shared_ptr<detail::Node> node) : node_(std::move(node)) {}
  std::shared_ptr<detail::Node> node_;

  friend Tensor make_result(const char* op, Matrix value, std::vector<Tensor> inputs,
                            std::function<void(detail::Node&)> backward);
  friend std::vector<const detail::Node*> computation_record(const Tensor& root);
  friend void backward(const Tensor& loss);
};

// Disables recording on this thread for the guard's lifetime; results are
// then constants. Used for evaluation passes.
class NoGradGuard {
 public:
  NoGradGuard();
  ~NoGradGuard();
  NoGradGuard(const NoGradGuard&) = delete;
  NoGradGuard& operator=(const NoGradGuard&) = delete;

 private:
  bool previous_;
};

bool grad_enabled();

Tensor matmul(const Tensor& a, const Tensor& b);
// x * weight^T, weight stored as (out_features x in_features).
Tensor linear(const Tensor& x, const Tensor& weight);
Tensor add(const Tensor& a, const Tensor& b);
Tensor relu(const Tensor& a);
Tensor concat_cols(const Tensor& a, const Tensor& b);
// Columns [from, to).
Tensor slice_cols(const Tensor& a, std::size_t from, std::size_t to);
// 1x1 sum of all entries.
Tensor sum(const Tensor& a);
// Row v is the mean of h's rows over the neighbours of v (zero if isolated).
Tensor mean_neighbor_aggregate(const Graph& g, const Tensor& h);
// Symmetric-normalised propagation with self-loops.
Tensor gcn_propagate(const Graph& g, const Tensor& h);
// Row v comes from `when_member` if v is in mask, else from `otherwise`.
Tensor select_rows(const NodeMask& mask, const Tensor& when_member, const Tensor& otherwise);
// Rows at the given indices, in order.
Tensor gather_rows(const Tensor& a, std::span<const NodeId> rows);
// Mean over rows of -log softmax(logits)[target]. Targets must be one-hot
// rows of the same shape as logits; returns a 1x1 tensor.
Tensor softmax_cross_entropy(const Tensor& logits, const Matrix& targets);

// Row-wise softmax, max-subtracted. Plain function; not recorded.
Matrix softmax_rows(const Matrix& logits);

// Operations reachable from root, inputs before consumers.
std::vector<const detail::Node*> computation_record(const Tensor& root);

// Fills the grad of every requires_grad tensor that `loss` depends on.
// Intermediate gradients are reset on each call; leaf gradients accumulate.
// Throws InputError when loss is not 1x1.
void backward(const Tensor& loss);

}  // namespace tfgnn::ad
