#include "tfgnn/autodiff.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <unordered_set>

#include "tfgnn/error.hpp"
#include "tfgnn/kernels.hpp"

namespace tfgnn::ad {

namespace detail {

struct Node {
  const char* op = "leaf";
  Matrix value;
  Matrix grad;
  bool requires_grad = false;
  std::vector<std::shared_ptr<Node>> inputs;
  std::function<void(Node&)> backward;
};

}  // namespace detail

using detail::Node;

namespace {

thread_local bool t_grad_enabled = true;

void require(bool ok, const std::string& what) {
  if (!ok) throw InputError(what);
}

void require_defined(const Tensor& t, const char* op) {
  require(t.defined(), std::string(op) + ": undefined tensor");
}

// Gradient buffer of an input, or nullptr if it does not take one.
Matrix* grad_of(const std::shared_ptr<Node>& node) {
  return node->requires_grad ? &node->grad : nullptr;
}

}  // namespace

Tensor make_result(const char* op, Matrix value, std::vector<Tensor> inputs,
                   std::function<void(Node&)> backward) {
  auto node = std::make_shared<Node>();
  node->op = op;
  node->value = std::move(value);
  if (t_grad_enabled) {
    node->requires_grad = std::any_of(inputs.begin(), inputs.end(),
                                      [](const Tensor& t) { return t.requires_grad(); });
  }
  if (node->requires_grad) {
    node->grad = Matrix(node->value.rows(), node->value.cols());
    node->inputs.reserve(inputs.size());
    for (auto& t : inputs) node->inputs.push_back(t.node_);
    node->backward = std::move(backward);
  }
  return Tensor(std::move(node));
}

Tensor Tensor::constant(Matrix values) {
  auto node = std::make_shared<Node>();
  node->value = std::move(values);
  return Tensor(std::move(node));
}

Tensor Tensor::parameter(Matrix values) {
  auto node = std::make_shared<Node>();
  node->value = std::move(values);
  node->requires_grad = true;
  node->grad = Matrix(node->value.rows(), node->value.cols());
  return Tensor(std::move(node));
}

std::size_t Tensor::rows() const { return value().rows(); }
std::size_t Tensor::cols() const { return value().cols(); }

const Matrix& Tensor::value() const {
  require(defined(), "value of undefined tensor");
  return node_->value;
}

Matrix& Tensor::mutable_value() {
  require(is_leaf(), "only leaf tensors may be modified in place");
  return node_->value;
}

bool Tensor::requires_grad() const { return node_ && node_->requires_grad; }
bool Tensor::is_leaf() const { return node_ && !node_->backward; }

const Matrix& Tensor::grad() const {
  require(requires_grad(), "tensor has no gradient");
  return node_->grad;
}

Matrix& Tensor::grad() {
  require(requires_grad(), "tensor has no gradient");
  return node_->grad;
}

void Tensor::zero_grad() {
  if (requires_grad()) node_->grad.fill(0.0);
}

const char* Tensor::op_name() const { return node_ ? node_->op : "undefined"; }

NoGradGuard::NoGradGuard() : previous_(t_grad_enabled) { t_grad_enabled = false; }
NoGradGuard::~NoGradGuard() { t_grad_enabled = previous_; }

bool grad_enabled() { return t_grad_enabled; }

Tensor matmul(const Tensor& a, const Tensor& b) {
  require_defined(a, "matmul");
  require_defined(b, "matmul");
  require(a.cols() == b.rows(), "matmul: inner dimensions differ (" +
                                    std::to_string(a.cols()) + " vs " + std::to_string(b.rows()) +
                                    ")");
  Matrix out(a.rows(), b.cols());
  kernels::gemm_nn(a.value(), b.value(), out);
  return make_result("matmul", std::move(out), {a, b}, [](Node& self) {
    const auto& a_node = self.inputs[0];
    const auto& b_node = self.inputs[1];
    if (Matrix* ga = grad_of(a_node)) {
      // dA = dC * B^T
      kernels::gemm_nn(self.grad, b_node->value.transposed(), *ga);
    }
    if (Matrix* gb = grad_of(b_node)) {
      // dB = A^T * dC
      kernels::gemm_tn(a_node->value, self.grad, *gb);
    }
  });
}

Tensor linear(const Tensor& x, const Tensor& weight) {
  require_defined(x, "linear");
  require_defined(weight, "linear");
  require(x.cols() == weight.cols(), "linear: input width " + std::to_string(x.cols()) +
                                         " does not match weight columns " +
                                         std::to_string(weight.cols()));
  Matrix out(x.rows(), weight.rows());
  kernels::gemm_nn(x.value(), weight.value().transposed(), out);
  return make_result("linear", std::move(out), {x, weight}, [](Node& self) {
    const auto& x_node = self.inputs[0];
    const auto& w_node = self.inputs[1];
    if (Matrix* gx = grad_of(x_node)) {
      // dX = dY * W
      kernels::gemm_nn(self.grad, w_node->value, *gx);
    }
    if (Matrix* gw = grad_of(w_node)) {
      // dW^T = X^T * dY; X is the sparse side, so it goes on the left.
      Matrix gw_t(w_node->value.cols(), w_node->value.rows());
      kernels::gemm_tn(x_node->value, self.grad, gw_t);
      gw->add_scaled(gw_t.transposed());
    }
  });
}

Tensor add(const Tensor& a, const Tensor& b) {
  require_defined(a, "add");
  require_defined(b, "add");
  require(a.value().same_shape(b.value()), "add: shape mismatch");
  Matrix out = a.value();
  out.add_scaled(b.value());
  return make_result("add", std::move(out), {a, b}, [](Node& self) {
    for (const auto& in : self.inputs) {
      if (Matrix* g = grad_of(in)) g->add_scaled(self.grad);
    }
  });
}

Tensor relu(const Tensor& a) {
  require_defined(a, "relu");
  Matrix out = a.value();
  for (double& x : out.values()) x = x > 0.0 ? x : 0.0;
  return make_result("relu", std::move(out), {a}, [](Node& self) {
    const auto& in = self.inputs[0];
    Matrix* g = grad_of(in);
    if (!g) return;
    // Subgradient 0 at 0.
    for (std::size_t i = 0; i < self.grad.size(); ++i) {
      if (in->value.data()[i] > 0.0) g->data()[i] += self.grad.data()[i];
    }
  });
}

Tensor concat_cols(const Tensor& a, const Tensor& b) {
  require_defined(a, "concat_cols");
  require_defined(b, "concat_cols");
  require(a.rows() == b.rows(), "concat_cols: row counts differ");
  const std::size_t ca = a.cols();
  const std::size_t cb = b.cols();
  Matrix out(a.rows(), ca + cb);
  for (std::size_t r = 0; r < out.rows(); ++r) {
    std::copy_n(a.value().row(r).begin(), ca, out.row(r).begin());
    std::copy_n(b.value().row(r).begin(), cb, out.row(r).begin() + static_cast<std::ptrdiff_t>(ca));
  }
  return make_result("concat_cols", std::move(out), {a, b}, [ca, cb](Node& self) {
    Matrix* ga = grad_of(self.inputs[0]);
    Matrix* gb = grad_of(self.inputs[1]);
    for (std::size_t r = 0; r < self.grad.rows(); ++r) {
      const auto g = self.grad.row(r);
      if (ga) {
        for (std::size_t c = 0; c < ca; ++c) (*ga)(r, c) += g[c];
      }
      if (gb) {
        for (std::size_t c = 0; c < cb; ++c) (*gb)(r, c) += g[ca + c];
      }
    }
  });
}

Tensor slice_cols(const Tensor& a, std::size_t from, std::size_t to) {
  require_defined(a, "slice_cols");
  require(from <= to && to <= a.cols(), "slice_cols: range [" + std::to_string(from) + ", " +
                                            std::to_string(to) + ") outside " +
                                            std::to_string(a.cols()) + " columns");
  Matrix out(a.rows(), to - from);
  for (std::size_t r = 0; r < out.rows(); ++r) {
    const auto src = a.value().row(r);
    std::copy(src.begin() + static_cast<std::ptrdiff_t>(from),
              src.begin() + static_cast<std::ptrdiff_t>(to), out.row(r).begin());
  }
  return make_result("slice_cols", std::move(out), {a}, [from](Node& self) {
    Matrix* g = grad_of(self.inputs[0]);
    if (!g) return;
    for (std::size_t r = 0; r < self.grad.rows(); ++r) {
      for (std::size_t c = 0; c < self.grad.cols(); ++c) (*g)(r, from + c) += self.grad(r, c);
    }
  });
}

Tensor sum(const Tensor& a) {
  require_defined(a, "sum");
  double total = 0.0;
  for (double x : a.value().values()) total += x;
  Matrix out(1, 1, total);
  return make_result("sum", std::move(out), {a}, [](Node& self) {
    Matrix* g = grad_of(self.inputs[0]);
    if (!g) return;
    const double up = self.grad(0, 0);
    for (double& x : g->values()) x += up;
  });
}

Tensor mean_neighbor_aggregate(const Graph& g, const Tensor& h) {
  require_defined(h, "mean_neighbor_aggregate");
  require(h.rows() == g.num_nodes(), "mean_neighbor_aggregate: " + std::to_string(h.rows()) +
                                         " rows for a graph with " +
                                         std::to_string(g.num_nodes()) + " nodes");
  Matrix out(h.rows(), h.cols());
  kernels::mean_aggregate(g, h.value(), out);
  return make_result("mean_neighbor_aggregate", std::move(out), {h}, [g](Node& self) {
    if (Matrix* gh = grad_of(self.inputs[0])) kernels::mean_aggregate_transpose(g, self.grad, *gh);
  });
}

Tensor gcn_propagate(const Graph& g, const Tensor& h) {
  require_defined(h, "gcn_propagate");
  require(h.rows() == g.num_nodes(), "gcn_propagate: " + std::to_string(h.rows()) +
                                         " rows for a graph with " +
                                         std::to_string(g.num_nodes()) + " nodes");
  Matrix out(h.rows(), h.cols());
  kernels::gcn_propagate(g, h.value(), out);
  return make_result("gcn_propagate", std::move(out), {h}, [g](Node& self) {
    Matrix* gh = grad_of(self.inputs[0]);
    if (!gh) return;
    // The normalised operator is symmetric, so it is its own transpose.
    Matrix back(self.grad.rows(), self.grad.cols());
    kernels::gcn_propagate(g, self.grad, back);
    gh->add_scaled(back);
  });
}

Tensor select_rows(const NodeMask& mask, const Tensor& when_member, const Tensor& otherwise) {
  require_defined(when_member, "select_rows");
  require_defined(otherwise, "select_rows");
  require(when_member.value().same_shape(otherwise.value()), "select_rows: shape mismatch");
  require(mask.size() == when_member.rows(), "select_rows: mask size does not match rows");
  Matrix out(when_member.rows(), when_member.cols());
  for (std::size_t r = 0; r < out.rows(); ++r) {
    const auto src = mask.contains(static_cast<NodeId>(r)) ? when_member.value().row(r)
                                                           : otherwise.value().row(r);
    std::copy(src.begin(), src.end(), out.row(r).begin());
  }
  return make_result("select_rows", std::move(out), {when_member, otherwise},
                     [mask](Node& self) {
                       Matrix* g_member = grad_of(self.inputs[0]);
                       Matrix* g_other = grad_of(self.inputs[1]);
                       for (std::size_t r = 0; r < self.grad.rows(); ++r) {
                         Matrix* target =
                             mask.contains(static_cast<NodeId>(r)) ? g_member : g_other;
                         if (!target) continue;
                         const auto src = self.grad.row(r);
                         auto dst = target->row(r);
                         for (std::size_t c = 0; c < src.size(); ++c) dst[c] += src[c];
                       }
                     });
}

Tensor gather_rows(const Tensor& a, std::span<const NodeId> rows) {
  require_defined(a, "gather_rows");
  std::vector<NodeId> picked(rows.begin(), rows.end());
  Matrix out(picked.size(), a.cols());
  for (std::size_t i = 0; i < picked.size(); ++i) {
    require(picked[i] < a.rows(), "gather_rows: row " + std::to_string(picked[i]) +
                                      " out of range");
    const auto src = a.value().row(picked[i]);
    std::copy(src.begin(), src.end(), out.row(i).begin());
  }
  return make_result("gather_rows", std::move(out), {a}, [picked](Node& self) {
    Matrix* g = grad_of(self.inputs[0]);
    if (!g) return;
    for (std::size_t i = 0; i < picked.size(); ++i) {
      const auto src = self.grad.row(i);
      auto dst = g->row(picked[i]);
      for (std::size_t c = 0; c < src.size(); ++c) dst[c] += src[c];
    }
  });
}

Matrix softmax_rows(const Matrix& logits) {
  Matrix out(logits.rows(), logits.cols());
  for (std::size_t r = 0; r < logits.rows(); ++r) {
    const auto in = logits.row(r);
    auto dst = out.row(r);
    if (in.empty()) continue;
    const double peak = *std::max_element(in.begin(), in.end());
    double total = 0.0;
    for (std::size_t c = 0; c < in.size(); ++c) {
      dst[c] = std::exp(in[c] - peak);
      total += dst[c];
    }
    for (double& x : dst) x /= total;
  }
  return out;
}

Tensor softmax_cross_entropy(const Tensor& logits, const Matrix& targets) {
  require_defined(logits, "softmax_cross_entropy");
  require(logits.value().same_shape(targets), "softmax_cross_entropy: targets shape mismatch");
  require(logits.rows() > 0, "softmax_cross_entropy: empty batch");
  std::vector<std::size_t> target_class(targets.rows());
  for (std::size_t r = 0; r < targets.rows(); ++r) {
    std::size_t ones = 0;
    for (std::size_t c = 0; c < targets.cols(); ++c) {
      const double t = targets(r, c);
      if (t == 1.0) {
        ++ones;
        target_class[r] = c;
      } else if (t != 0.0) {
        ones = 2;
        break;
      }
    }
    require(ones == 1, "softmax_cross_entropy: target row " + std::to_string(r) +
                           " is not one-hot");
  }

  const Matrix& z = logits.value();
  Matrix probs = softmax_rows(z);
  double total = 0.0;
  for (std::size_t r = 0; r < z.rows(); ++r) {
    const auto row = z.row(r);
    const double peak = *std::max_element(row.begin(), row.end());
    double denom = 0.0;
    for (double x : row) denom += std::exp(x - peak);
    total += std::log(denom) - (row[target_class[r]] - peak);
  }
  const double batch = static_cast<double>(z.rows());
  Matrix out(1, 1, total / batch);
  return make_result("softmax_cross_entropy", std::move(out), {logits},
                     [probs = std::move(probs), target_class, batch](Node& self) {
                       Matrix* g = grad_of(self.inputs[0]);
                       if (!g) return;
                       const double up = self.grad(0, 0) / batch;
                       for (std::size_t r = 0; r < probs.rows(); ++r) {
                         for (std::size_t c = 0; c < probs.cols(); ++c) {
                           const double indicator = c == target_class[r] ? 1.0 : 0.0;
                           (*g)(r, c) += up * (probs(r, c) - indicator);
                         }
                       }
                     });
}

namespace {

// Iterative post-order DFS from root: inputs come before their consumers.
std::vector<Node*> topological_order(Node* root) {
  std::vector<Node*> order;
  std::unordered_set<const Node*> visited{root};
  std::vector<std::pair<Node*, std::size_t>> stack{{root, 0}};
  while (!stack.empty()) {
    auto& [node, next] = stack.back();
    if (next < node->inputs.size()) {
      Node* child = node->inputs[next++].get();
      if (visited.insert(child).second) stack.emplace_back(child, 0);
      continue;
    }
    order.push_back(node);
    stack.pop_back();
  }
  return order;
}

}  // namespace

std::vector<const Node*> computation_record(const Tensor& root) {
  if (!root.defined()) return {};
  const auto order = topological_order(root.node_.get());
  return {order.begin(), order.end()};
}

void backward(const Tensor& loss) {
  require(loss.defined(), "backward: undefined loss");
  require(loss.rows() == 1 && loss.cols() == 1,
          "backward: loss must be 1x1, got " + std::to_string(loss.rows()) + "x" +
              std::to_string(loss.cols()));
  if (!loss.requires_grad()) return;

  const auto order = topological_order(loss.node_.get());
  for (Node* node : order) {
    if (node->backward) node->grad.fill(0.0);
  }
  loss.node_->grad(0, 0) += 1.0;
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    if ((*it)->backward) (*it)->backward(**it);
  }
}

}  // namespace tfgnn::ad
