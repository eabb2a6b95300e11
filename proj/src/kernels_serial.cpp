#include <cmath>

#include "kernel_checks.hpp"
#include "tfgnn/kernels.hpp"

namespace tfgnn::kernels::serial {

void gemm_nn(const Matrix& a, const Matrix& b, Matrix& c) {
  detail::check_gemm_nn(a, b, c);
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t j = 0; j < b.cols(); ++j) {
      double acc = 0.0;
      for (std::size_t k = 0; k < a.cols(); ++k) acc += a(i, k) * b(k, j);
      c(i, j) += acc;
    }
  }
}

void gemm_tn(const Matrix& a, const Matrix& b, Matrix& c) {
  detail::check_gemm_tn(a, b, c);
  for (std::size_t k = 0; k < a.cols(); ++k) {
    for (std::size_t j = 0; j < b.cols(); ++j) {
      double acc = 0.0;
      for (std::size_t i = 0; i < a.rows(); ++i) acc += a(i, k) * b(i, j);
      c(k, j) += acc;
    }
  }
}

void mean_aggregate(const Graph& g, const Matrix& h, Matrix& out) {
  detail::check_graph_op(g, h, out, "mean_aggregate");
  out.fill(0.0);
  for (NodeId v = 0; v < g.num_nodes(); ++v) {
    const auto nbrs = g.neighbors(v);
    if (nbrs.empty()) continue;
    auto dst = out.row(v);
    for (NodeId u : nbrs) {
      const auto src = h.row(u);
      for (std::size_t c = 0; c < dst.size(); ++c) dst[c] += src[c];
    }
    const double deg = static_cast<double>(nbrs.size());
    for (double& x : dst) x /= deg;
  }
}

void mean_aggregate_transpose(const Graph& g, const Matrix& grad, Matrix& out) {
  detail::check_graph_op(g, grad, out, "mean_aggregate_transpose");
  // Scatter form: each row v pushes grad[v] / deg(v) to its neighbours.
  for (NodeId v = 0; v < g.num_nodes(); ++v) {
    const auto nbrs = g.neighbors(v);
    if (nbrs.empty()) continue;
    const double inv = 1.0 / static_cast<double>(nbrs.size());
    const auto src = grad.row(v);
    for (NodeId u : nbrs) {
      auto dst = out.row(u);
      for (std::size_t c = 0; c < dst.size(); ++c) dst[c] += src[c] * inv;
    }
  }
}

void gcn_propagate(const Graph& g, const Matrix& h, Matrix& out) {
  detail::check_graph_op(g, h, out, "gcn_propagate");
  out.fill(0.0);
  for (NodeId v = 0; v < g.num_nodes(); ++v) {
    const double dv = static_cast<double>(g.degree(v) + 1);
    auto dst = out.row(v);
    const auto self = h.row(v);
    for (std::size_t c = 0; c < dst.size(); ++c) dst[c] += self[c] / dv;
    for (NodeId u : g.neighbors(v)) {
      const double w = 1.0 / std::sqrt(dv * static_cast<double>(g.degree(u) + 1));
      const auto src = h.row(u);
      for (std::size_t c = 0; c < dst.size(); ++c) dst[c] += w * src[c];
    }
  }
}

}  // namespace tfgnn::kernels::serial
