#include <algorithm>
#include <cmath>
#include <cstddef>

#include "kernel_checks.hpp"
#include "tfgnn/kernels.hpp"

namespace tfgnn::kernels::omp {

namespace {

// Rows below this go single-threaded; the fork costs more than the work.
constexpr std::ptrdiff_t kParallelRows = 64;

}  // namespace

void gemm_nn(const Matrix& a, const Matrix& b, Matrix& c) {
  detail::check_gemm_nn(a, b, c);
  const auto rows = static_cast<std::ptrdiff_t>(a.rows());
  const std::size_t inner = a.cols();
  const std::size_t cols = b.cols();
  // Zero entries of `a` are skipped: LaF inputs and bag-of-words features
  // are mostly zeros. Skipped terms are exact zeros, so sums are unchanged.
#pragma omp parallel for schedule(static) if (rows >= kParallelRows)
  for (std::ptrdiff_t i = 0; i < rows; ++i) {
    double* out = c.data() + static_cast<std::size_t>(i) * cols;
    const double* a_row = a.data() + static_cast<std::size_t>(i) * inner;
    for (std::size_t k = 0; k < inner; ++k) {
      const double a_ik = a_row[k];
      if (a_ik == 0.0) continue;
      const double* b_row = b.data() + k * cols;
#pragma omp simd
      for (std::size_t j = 0; j < cols; ++j) out[j] += a_ik * b_row[j];
    }
  }
}

void gemm_tn(const Matrix& a, const Matrix& b, Matrix& c) {
  detail::check_gemm_tn(a, b, c);
  const std::size_t n = a.rows();
  const std::size_t inner = a.cols();
  const std::size_t cols = b.cols();
  // Threads own disjoint blocks of output rows (columns of `a`) and walk
  // all of `a` in order, so each output entry sums i ascending.
  constexpr std::size_t kBlock = 32;
  const auto blocks = static_cast<std::ptrdiff_t>((inner + kBlock - 1) / kBlock);
#pragma omp parallel for schedule(static) if (n * inner >= 4096)
  for (std::ptrdiff_t blk = 0; blk < blocks; ++blk) {
    const std::size_t k_begin = static_cast<std::size_t>(blk) * kBlock;
    const std::size_t k_end = std::min(inner, k_begin + kBlock);
    for (std::size_t i = 0; i < n; ++i) {
      const double* a_row = a.data() + i * inner;
      const double* b_row = b.data() + i * cols;
      for (std::size_t k = k_begin; k < k_end; ++k) {
        const double a_ik = a_row[k];
        if (a_ik == 0.0) continue;
        double* out = c.data() + k * cols;
#pragma omp simd
        for (std::size_t j = 0; j < cols; ++j) out[j] += a_ik * b_row[j];
      }
    }
  }
}

void mean_aggregate(const Graph& g, const Matrix& h, Matrix& out) {
  detail::check_graph_op(g, h, out, "mean_aggregate");
  const auto n = static_cast<std::ptrdiff_t>(g.num_nodes());
  const std::size_t width = h.cols();
#pragma omp parallel for schedule(dynamic, 64) if (n >= kParallelRows)
  for (std::ptrdiff_t vi = 0; vi < n; ++vi) {
    const auto v = static_cast<NodeId>(vi);
    auto dst = out.row(v);
    std::fill(dst.begin(), dst.end(), 0.0);
    const auto nbrs = g.neighbors(v);
    if (nbrs.empty()) continue;
    for (NodeId u : nbrs) {
      const double* src = h.data() + static_cast<std::size_t>(u) * width;
      for (std::size_t c = 0; c < width; ++c) dst[c] += src[c];
    }
    const double deg = static_cast<double>(nbrs.size());
    for (double& x : dst) x /= deg;
  }
}

void mean_aggregate_transpose(const Graph& g, const Matrix& grad, Matrix& out) {
  detail::check_graph_op(g, grad, out, "mean_aggregate_transpose");
  const auto n = static_cast<std::ptrdiff_t>(g.num_nodes());
  const std::size_t width = grad.cols();
  // Gather form: row u pulls grad[v] / deg(v) from each neighbour v.
#pragma omp parallel for schedule(dynamic, 64) if (n >= kParallelRows)
  for (std::ptrdiff_t ui = 0; ui < n; ++ui) {
    const auto u = static_cast<NodeId>(ui);
    auto dst = out.row(u);
    for (NodeId v : g.neighbors(u)) {
      const double inv = 1.0 / static_cast<double>(g.degree(v));
      const double* src = grad.data() + static_cast<std::size_t>(v) * width;
      for (std::size_t c = 0; c < width; ++c) dst[c] += src[c] * inv;
    }
  }
}

void gcn_propagate(const Graph& g, const Matrix& h, Matrix& out) {
  detail::check_graph_op(g, h, out, "gcn_propagate");
  const auto n = static_cast<std::ptrdiff_t>(g.num_nodes());
  const std::size_t width = h.cols();
#pragma omp parallel for schedule(dynamic, 64) if (n >= kParallelRows)
  for (std::ptrdiff_t vi = 0; vi < n; ++vi) {
    const auto v = static_cast<NodeId>(vi);
    const double dv = static_cast<double>(g.degree(v) + 1);
    auto dst = out.row(v);
    const auto self = h.row(v);
    for (std::size_t c = 0; c < width; ++c) dst[c] = self[c] / dv;
    for (NodeId u : g.neighbors(v)) {
      const double w = 1.0 / std::sqrt(dv * static_cast<double>(g.degree(u) + 1));
      const double* src = h.data() + static_cast<std::size_t>(u) * width;
      for (std::size_t c = 0; c < width; ++c) dst[c] += w * src[c];
    }
  }
}

}  // namespace tfgnn::kernels::omp
