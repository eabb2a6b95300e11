#pragma once

#include <string>

#include "tfgnn/error.hpp"
#include "tfgnn/graph.hpp"
#include "tfgnn/matrix.hpp"

namespace tfgnn::kernels::detail {

inline void require(bool ok, const char* kernel, const char* what) {
  if (!ok) throw InputError(std::string(kernel) + ": " + what);
}

inline void check_gemm_nn(const Matrix& a, const Matrix& b, const Matrix& c) {
  require(a.cols() == b.rows() && c.rows() == a.rows() && c.cols() == b.cols(), "gemm_nn",
          "shape mismatch");
}

inline void check_gemm_tn(const Matrix& a, const Matrix& b, const Matrix& c) {
  require(a.rows() == b.rows() && c.rows() == a.cols() && c.cols() == b.cols(), "gemm_tn",
          "shape mismatch");
}

inline void check_graph_op(const Graph& g, const Matrix& in, const Matrix& out, const char* name) {
  require(in.rows() == g.num_nodes(), name, "row count does not match node count");
  require(out.same_shape(in), name, "output shape mismatch");
}

}  // namespace tfgnn::kernels::detail
