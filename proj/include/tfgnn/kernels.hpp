#pragma once

#include "tfgnn/graph.hpp"
#include "tfgnn/matrix.hpp"

// Dense and graph kernels used by the autodiff core.
//
// Every kernel exists twice: `serial` is the plain reference kept for tests
// and benchmarks, `omp` is the OpenMP version the library runs. The OpenMP
// kernels partition work by output row and keep the serial summation order
// inside a row, so their results do not depend on the thread count.
//
// All kernels throw InputError on shape mismatch.
namespace tfgnn::kernels {

namespace serial {

// c += a * b
void gemm_nn(const Matrix& a, const Matrix& b, Matrix& c);
// c += a^T * b
void gemm_tn(const Matrix& a, const Matrix& b, Matrix& c);
// out = M h, with M the row-normalised adjacency; rows of isolated nodes are 0.
void mean_aggregate(const Graph& g, const Matrix& h, Matrix& out);
// out += M^T grad
void mean_aggregate_transpose(const Graph& g, const Matrix& grad, Matrix& out);
// out = D^-1/2 (A + I) D^-1/2 h, D the degree matrix of A + I.
void gcn_propagate(const Graph& g, const Matrix& h, Matrix& out);

}  // namespace serial

namespace omp {

void gemm_nn(const Matrix& a, const Matrix& b, Matrix& c);
void gemm_tn(const Matrix& a, const Matrix& b, Matrix& c);
void mean_aggregate(const Graph& g, const Matrix& h, Matrix& out);
void mean_aggregate_transpose(const Graph& g, const Matrix& grad, Matrix& out);
void gcn_propagate(const Graph& g, const Matrix& h, Matrix& out);

}  // namespace omp

using omp::gcn_propagate;
using omp::gemm_nn;
using omp::gemm_tn;
using omp::mean_aggregate;
using omp::mean_aggregate_transpose;

}  // namespace tfgnn::kernels
