#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "tfgnn/autodiff.hpp"
#include "tfgnn/dataset.hpp"
#include "tfgnn/graph.hpp"
#include "tfgnn/label_prop.hpp"
#include "tfgnn/matrix.hpp"
#include "tfgnn/node_mask.hpp"
#include "tfgnn/rng.hpp"

namespace tfgnn::testing {

Matrix random_matrix(std::size_t rows, std::size_t cols, Rng& rng, double lo = -1.0,
                     double hi = 1.0);

// Uniform classes in [0, num_classes).
std::vector<int> random_labels(std::size_t n, std::size_t num_classes, Rng& rng);

// Each node joins with probability p; at least one node is always chosen.
NodeMask random_mask(std::size_t n, double p, Rng& rng);

// Small dataset on an ER graph with a random split (train, then val, rest test).
Dataset random_dataset(std::size_t n, double p, std::size_t num_classes, std::size_t feature_dim,
                       std::uint64_t seed);

// Limit of label propagation by a direct dense solve: labelled rows are
// one-hot, unlabelled rows reachable from a labelled node satisfy
// (I - P_uu) X_u = P_ul Y_l. Unreachable rows are zero.
Matrix dense_lp_solve(const LabelPropProblem& problem);

struct GradCheck {
  double max_rel_error = 0.0;
  std::size_t checked = 0;
  std::string worst;  // which parameter entry produced max_rel_error
};

// Central differences of loss_fn with respect to every entry of every
// parameter, compared with backward(). The error of an entry is
// |a - n| / max(|a|, |n|, scale_floor): relative for gradients above the
// floor, absolute (scaled by 1 / scale_floor) below it.
GradCheck check_gradients(const std::function<ad::Tensor()>& loss_fn,
                          std::vector<ad::Tensor> params, double step = 1e-4,
                          double scale_floor = 1e-4);

struct GradCase {
  std::string name;
  std::function<ad::Tensor()> loss;
  std::vector<ad::Tensor> params;
};

// One case per autodiff op on random shapes up to 5x5 drawn from `seed`.
// Inputs to relu are kept at least 0.1 away from zero.
std::vector<GradCase> op_gradient_cases(std::uint64_t seed);

// Cross-entropy through a jittered TFGNN (5 nodes) and a GCN (6 nodes).
std::vector<GradCase> model_gradient_cases(std::uint64_t seed);

// Generic scalar from a matrix-valued tensor: sum_ij u_i out_ij v_j with
// fixed random u, v.
ad::Tensor scalarize(const ad::Tensor& out, std::uint64_t seed);

// A fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag);
  ~TempDir();
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

struct ProcessResult {
  int exit_code = -1;
  std::string out;
};

// Runs a shell command, capturing stdout. stderr is discarded.
ProcessResult run_command(const std::string& command);

std::string read_file(const std::filesystem::path& path);

}  // namespace tfgnn::testing
