#include "support.hpp"

#include "tfgnn/model.hpp"

#include <sys/wait.h>
#include <unistd.h>

#include <Eigen/Dense>
#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <queue>
#include <sstream>

namespace tfgnn::testing {

Matrix random_matrix(std::size_t rows, std::size_t cols, Rng& rng, double lo, double hi) {
  Matrix m(rows, cols);
  for (double& x : m.values()) x = rng.uniform(lo, hi);
  return m;
}

std::vector<int> random_labels(std::size_t n, std::size_t num_classes, Rng& rng) {
  std::vector<int> y(n);
  for (int& c : y) c = static_cast<int>(rng.below(num_classes));
  return y;
}

NodeMask random_mask(std::size_t n, double p, Rng& rng) {
  NodeMask mask(n);
  for (NodeId v = 0; v < n; ++v) {
    if (rng.uniform() < p) mask.insert(v);
  }
  if (mask.empty()) mask.insert(static_cast<NodeId>(rng.below(n)));
  return mask;
}

Dataset random_dataset(std::size_t n, double p, std::size_t num_classes, std::size_t feature_dim,
                       std::uint64_t seed) {
  Rng rng(seed);
  Dataset ds;
  ds.name = "random";
  ds.graph = make_er(n, p, derive_seed(seed, 1));
  ds.features = random_matrix(n, feature_dim, rng);
  ds.labels = random_labels(n, num_classes, rng);
  ds.num_classes = num_classes;
  ds.split = {NodeMask(n), NodeMask(n), NodeMask(n)};
  const std::size_t train = std::max<std::size_t>(1, n / 4);
  const std::size_t val = n / 4;
  for (NodeId v = 0; v < n; ++v) {
    if (v < train) {
      ds.split.train.insert(v);
    } else if (v < train + val) {
      ds.split.val.insert(v);
    } else {
      ds.split.test.insert(v);
    }
  }
  return ds;
}

Matrix dense_lp_solve(const LabelPropProblem& problem) {
  const Graph& g = problem.graph;
  const std::size_t n = g.num_nodes();
  const std::size_t c = problem.num_classes;

  std::vector<bool> reach(n, false);
  std::queue<NodeId> frontier;
  for (NodeId v = 0; v < n; ++v) {
    if (problem.train.contains(v)) {
      reach[v] = true;
      frontier.push(v);
    }
  }
  while (!frontier.empty()) {
    const NodeId v = frontier.front();
    frontier.pop();
    for (NodeId u : g.neighbors(v)) {
      if (!reach[u]) {
        reach[u] = true;
        frontier.push(u);
      }
    }
  }

  std::vector<NodeId> unknown;
  std::vector<std::ptrdiff_t> index(n, -1);
  for (NodeId v = 0; v < n; ++v) {
    if (!problem.train.contains(v) && reach[v]) {
      index[v] = static_cast<std::ptrdiff_t>(unknown.size());
      unknown.push_back(v);
    }
  }

  const auto m = static_cast<Eigen::Index>(unknown.size());
  Eigen::MatrixXd a = Eigen::MatrixXd::Identity(m, m);
  Eigen::MatrixXd b = Eigen::MatrixXd::Zero(m, static_cast<Eigen::Index>(c));
  for (Eigen::Index i = 0; i < m; ++i) {
    const NodeId v = unknown[static_cast<std::size_t>(i)];
    const double w = 1.0 / static_cast<double>(g.degree(v));
    for (NodeId u : g.neighbors(v)) {
      if (problem.train.contains(u)) {
        b(i, problem.labels[u]) += w;
      } else if (index[u] >= 0) {
        a(i, index[u]) -= w;
      }
    }
  }
  const Eigen::MatrixXd x = a.partialPivLu().solve(b);

  Matrix out(n, c);
  for (NodeId v = 0; v < n; ++v) {
    if (problem.train.contains(v)) {
      out(v, static_cast<std::size_t>(problem.labels[v])) = 1.0;
    } else if (index[v] >= 0) {
      for (std::size_t k = 0; k < c; ++k) {
        out(v, k) = x(index[v], static_cast<Eigen::Index>(k));
      }
    }
  }
  return out;
}

GradCheck check_gradients(const std::function<ad::Tensor()>& loss_fn,
                          std::vector<ad::Tensor> params, double step, double scale_floor) {
  for (auto& p : params) p.zero_grad();
  ad::backward(loss_fn());

  GradCheck result;
  for (std::size_t pi = 0; pi < params.size(); ++pi) {
    ad::Tensor& p = params[pi];
    const Matrix analytic = p.grad();
    for (std::size_t i = 0; i < p.value().size(); ++i) {
      double& x = p.mutable_value().data()[i];
      const double saved = x;
      x = saved + step;
      double up;
      double down;
      {
        ad::NoGradGuard guard;
        up = loss_fn().value()(0, 0);
        x = saved - step;
        down = loss_fn().value()(0, 0);
      }
      x = saved;
      const double numeric = (up - down) / (2.0 * step);
      const double a = analytic.data()[i];
      const double diff = std::abs(a - numeric);
      ++result.checked;
      const double rel = diff / std::max({std::abs(a), std::abs(numeric), scale_floor});
      if (rel > result.max_rel_error) {
        result.max_rel_error = rel;
        std::ostringstream where;
        where << "param " << pi << " entry " << i << ": analytic " << a << " numeric " << numeric;
        result.worst = where.str();
      }
    }
  }
  return result;
}

ad::Tensor scalarize(const ad::Tensor& out, std::uint64_t seed) {
  Rng rng(seed);
  const ad::Tensor u = ad::Tensor::constant(random_matrix(1, out.rows(), rng, 0.5, 1.5));
  const ad::Tensor v = ad::Tensor::constant(random_matrix(out.cols(), 1, rng, 0.5, 1.5));
  return ad::sum(ad::matmul(ad::matmul(u, out), v));
}

namespace {

Matrix off_zero(std::size_t r, std::size_t c, Rng& rng) {
  Matrix m = random_matrix(r, c, rng, 0.1, 1.0);
  for (double& x : m.values()) {
    if (rng.uniform() < 0.5) x = -x;
  }
  return m;
}

Matrix one_hot_targets(std::size_t rows, std::size_t classes, Rng& rng) {
  Matrix t(rows, classes);
  for (std::size_t r = 0; r < rows; ++r) t(r, rng.below(classes)) = 1.0;
  return t;
}

}  // namespace

std::vector<GradCase> op_gradient_cases(std::uint64_t seed) {
  using ad::Tensor;
  Rng rng(seed);
  auto dim = [&rng] { return 1 + rng.below(5); };
  const std::size_t n = 2 + rng.below(4);
  const std::size_t k = dim();
  const std::size_t m = dim();
  const Graph g = make_er(n, 0.5, seed);
  Tensor a = Tensor::parameter(off_zero(n, k, rng));
  Tensor b = Tensor::parameter(off_zero(k, m, rng));
  Tensor a2 = Tensor::parameter(off_zero(n, k, rng));
  Tensor w = Tensor::parameter(off_zero(m, k, rng));
  Tensor c = Tensor::parameter(off_zero(n, m, rng));
  const NodeMask mask = random_mask(n, 0.5, rng);
  std::vector<NodeId> rows;
  for (std::size_t i = 0; i < 4; ++i) rows.push_back(static_cast<NodeId>(rng.below(n)));
  const Matrix targets = one_hot_targets(n, k, rng);
  const std::size_t from = rng.below(k);
  const std::size_t to = from + 1 + rng.below(k - from);

  return {
      {"matmul", [=] { return scalarize(ad::matmul(a, b), seed); }, {a, b}},
      {"linear", [=] { return scalarize(ad::linear(a, w), seed); }, {a, w}},
      {"add", [=] { return scalarize(ad::add(a, a2), seed); }, {a, a2}},
      {"relu", [=] { return scalarize(ad::relu(a), seed); }, {a}},
      {"concat_cols", [=] { return scalarize(ad::concat_cols(a, c), seed); }, {a, c}},
      {"slice_cols", [=] { return scalarize(ad::slice_cols(a, from, to), seed); }, {a}},
      {"sum", [=] { return ad::sum(a); }, {a}},
      {"mean_neighbor_aggregate",
       [=] { return scalarize(ad::mean_neighbor_aggregate(g, a), seed); },
       {a}},
      {"gcn_propagate", [=] { return scalarize(ad::gcn_propagate(g, a), seed); }, {a}},
      {"select_rows", [=] { return scalarize(ad::select_rows(mask, a, a2), seed); }, {a, a2}},
      {"gather_rows", [=] { return scalarize(ad::gather_rows(a, rows), seed); }, {a}},
      {"softmax_cross_entropy", [=] { return ad::softmax_cross_entropy(a, targets); }, {a}},
  };
}

std::vector<GradCase> model_gradient_cases(std::uint64_t seed) {
  Rng rng(seed);
  // Jitter moves the structured zeros off the relu kink.
  auto jitter = [&rng](const std::vector<ad::Tensor>& params) {
    for (ad::Tensor p : params) {
      for (double& x : p.mutable_value().values()) x += rng.uniform(-0.3, 0.3);
    }
  };

  const Graph g5 = make_er(5, 0.5, seed);
  const std::vector<int> labels{0, 1, 1, -1, -1};
  const NodeMask train = NodeMask::from_indices(5, std::vector<NodeId>{0, 1, 2});
  const Matrix h0 = build_laf(random_matrix(5, 2, rng), labels, 2, train,
                              NodeMask::from_indices(5, std::vector<NodeId>{1}));
  const TfgnnParams tf = init_tfgnn({2, 6, 2, 2}, seed);
  jitter(tf.tensors());
  const Matrix t5 = one_hot_targets(5, 2, rng);

  const Graph g6 = make_er(6, 0.5, seed + 1);
  const Matrix x6 = random_matrix(6, 3, rng);
  const GcnParams gcn = init_gcn({3, 5, 2, 2}, seed);
  const Matrix t6 = one_hot_targets(6, 2, rng);

  return {
      {"tfgnn_forward",
       [=] { return ad::softmax_cross_entropy(tfgnn_forward(tf, g5, h0, train).logits, t5); },
       tf.tensors()},
      {"gcn_forward", [=] { return ad::softmax_cross_entropy(gcn_forward(gcn, g6, x6).logits, t6); },
       gcn.tensors()},
  };
}

TempDir::TempDir(const std::string& tag) {
  static int counter = 0;
  path_ = std::filesystem::temp_directory_path() /
          ("tfgnn-" + tag + "-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
  std::filesystem::remove_all(path_);
  std::filesystem::create_directories(path_);
}

TempDir::~TempDir() {
  std::error_code ec;
  std::filesystem::remove_all(path_, ec);
}

ProcessResult run_command(const std::string& command) {
  ProcessResult result;
  FILE* pipe = ::popen((command + " 2>/dev/null").c_str(), "r");
  if (!pipe) return result;
  std::array<char, 4096> buf{};
  std::size_t got;
  while ((got = std::fread(buf.data(), 1, buf.size(), pipe)) > 0) result.out.append(buf.data(), got);
  const int status = ::pclose(pipe);
  result.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return result;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace tfgnn::testing
