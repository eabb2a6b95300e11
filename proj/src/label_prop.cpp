#include "tfgnn/label_prop.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "tfgnn/error.hpp"
#include "tfgnn/rng.hpp"

namespace tfgnn {

namespace {

void validate(const LabelPropProblem& p) {
  const std::size_t n = p.graph.num_nodes();
  if (p.labels.size() != n) {
    throw InputError("label array has " + std::to_string(p.labels.size()) +
                     " entries for a graph with " + std::to_string(n) + " nodes");
  }
  if (p.train.size() != n) throw InputError("train mask size does not match node count");
  if (p.num_classes == 0) throw InputError("label propagation needs at least one class");
  for (NodeId v = 0; v < n; ++v) {
    if (!p.train.contains(v)) continue;
    const int y = p.labels[v];
    if (y < 0 || static_cast<std::size_t>(y) >= p.num_classes) {
      throw InputError("train node " + std::to_string(v) + " has invalid class " +
                       std::to_string(y));
    }
  }
}

void refresh_mass(HitProbTable& t) {
  t.hit_mass.assign(t.probs.rows(), 0.0);
  for (std::size_t v = 0; v < t.probs.rows(); ++v) {
    double m = 0.0;
    for (double x : t.probs.row(v)) m += x;
    t.hit_mass[v] = m;
  }
}

HitProbTable base_table(const LabelPropProblem& p) {
  HitProbTable t;
  t.depth = 0;
  t.probs = Matrix(p.graph.num_nodes(), p.num_classes);
  for (NodeId v = 0; v < p.graph.num_nodes(); ++v) {
    if (p.train.contains(v)) t.probs(v, static_cast<std::size_t>(p.labels[v])) = 1.0;
  }
  refresh_mass(t);
  return t;
}

// One application of the recursion; returns max row L1 change.
double step_into(const LabelPropProblem& p, const Matrix& prev, Matrix& next) {
  const auto n = static_cast<std::ptrdiff_t>(p.graph.num_nodes());
  const std::size_t classes = p.num_classes;
  double worst = 0.0;
#pragma omp parallel for schedule(dynamic, 64) reduction(max : worst) if (n >= 256)
  for (std::ptrdiff_t vi = 0; vi < n; ++vi) {
    const auto v = static_cast<NodeId>(vi);
    auto dst = next.row(v);
    const auto old = prev.row(v);
    if (p.train.contains(v)) {
      std::copy(old.begin(), old.end(), dst.begin());
      continue;
    }
    std::fill(dst.begin(), dst.end(), 0.0);
    const auto nbrs = p.graph.neighbors(v);
    if (!nbrs.empty()) {
      for (NodeId u : nbrs) {
        const auto src = prev.row(u);
        for (std::size_t i = 0; i < classes; ++i) dst[i] += src[i];
      }
      const double deg = static_cast<double>(nbrs.size());
      for (double& x : dst) x /= deg;
    }
    double change = 0.0;
    for (std::size_t i = 0; i < classes; ++i) change += std::abs(dst[i] - old[i]);
    worst = std::max(worst, change);
  }
  return worst;
}

// Unlabelled nodes in components without any labelled node.
std::vector<NodeId> find_unreachable(const LabelPropProblem& p) {
  const std::size_t n = p.graph.num_nodes();
  std::vector<char> reached(n, 0);
  std::vector<NodeId> frontier = p.train.indices();
  for (NodeId v : frontier) reached[v] = 1;
  while (!frontier.empty()) {
    const NodeId u = frontier.back();
    frontier.pop_back();
    for (NodeId v : p.graph.neighbors(u)) {
      if (!reached[v]) {
        reached[v] = 1;
        frontier.push_back(v);
      }
    }
  }
  std::vector<NodeId> out;
  for (NodeId v = 0; v < n; ++v) {
    if (!reached[v]) out.push_back(v);
  }
  return out;
}

}  // namespace

HitProbTable lp_advance(const LabelPropProblem& problem, const HitProbTable& previous) {
  validate(problem);
  if (previous.probs.rows() != problem.graph.num_nodes() ||
      previous.probs.cols() != problem.num_classes) {
    throw InputError("lp_advance: table shape does not match the problem");
  }
  HitProbTable next;
  next.depth = previous.depth + 1;
  next.probs = Matrix(previous.probs.rows(), previous.probs.cols());
  step_into(problem, previous.probs, next.probs);
  refresh_mass(next);
  return next;
}

HitProbTable lp_iterate(const LabelPropProblem& problem, std::size_t depth) {
  validate(problem);
  HitProbTable t = base_table(problem);
  Matrix scratch(t.probs.rows(), t.probs.cols());
  for (std::size_t l = 0; l < depth; ++l) {
    step_into(problem, t.probs, scratch);
    std::swap(t.probs, scratch);
  }
  t.depth = depth;
  refresh_mass(t);
  return t;
}

LabelPropSolution lp_solve(const LabelPropProblem& problem, double tol, std::size_t max_steps) {
  validate(problem);
  if (!(tol > 0.0)) throw InputError("lp_solve: tolerance must be positive");

  LabelPropSolution sol;
  sol.unreachable = find_unreachable(problem);
  std::vector<char> skip(problem.graph.num_nodes(), 0);
  for (NodeId v : sol.unreachable) skip[v] = 1;
  for (NodeId v : problem.train.indices()) skip[v] = 1;

  HitProbTable t = base_table(problem);
  Matrix scratch(t.probs.rows(), t.probs.cols());

  auto deficit_ok = [&](const Matrix& probs) {
    for (NodeId v = 0; v < probs.rows(); ++v) {
      if (skip[v]) continue;
      double mass = 0.0;
      for (double x : probs.row(v)) mass += x;
      if (1.0 - mass >= tol) return false;
    }
    return true;
  };

  std::size_t steps = 0;
  bool done = deficit_ok(t.probs);
  while (!done && steps < max_steps) {
    sol.last_step_change = step_into(problem, t.probs, scratch);
    std::swap(t.probs, scratch);
    ++steps;
    done = deficit_ok(t.probs);
  }
  t.depth = steps;
  refresh_mass(t);
  sol.table = std::move(t);
  sol.converged = done;

  if (!sol.unreachable.empty()) {
    sol.warning = std::to_string(sol.unreachable.size()) +
                  " unlabelled node(s) cannot reach any labelled node; their rows stay zero";
  }
  if (!done) {
    if (!sol.warning.empty()) sol.warning += "; ";
    sol.warning += "no convergence to tol " + std::to_string(tol) + " within " +
                   std::to_string(max_steps) + " steps";
  }
  return sol;
}

MonteCarloEstimate lp_montecarlo(const LabelPropProblem& problem, NodeId start,
                                 std::size_t walks, std::size_t max_steps, std::uint64_t seed) {
  validate(problem);
  if (walks == 0) throw InputError("lp_montecarlo: walks must be >= 1");
  if (start >= problem.graph.num_nodes()) throw InputError("lp_montecarlo: start out of range");

  const std::size_t classes = problem.num_classes;
  std::vector<std::size_t> hits(classes, 0);
  std::size_t misses = 0;

  const auto total = static_cast<std::ptrdiff_t>(walks);
#pragma omp parallel
  {
    std::vector<std::size_t> local_hits(classes, 0);
    std::size_t local_misses = 0;
#pragma omp for schedule(static)
    for (std::ptrdiff_t w = 0; w < total; ++w) {
      Rng rng(derive_seed(seed, static_cast<std::uint64_t>(w)));
      NodeId at = start;
      bool hit = problem.train.contains(at);
      for (std::size_t s = 0; !hit && s < max_steps; ++s) {
        const auto nbrs = problem.graph.neighbors(at);
        if (nbrs.empty()) break;
        at = nbrs[rng.below(nbrs.size())];
        hit = problem.train.contains(at);
      }
      if (hit) {
        ++local_hits[static_cast<std::size_t>(problem.labels[at])];
      } else {
        ++local_misses;
      }
    }
#pragma omp critical
    {
      for (std::size_t i = 0; i < classes; ++i) hits[i] += local_hits[i];
      misses += local_misses;
    }
  }

  MonteCarloEstimate est;
  est.walks = walks;
  est.class_frequency.resize(classes);
  const double denom = static_cast<double>(walks);
  for (std::size_t i = 0; i < classes; ++i) {
    est.class_frequency[i] = static_cast<double>(hits[i]) / denom;
  }
  est.no_hit = static_cast<double>(misses) / denom;
  return est;
}

std::vector<int> lp_predict(const HitProbTable& table) {
  std::vector<int> out(table.probs.rows(), 0);
  for (std::size_t v = 0; v < table.probs.rows(); ++v) {
    const auto row = table.probs.row(v);
    std::size_t best = 0;
    for (std::size_t i = 1; i < row.size(); ++i) {
      if (row[i] > row[best]) best = i;
    }
    out[v] = static_cast<int>(best);
  }
  return out;
}

}  // namespace tfgnn
