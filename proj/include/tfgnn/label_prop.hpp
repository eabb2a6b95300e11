#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "tfgnn/graph.hpp"
#include "tfgnn/matrix.hpp"
#include "tfgnn/node_mask.hpp"

// Label propagation as absorbing random walks.
//
// probs(v, i) is the probability that a uniform random walk from v reaches
// a labelled node within `depth` steps and the first labelled node it
// reaches has class i. Labelled rows are fixed one-hot vectors; unlabelled
// rows start at zero and are the neighbour mean of the previous step.
namespace tfgnn {

struct HitProbTable {
  std::size_t depth = 0;
  Matrix probs;                   // n x C
  std::vector<double> hit_mass;   // row sums of probs

  std::size_t num_nodes() const { return probs.rows(); }
  std::size_t num_classes() const { return probs.cols(); }
};

struct LabelPropProblem {
  Graph graph;
  std::span<const int> labels;  // class per node; only train entries are read
  std::size_t num_classes = 0;
  NodeMask train;
};

// Exactly `depth` steps of the first-hit recursion. Throws InputError when a
// train node's label is outside [0, num_classes) or sizes disagree.
HitProbTable lp_iterate(const LabelPropProblem& problem, std::size_t depth);

// One step of the recursion applied to `previous` (train rows kept).
HitProbTable lp_advance(const LabelPropProblem& problem, const HitProbTable& previous);

struct LabelPropSolution {
  HitProbTable table;
  bool converged = false;
  // max over nodes of the L1 change between the last two steps
  double last_step_change = 0.0;
  // Unlabelled nodes with no path to any labelled node; their rows stay 0.
  std::vector<NodeId> unreachable;
  // Empty unless unreachable nodes exist or the step cap was hit.
  std::string warning;
};

// Iterates until every unlabelled node that can reach a labelled node has
// 1 - hit_mass < tol. Since the limit dominates every finite-depth row,
// that is an L1 bound on the distance to the infinite-depth answer.
LabelPropSolution lp_solve(const LabelPropProblem& problem, double tol = 1e-9,
                           std::size_t max_steps = 10'000'000);

struct MonteCarloEstimate {
  std::vector<double> class_frequency;  // length C
  double no_hit = 0.0;
  std::size_t walks = 0;
};

// Empirical first-hit distribution from `walks` independent walks of at most
// max_steps steps starting at v. Walk w uses its own seed derived from
// (seed, w), so the result does not depend on scheduling.
MonteCarloEstimate lp_montecarlo(const LabelPropProblem& problem, NodeId start,
                                 std::size_t walks, std::size_t max_steps, std::uint64_t seed);

// Row-wise argmax; ties go to the smallest class index.
std::vector<int> lp_predict(const HitProbTable& table);

}  // namespace tfgnn
