#include "tfgnn/graph.hpp"

#include <algorithm>
#include <string>

#include "tfgnn/error.hpp"
#include "tfgnn/rng.hpp"

namespace tfgnn {

Graph::Graph() : csr_(std::make_shared<const Csr>()) {}

Graph Graph::build(std::size_t num_nodes, std::span<const Edge> edges) {
  std::vector<std::vector<NodeId>> adjacency(num_nodes);
  for (const Edge& e : edges) {
    if (e.u >= num_nodes || e.v >= num_nodes) {
      throw InputError("edge (" + std::to_string(e.u) + ", " + std::to_string(e.v) +
                       ") has an endpoint outside [0, " + std::to_string(num_nodes) + ")");
    }
    if (e.u == e.v) continue;
    adjacency[e.u].push_back(e.v);
    adjacency[e.v].push_back(e.u);
  }

  auto csr = std::make_shared<Csr>();
  csr->num_nodes = num_nodes;
  csr->row_offsets.assign(num_nodes + 1, 0);
  for (std::size_t v = 0; v < num_nodes; ++v) {
    auto& row = adjacency[v];
    std::sort(row.begin(), row.end());
    row.erase(std::unique(row.begin(), row.end()), row.end());
    csr->row_offsets[v + 1] = csr->row_offsets[v] + row.size();
  }
  csr->col_indices.reserve(csr->row_offsets.back());
  for (const auto& row : adjacency) {
    csr->col_indices.insert(csr->col_indices.end(), row.begin(), row.end());
  }
  return Graph(std::move(csr));
}

std::size_t Graph::degree(NodeId v) const { return neighbors(v).size(); }

std::span<const NodeId> Graph::neighbors(NodeId v) const {
  if (v >= csr_->num_nodes) {
    throw InputError("node " + std::to_string(v) + " out of range for graph with " +
                     std::to_string(csr_->num_nodes) + " nodes");
  }
  const auto begin = csr_->row_offsets[v];
  const auto end = csr_->row_offsets[v + 1];
  return std::span<const NodeId>(csr_->col_indices).subspan(begin, end - begin);
}

std::vector<Edge> Graph::edges() const {
  std::vector<Edge> out;
  out.reserve(num_edges());
  for (NodeId u = 0; u < num_nodes(); ++u) {
    for (NodeId v : neighbors(u)) {
      if (u < v) out.push_back({u, v});
    }
  }
  return out;
}

bool Graph::is_connected() const {
  const std::size_t n = num_nodes();
  if (n == 0) return true;
  std::vector<char> seen(n, 0);
  std::vector<NodeId> stack{0};
  seen[0] = 1;
  std::size_t visited = 1;
  while (!stack.empty()) {
    const NodeId u = stack.back();
    stack.pop_back();
    for (NodeId v : neighbors(u)) {
      if (!seen[v]) {
        seen[v] = 1;
        ++visited;
        stack.push_back(v);
      }
    }
  }
  return visited == n;
}

bool operator==(const Graph& a, const Graph& b) {
  return a.csr_->num_nodes == b.csr_->num_nodes &&
         a.csr_->row_offsets == b.csr_->row_offsets &&
         a.csr_->col_indices == b.csr_->col_indices;
}

Graph make_cycle(std::size_t n) {
  if (n < 3) throw InputError("cycle needs at least 3 nodes, got " + std::to_string(n));
  std::vector<Edge> edges;
  edges.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    edges.push_back({static_cast<NodeId>(i), static_cast<NodeId>((i + 1) % n)});
  }
  return Graph::build(n, edges);
}

Graph make_er(std::size_t n, double p, std::uint64_t seed) {
  if (!(p >= 0.0 && p <= 1.0)) throw InputError("edge probability must lie in [0, 1]");
  Rng rng(seed);
  std::vector<Edge> edges;
  for (std::size_t u = 0; u < n; ++u) {
    for (std::size_t v = u + 1; v < n; ++v) {
      if (rng.uniform() < p) edges.push_back({static_cast<NodeId>(u), static_cast<NodeId>(v)});
    }
  }
  return Graph::build(n, edges);
}

}  // namespace tfgnn
