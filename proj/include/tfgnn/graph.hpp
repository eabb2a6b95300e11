#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <vector>

namespace tfgnn {

using NodeId = std::uint32_t;

struct Edge {
  NodeId u;
  NodeId v;
  friend bool operator==(const Edge&, const Edge&) = default;
};

// Undirected, unweighted graph in symmetric CSR form.
//
// Invariants: adjacency is symmetric, there are no self-loops or duplicate
// edges, and each row of col_indices is strictly increasing. Instances are
// immutable; copies share the same storage, so passing a Graph by value is
// cheap and safe across threads.
class Graph {
 public:
  Graph();

  // Symmetrises, deduplicates and drops self-loops. Throws InputError when
  // an endpoint is >= num_nodes.
  static Graph build(std::size_t num_nodes, std::span<const Edge> edges);

  std::size_t num_nodes() const noexcept { return csr_->num_nodes; }
  // Undirected edge count.
  std::size_t num_edges() const noexcept { return csr_->col_indices.size() / 2; }

  std::size_t degree(NodeId v) const;
  // Sorted neighbour list. Throws InputError when v is out of range.
  std::span<const NodeId> neighbors(NodeId v) const;

  std::span<const std::size_t> row_offsets() const noexcept { return csr_->row_offsets; }
  std::span<const NodeId> col_indices() const noexcept { return csr_->col_indices; }

  // Each undirected edge once, as (u, v) with u < v, in CSR order.
  std::vector<Edge> edges() const;

  bool is_connected() const;

  friend bool operator==(const Graph& a, const Graph& b);

 private:
  struct Csr {
    std::size_t num_nodes = 0;
    std::vector<std::size_t> row_offsets{0};
    std::vector<NodeId> col_indices;
  };

  explicit Graph(std::shared_ptr<const Csr> csr) : csr_(std::move(csr)) {}

  std::shared_ptr<const Csr> csr_;
};

// Cycle 0-1-...-(n-1)-0. Throws InputError for n < 3.
Graph make_cycle(std::size_t n);

// Erdos-Renyi G(n, p): every unordered pair present independently with
// probability p. Identical output for identical (n, p, seed) on all platforms.
Graph make_er(std::size_t n, double p, std::uint64_t seed);

}  // namespace tfgnn
