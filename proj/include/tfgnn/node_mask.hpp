#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "tfgnn/graph.hpp"

namespace tfgnn {

// Membership set over the nodes of one graph.
class NodeMask {
 public:
  NodeMask() = default;
  explicit NodeMask(std::size_t num_nodes) : bits_(num_nodes, 0) {}

  static NodeMask from_indices(std::size_t num_nodes, std::span<const NodeId> members);

  std::size_t size() const noexcept { return bits_.size(); }
  bool contains(NodeId v) const { return bits_.at(v) != 0; }
  void insert(NodeId v) { bits_.at(v) = 1; }
  void erase(NodeId v) { bits_.at(v) = 0; }

  std::size_t count() const;
  bool empty() const { return count() == 0; }
  // Members in increasing order.
  std::vector<NodeId> indices() const;

  std::span<const std::uint8_t> bits() const noexcept { return bits_; }

  friend bool operator==(const NodeMask&, const NodeMask&) = default;

 private:
  std::vector<std::uint8_t> bits_;
};

inline NodeMask NodeMask::from_indices(std::size_t num_nodes, std::span<const NodeId> members) {
  NodeMask mask(num_nodes);
  for (NodeId v : members) mask.insert(v);
  return mask;
}

inline std::size_t NodeMask::count() const {
  std::size_t n = 0;
  for (auto b : bits_) n += b;
  return n;
}

inline std::vector<NodeId> NodeMask::indices() const {
  std::vector<NodeId> out;
  for (std::size_t v = 0; v < bits_.size(); ++v) {
    if (bits_[v]) out.push_back(static_cast<NodeId>(v));
  }
  return out;
}

}  // namespace tfgnn
