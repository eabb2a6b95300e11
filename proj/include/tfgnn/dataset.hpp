#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "tfgnn/graph.hpp"
#include "tfgnn/matrix.hpp"
#include "tfgnn/node_mask.hpp"

namespace tfgnn {

enum class FeatureMode { Tsv, RawF32Le };

// Disjoint train / validation / test node sets.
struct Split {
  NodeMask train;
  NodeMask val;
  NodeMask test;

  friend bool operator==(const Split&, const Split&) = default;
};

inline constexpr int kUnknownLabel = -1;

struct Dataset {
  std::string name;
  Graph graph;
  Matrix features;             // n x d
  std::vector<int> labels;     // class in [0, C) or kUnknownLabel
  std::size_t num_classes = 0;
  Split split;
  FeatureMode feature_mode = FeatureMode::Tsv;

  std::size_t num_nodes() const { return graph.num_nodes(); }
  std::size_t feature_dim() const { return features.cols(); }

  // `mask` restricted to nodes with a known label.
  NodeMask labelled(const NodeMask& mask) const;

  // Throws ValidationError("dataset", 0, ...) when an invariant fails:
  // sizes disagree, labels out of range, splits overlap, a train node is
  // unlabelled.
  void validate() const;

  friend bool operator==(const Dataset&, const Dataset&) = default;
};

// Reads the bundle directory layout:
//   meta          key=value lines: nodes, features, classes, feature_mode
//   edges.tsv     "u\tv" per line, u < v, unique
//   features.tsv  n lines of d tab-separated decimals (or features.bin,
//                 n*d little-endian float32, row-major, for raw_f32le)
//   labels.tsv    n lines, class in [0, C) or -1
//   split.tsv     n lines, train | val | test
// All indices are 0-based. Any violation throws ValidationError naming the
// file and line. The dataset name is the directory name.
Dataset load_bundle(const std::filesystem::path& dir);

// Writes the same layout; creates the directory if needed. TSV features use
// shortest round-trip decimals, so load_bundle(save_bundle(ds)) == ds.
// Throws ValidationError if ds is invalid or the split leaves a node
// unassigned.
void save_bundle(const Dataset& ds, const std::filesystem::path& dir);

// Per class, `per_class_train` nodes in a seed-determined order go to train;
// `val_size` of the remaining labelled nodes go to validation; every other
// node is test. Throws InputError if a class has too few labelled nodes or
// too few remain for validation.
Split make_standard_split(std::span<const int> labels, std::size_t num_classes,
                          std::size_t per_class_train, std::size_t val_size,
                          std::uint64_t seed);

}  // namespace tfgnn
