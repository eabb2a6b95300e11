#pragma once

#include <cstddef>
#include <cstdint>
#include <string>

#include "tfgnn/dataset.hpp"

namespace tfgnn {

// Planted-partition graph: node v belongs to class v % classes, edges inside
// a class appear with p_in and across classes with p_out. Features are a
// noisy class indicator: x_v = signal * onehot(class, feature_dim) + N(0, 1)
// in every column (feature_dim >= classes).
struct PlantedPartitionConfig {
  std::string name = "synthetic";
  std::size_t nodes = 300;
  std::size_t classes = 3;
  std::size_t feature_dim = 8;
  double p_in = 0.05;
  double p_out = 0.005;
  double signal = 0.5;
  std::size_t per_class_train = 5;
  std::size_t val_size = 50;
  std::uint64_t seed = 0;
};

// Throws ConfigError on invalid settings.
Dataset make_planted_partition(const PlantedPartitionConfig& cfg);

}  // namespace tfgnn
