#include "tfgnn/synthetic.hpp"

#include <vector>

#include "tfgnn/error.hpp"
#include "tfgnn/rng.hpp"

namespace tfgnn {

Dataset make_planted_partition(const PlantedPartitionConfig& cfg) {
  if (cfg.classes == 0 || cfg.nodes < cfg.classes) {
    throw ConfigError("planted partition needs at least one node per class");
  }
  if (cfg.feature_dim < cfg.classes) {
    throw ConfigError("feature_dim must be at least the number of classes");
  }
  if (!(cfg.p_in >= 0.0 && cfg.p_in <= 1.0) || !(cfg.p_out >= 0.0 && cfg.p_out <= 1.0)) {
    throw ConfigError("edge probabilities must be in [0, 1]");
  }

  Rng edge_rng(derive_seed(cfg.seed, 0));
  Rng feature_rng(derive_seed(cfg.seed, 1));

  std::vector<int> labels(cfg.nodes);
  for (std::size_t v = 0; v < cfg.nodes; ++v) labels[v] = static_cast<int>(v % cfg.classes);

  std::vector<Edge> edges;
  for (NodeId u = 0; u < cfg.nodes; ++u) {
    for (NodeId v = u + 1; v < cfg.nodes; ++v) {
      const double p = labels[u] == labels[v] ? cfg.p_in : cfg.p_out;
      if (edge_rng.uniform() < p) edges.push_back({u, v});
    }
  }

  Matrix features(cfg.nodes, cfg.feature_dim);
  for (std::size_t v = 0; v < cfg.nodes; ++v) {
    auto row = features.row(v);
    for (double& x : row) x = feature_rng.normal();
    row[static_cast<std::size_t>(labels[v])] += cfg.signal;
  }

  Dataset ds;
  ds.name = cfg.name;
  ds.graph = Graph::build(cfg.nodes, edges);
  ds.features = std::move(features);
  ds.num_classes = cfg.classes;
  ds.split = make_standard_split(labels, cfg.classes, cfg.per_class_train, cfg.val_size,
                                 derive_seed(cfg.seed, 2));
  ds.labels = std::move(labels);
  ds.validate();
  return ds;
}

}  // namespace tfgnn
