#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "tfgnn/dataset.hpp"
#include "tfgnn/model.hpp"
#include "tfgnn/train.hpp"

namespace tfgnn {

// One result line. Accuracy metrics are in [0, 1].
struct RunRecord {
  std::string experiment;
  std::string model;
  std::string dataset;
  std::size_t depth = 0;
  std::uint64_t seed = 0;
  double sigma = 0.0;
  std::string metric;
  double value = 0.0;

  friend bool operator==(const RunRecord&, const RunRecord&) = default;
};

// Header: experiment,model,dataset,depth,seed,sigma,metric,value
void write_records_csv(std::ostream& out, std::span<const RunRecord> records);

// Header: model,dataset,seed,iter,loss,val_acc,test_acc
void write_history_csv(std::ostream& out, ModelKind kind, const std::string& dataset,
                       std::uint64_t seed, const TrainHistory& history);

// Shortest decimal that round-trips.
std::string format_double(double x);

// Quotes a CSV field when it holds a comma, quote or newline.
std::string csv_field(const std::string& s);

// Untrained model evaluated with every train label visible. Emits val_acc and
// test_acc records.
std::vector<RunRecord> run_training_free(const Dataset& ds, ModelKind kind,
                                         const ModelShape& shape, std::uint64_t seed);

// Training-free TFGNN test accuracy for each depth.
std::vector<RunRecord> run_depth_sweep(const Dataset& ds, std::span<const std::size_t> depths,
                                       std::size_t hidden, std::uint64_t seed);

// For each sigma and each of `kinds`: perturb the features, train, and report
// the test accuracy of the best-validation checkpoint.
std::vector<RunRecord> run_noise_sweep(const Dataset& ds, std::span<const double> sigmas,
                                       std::span<const ModelKind> kinds, const ModelShape& shape,
                                       const TrainConfig& cfg);

// Noise stream for one (seed, sigma) pair, shared by every model at that
// sigma so they see identical features.
std::uint64_t noise_seed(std::uint64_t seed, double sigma);

enum class LabelPropMode { Iterate, Solve, MonteCarlo };

struct LabelPropRunConfig {
  LabelPropMode mode = LabelPropMode::Solve;
  std::size_t depth = 3;            // iterate
  double tol = 1e-9;                // solve
  std::size_t walks = 1000;         // mc
  std::size_t max_steps = 1000;     // mc
  std::uint64_t seed = 0;           // mc
};

struct LabelPropRun {
  std::vector<NodeId> nodes;        // test nodes, ascending
  std::vector<int> predictions;     // aligned with nodes
  double accuracy = 0.0;            // over labelled test nodes, 0 if none
  bool converged = true;            // solve only
};

LabelPropRun run_label_prop(const Dataset& ds, const LabelPropRunConfig& cfg);

}  // namespace tfgnn
