#include <gtest/gtest.h>

#include <sstream>

#include "support/support.hpp"
#include "tfgnn/experiments.hpp"
#include "tfgnn/label_prop.hpp"
#include "tfgnn/synthetic.hpp"

namespace tfgnn {
namespace {

Dataset small_synthetic() {
  PlantedPartitionConfig cfg;
  cfg.nodes = 90;
  cfg.val_size = 20;
  cfg.p_in = 0.1;
  cfg.seed = 4;
  return make_planted_partition(cfg);
}

TEST(Csv, RecordsHeaderAndRows) {
  std::ostringstream out;
  const std::vector<RunRecord> rows{{"depth-sweep", "tfgnn", "a,b", 3, 7, 0.05, "test_acc", 0.5}};
  write_records_csv(out, rows);
  EXPECT_EQ(out.str(),
            "experiment,model,dataset,depth,seed,sigma,metric,value\n"
            "depth-sweep,tfgnn,\"a,b\",3,7,0.05,test_acc,0.5\n");
}

TEST(Csv, HistoryHeaderAndRows) {
  std::ostringstream out;
  TrainHistory h;
  h.points = {{0, 0.25, 0.5, 0.125}, {10, 0.1, 0.75, 1}};
  write_history_csv(out, ModelKind::GcnLaf, "syn", 2, h);
  EXPECT_EQ(out.str(),
            "model,dataset,seed,iter,loss,val_acc,test_acc\n"
            "gcn-laf,syn,2,0,0.25,0.5,0.125\n"
            "gcn-laf,syn,2,10,0.1,0.75,1\n");
}

TEST(Csv, FieldQuotingAndDoubles) {
  EXPECT_EQ(csv_field("plain"), "plain");
  EXPECT_EQ(csv_field("say \"hi\""), "\"say \"\"hi\"\"\"");
  EXPECT_EQ(format_double(0.1), "0.1");
  EXPECT_EQ(std::stod(format_double(1.0 / 3.0)), 1.0 / 3.0);
}

TEST(Experiments, TrainingFreeEmitsAccuracies) {
  const Dataset ds = small_synthetic();
  const auto rows = run_training_free(ds, ModelKind::Tfgnn, {3, 16}, 1);
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_EQ(rows[0].metric, "val_acc");
  EXPECT_EQ(rows[1].metric, "test_acc");
  for (const auto& r : rows) {
    EXPECT_GE(r.value, 0.0);
    EXPECT_LE(r.value, 1.0);
    EXPECT_EQ(r.seed, 1u);
    EXPECT_EQ(r.depth, 3u);
  }
}

TEST(Experiments, DepthSweepRowsPerDepth) {
  const Dataset ds = small_synthetic();
  const std::vector<std::size_t> depths{1, 2, 4};
  const auto rows = run_depth_sweep(ds, depths, 16, 0);
  ASSERT_EQ(rows.size(), 3u);
  for (std::size_t i = 0; i < 3; ++i) EXPECT_EQ(rows[i].depth, depths[i]);
}

TEST(Experiments, NoiseSweepShapeAndDeterminism) {
  const Dataset ds = small_synthetic();
  TrainConfig cfg;
  cfg.max_iters = 5;
  cfg.eval_every = 5;
  const std::vector<double> sigmas{0.0, 1.0};
  const std::vector<ModelKind> kinds{ModelKind::Tfgnn, ModelKind::Gcn};
  const auto a = run_noise_sweep(ds, sigmas, kinds, {2, 16}, cfg);
  ASSERT_EQ(a.size(), 4u);
  EXPECT_EQ(a[3].model, "gcn");
  EXPECT_EQ(a[3].sigma, 1.0);
  EXPECT_EQ(a, run_noise_sweep(ds, sigmas, kinds, {2, 16}, cfg));
  EXPECT_NE(noise_seed(0, 0.5), noise_seed(0, 1.0));
}

// The solved LP table at its stopping depth and the training-free TFGNN of
// that depth give the same predictions.
TEST(Experiments, LabelPropSolveMatchesDeepTrainingFree) {
  const Dataset ds = small_synthetic();
  const LabelPropSolution sol =
      lp_solve({ds.graph, ds.labels, ds.num_classes, ds.split.train}, 1e-9);
  const LabelPropRun run = run_label_prop(ds, {LabelPropMode::Solve});
  const NodeClassifier model = NodeClassifier::initialize(
      ModelKind::Tfgnn, ds.feature_dim(), ds.num_classes, {sol.table.depth, 16}, 0);
  const Evaluation eval = evaluate(model, ds);
  for (std::size_t i = 0; i < run.nodes.size(); ++i) {
    EXPECT_EQ(run.predictions[i], eval.predictions[run.nodes[i]]) << "node " << run.nodes[i];
  }
  EXPECT_EQ(run.accuracy, eval.test_acc);
}

TEST(Experiments, LabelPropModes) {
  const Dataset ds = small_synthetic();
  LabelPropRunConfig cfg;
  cfg.mode = LabelPropMode::Iterate;
  cfg.depth = 3;
  const LabelPropRun it = run_label_prop(ds, cfg);
  const Evaluation tf =
      evaluate(NodeClassifier::initialize(ModelKind::Tfgnn, ds.feature_dim(), ds.num_classes,
                                          {3, 16}, 0),
               ds);
  EXPECT_EQ(it.accuracy, tf.test_acc);

  cfg.mode = LabelPropMode::MonteCarlo;
  cfg.walks = 200;
  const LabelPropRun mc = run_label_prop(ds, cfg);
  EXPECT_EQ(mc.predictions, run_label_prop(ds, cfg).predictions);
  EXPECT_EQ(mc.nodes, it.nodes);
}

}  // namespace
}  // namespace tfgnn
