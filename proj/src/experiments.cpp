#include "tfgnn/experiments.hpp"

#include <bit>
#include <charconv>
#include <ostream>

#include "tfgnn/error.hpp"
#include "tfgnn/label_prop.hpp"
#include "tfgnn/rng.hpp"

namespace tfgnn {

std::string format_double(double x) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, ptr);
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

void write_records_csv(std::ostream& out, std::span<const RunRecord> records) {
  out << "experiment,model,dataset,depth,seed,sigma,metric,value\n";
  for (const RunRecord& r : records) {
    out << csv_field(r.experiment) << ',' << csv_field(r.model) << ',' << csv_field(r.dataset)
        << ',' << r.depth << ',' << r.seed << ',' << format_double(r.sigma) << ','
        << csv_field(r.metric) << ',' << format_double(r.value) << '\n';
  }
}

void write_history_csv(std::ostream& out, ModelKind kind, const std::string& dataset,
                       std::uint64_t seed, const TrainHistory& history) {
  out << "model,dataset,seed,iter,loss,val_acc,test_acc\n";
  for (const HistoryPoint& p : history.points) {
    out << to_string(kind) << ',' << csv_field(dataset) << ',' << seed << ',' << p.iteration
        << ',' << format_double(p.loss) << ',' << format_double(p.val_acc) << ','
        << format_double(p.test_acc) << '\n';
  }
}

std::vector<RunRecord> run_training_free(const Dataset& ds, ModelKind kind,
                                         const ModelShape& shape, std::uint64_t seed) {
  const NodeClassifier model =
      NodeClassifier::initialize(kind, ds.feature_dim(), ds.num_classes, shape, seed);
  const Evaluation eval = evaluate(model, ds);
  const std::string name(to_string(kind));
  return {
      {"training-free", name, ds.name, shape.layers, seed, 0.0, "val_acc", eval.val_acc},
      {"training-free", name, ds.name, shape.layers, seed, 0.0, "test_acc", eval.test_acc},
  };
}

std::vector<RunRecord> run_depth_sweep(const Dataset& ds, std::span<const std::size_t> depths,
                                       std::size_t hidden, std::uint64_t seed) {
  std::vector<RunRecord> out;
  for (std::size_t depth : depths) {
    const NodeClassifier model = NodeClassifier::initialize(
        ModelKind::Tfgnn, ds.feature_dim(), ds.num_classes, {depth, hidden}, seed);
    const Evaluation eval = evaluate(model, ds);
    out.push_back({"depth-sweep", "tfgnn", ds.name, depth, seed, 0.0, "test_acc", eval.test_acc});
  }
  return out;
}

std::uint64_t noise_seed(std::uint64_t seed, double sigma) {
  return derive_seed(derive_seed(seed, 0x6e6f697365ULL), std::bit_cast<std::uint64_t>(sigma));
}

std::vector<RunRecord> run_noise_sweep(const Dataset& ds, std::span<const double> sigmas,
                                       std::span<const ModelKind> kinds, const ModelShape& shape,
                                       const TrainConfig& cfg) {
  std::vector<RunRecord> out;
  for (double sigma : sigmas) {
    Dataset noisy = ds;
    noisy.features = perturb_features(ds.features, sigma, noise_seed(cfg.seed, sigma));
    for (ModelKind kind : kinds) {
      const TrainResult trained = train_loop(kind, noisy, shape, cfg);
      const HistoryPoint& best = trained.history.points.at(trained.history.best_index);
      out.push_back({"noise-sweep", std::string(to_string(kind)), ds.name, shape.layers, cfg.seed,
                     sigma, "test_acc", best.test_acc});
    }
  }
  return out;
}

LabelPropRun run_label_prop(const Dataset& ds, const LabelPropRunConfig& cfg) {
  const LabelPropProblem problem{ds.graph, ds.labels, ds.num_classes, ds.split.train};
  LabelPropRun run;
  run.nodes = ds.split.test.indices();

  std::vector<int> all;
  switch (cfg.mode) {
    case LabelPropMode::Iterate:
      all = lp_predict(lp_iterate(problem, cfg.depth));
      break;
    case LabelPropMode::Solve: {
      const LabelPropSolution sol = lp_solve(problem, cfg.tol);
      run.converged = sol.converged;
      all = lp_predict(sol.table);
      break;
    }
    case LabelPropMode::MonteCarlo:
      all.assign(ds.num_nodes(), 0);
      for (NodeId v : run.nodes) {
        const MonteCarloEstimate est =
            lp_montecarlo(problem, v, cfg.walks, cfg.max_steps, derive_seed(cfg.seed, v));
        std::size_t best = 0;
        for (std::size_t i = 1; i < est.class_frequency.size(); ++i) {
          if (est.class_frequency[i] > est.class_frequency[best]) best = i;
        }
        all[v] = static_cast<int>(best);
      }
      break;
  }

  for (NodeId v : run.nodes) run.predictions.push_back(all[v]);
  const NodeMask labelled = ds.labelled(ds.split.test);
  if (!labelled.empty()) run.accuracy = evaluate_accuracy(all, ds.labels, labelled);
  return run;
}

}  // namespace tfgnn
