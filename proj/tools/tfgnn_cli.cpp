#include <CLI11.hpp>

#include <charconv>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "tfgnn/dataset.hpp"
#include "tfgnn/error.hpp"
#include "tfgnn/experiments.hpp"
#include "tfgnn/synthetic.hpp"
#include "tfgnn/train.hpp"

namespace {

using namespace tfgnn;

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitNumerical = 3;

struct CommonOptions {
  std::string data;
  std::string output;
};

struct ModelOptions {
  std::string model = "tfgnn";
  std::size_t layers = 3;
  std::size_t hidden = 32;
};

struct TrainOptions {
  std::size_t iters = 2000;
  double lr = 1e-4;
  double weight_decay = 0.01;
  double mask_fraction = 0.5;
  std::size_t eval_every = 10;
};

ModelKind model_kind(const std::string& name) {
  auto kind = parse_model_kind(name);
  if (!kind) throw ConfigError("unknown model '" + name + "' (expected tfgnn, gcn or gcn-laf)");
  return *kind;
}

// "3", "1..16" or "2,4,8".
std::vector<std::size_t> parse_depths(const std::string& spec) {
  auto number = [&spec](std::string_view s) {
    std::size_t v = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size() || v == 0) {
      throw ConfigError("bad depth list '" + spec + "'");
    }
    return v;
  };
  std::vector<std::size_t> out;
  const std::string_view sv = spec;
  if (const auto dots = sv.find(".."); dots != std::string_view::npos) {
    const std::size_t lo = number(sv.substr(0, dots));
    const std::size_t hi = number(sv.substr(dots + 2));
    if (lo > hi) throw ConfigError("empty depth range '" + spec + "'");
    for (std::size_t d = lo; d <= hi; ++d) out.push_back(d);
    return out;
  }
  std::size_t start = 0;
  while (start <= sv.size()) {
    const auto comma = sv.find(',', start);
    out.push_back(number(sv.substr(start, comma == std::string_view::npos ? comma : comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

TrainConfig train_config(const TrainOptions& t, std::uint64_t seed) {
  TrainConfig cfg;
  cfg.learning_rate = t.lr;
  cfg.weight_decay = t.weight_decay;
  cfg.max_iters = t.iters;
  cfg.mask_fraction = t.mask_fraction;
  cfg.eval_every = t.eval_every;
  cfg.seed = seed;
  cfg.validate();
  return cfg;
}

void add_common(CLI::App* cmd, CommonOptions& c) {
  cmd->add_option("--data", c.data, "Bundle directory")->required();
  cmd->add_option("--output", c.output, "Write CSV here instead of stdout");
}

void add_model(CLI::App* cmd, ModelOptions& m, bool with_layers = true) {
  cmd->add_option("--model", m.model, "tfgnn, gcn or gcn-laf")->capture_default_str();
  if (with_layers) cmd->add_option("--layers", m.layers, "Depth")->capture_default_str();
  cmd->add_option("--hidden", m.hidden, "Hidden width")->capture_default_str();
}

void add_train(CLI::App* cmd, TrainOptions& t) {
  cmd->add_option("--iters", t.iters, "Optimisation steps")->capture_default_str();
  cmd->add_option("--lr", t.lr, "AdamW learning rate")->capture_default_str();
  cmd->add_option("--weight-decay", t.weight_decay, "AdamW weight decay")->capture_default_str();
  cmd->add_option("--mask-fraction", t.mask_fraction, "Share of train labels hidden per step")
      ->capture_default_str();
  cmd->add_option("--eval-every", t.eval_every, "Iterations between history points")
      ->capture_default_str();
}

// Writes `body` to --output or stdout.
void emit(const CommonOptions& c, const std::string& body) {
  if (c.output.empty()) {
    std::cout << body << std::flush;
    return;
  }
  std::ofstream out(c.output, std::ios::binary | std::ios::trunc);
  if (!out) throw ValidationError(c.output, 0, "cannot open for writing");
  out << body;
}

// Echoes the full invocation to stderr so stdout stays pure CSV.
void echo_config(const CLI::App& cmd) {
  std::istringstream lines(cmd.config_to_str(true, false));
  std::cerr << "# " << cmd.get_name() << '\n';
  for (std::string line; std::getline(lines, line);) {
    if (!line.empty()) std::cerr << "#   " << line << '\n';
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Training-free graph neural networks and label propagation"};
  app.require_subcommand(1);

  CommonOptions common;
  ModelOptions model;
  TrainOptions train;
  std::vector<std::uint64_t> seeds{0};
  std::uint64_t seed = 0;

  auto* tf = app.add_subcommand("training-free", "Accuracy of an untrained model");
  add_common(tf, common);
  add_model(tf, model);
  tf->add_option("--seed", seeds, "Seeds, comma separated")->delimiter(',')->capture_default_str();

  auto* tr = app.add_subcommand("train", "Train one model and print its history");
  add_common(tr, common);
  add_model(tr, model);
  add_train(tr, train);
  tr->add_option("--seed", seed, "Seed")->capture_default_str();

  std::string depths = "1..16";
  auto* ds_cmd = app.add_subcommand("depth-sweep", "Training-free TFGNN accuracy per depth");
  add_common(ds_cmd, common);
  ds_cmd->add_option("--layers", depths, "Depths: N, A..B or a comma list")->capture_default_str();
  ds_cmd->add_option("--hidden", model.hidden, "Hidden width")->capture_default_str();
  ds_cmd->add_option("--seed", seeds, "Seeds, comma separated")->delimiter(',')
      ->capture_default_str();

  std::vector<double> sigmas{0.0, 0.05, 0.1, 0.2, 0.5, 1.0};
  std::vector<std::string> models{"tfgnn", "gcn"};
  auto* ns = app.add_subcommand("noise-sweep", "Trained accuracy under Gaussian feature noise");
  add_common(ns, common);
  add_train(ns, train);
  ns->add_option("--sigmas", sigmas, "Noise levels, comma separated")->delimiter(',')
      ->capture_default_str();
  ns->add_option("--models", models, "Models, comma separated")->delimiter(',')
      ->capture_default_str();
  ns->add_option("--layers", model.layers, "Depth")->capture_default_str();
  ns->add_option("--hidden", model.hidden, "Hidden width")->capture_default_str();
  ns->add_option("--seed", seeds, "Seeds, comma separated")->delimiter(',')->capture_default_str();

  std::string mode = "solve";
  LabelPropRunConfig lp;
  auto* lpc = app.add_subcommand("label-prop", "Label propagation predictions for test nodes");
  add_common(lpc, common);
  lpc->add_option("--mode", mode, "iterate, solve or mc")
      ->check(CLI::IsMember({"iterate", "solve", "mc"}))
      ->capture_default_str();
  lpc->add_option("--depth", lp.depth, "Steps for iterate")->capture_default_str();
  lpc->add_option("--tol", lp.tol, "Mass deficit tolerance for solve")->capture_default_str();
  lpc->add_option("--walks", lp.walks, "Walks per node for mc")->capture_default_str();
  lpc->add_option("--max-steps", lp.max_steps, "Walk length cap for mc")->capture_default_str();
  lpc->add_option("--seed", lp.seed, "Seed for mc")->capture_default_str();

  PlantedPartitionConfig synth;
  std::string synth_out;
  auto* sy = app.add_subcommand("synth", "Write a planted-partition bundle");
  sy->add_option("--out", synth_out, "Bundle directory")->required();
  sy->add_option("--nodes", synth.nodes)->capture_default_str();
  sy->add_option("--classes", synth.classes)->capture_default_str();
  sy->add_option("--features", synth.feature_dim)->capture_default_str();
  sy->add_option("--p-in", synth.p_in)->capture_default_str();
  sy->add_option("--p-out", synth.p_out)->capture_default_str();
  sy->add_option("--signal", synth.signal)->capture_default_str();
  sy->add_option("--per-class-train", synth.per_class_train)->capture_default_str();
  sy->add_option("--val-size", synth.val_size)->capture_default_str();
  sy->add_option("--seed", synth.seed)->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kExitOk : kExitUsage;
  }

  try {
    CLI::App* active = app.get_subcommands().front();
    echo_config(*active);

    if (active == sy) {
      synth.name = std::filesystem::path(synth_out).filename().string();
      save_bundle(make_planted_partition(synth), synth_out);
      return kExitOk;
    }

    const Dataset ds = load_bundle(common.data);
    std::ostringstream out;

    if (active == tf) {
      std::vector<RunRecord> records;
      for (std::uint64_t s : seeds) {
        auto r = run_training_free(ds, model_kind(model.model), {model.layers, model.hidden}, s);
        records.insert(records.end(), r.begin(), r.end());
      }
      write_records_csv(out, records);
    } else if (active == tr) {
      const TrainResult result = train_loop(model_kind(model.model), ds,
                                            {model.layers, model.hidden}, train_config(train, seed));
      write_history_csv(out, model_kind(model.model), ds.name, seed, result.history);
    } else if (active == ds_cmd) {
      const std::vector<std::size_t> ds_depths = parse_depths(depths);
      std::vector<RunRecord> records;
      for (std::uint64_t s : seeds) {
        auto r = run_depth_sweep(ds, ds_depths, model.hidden, s);
        records.insert(records.end(), r.begin(), r.end());
      }
      write_records_csv(out, records);
    } else if (active == ns) {
      std::vector<ModelKind> kinds;
      for (const auto& m : models) kinds.push_back(model_kind(m));
      std::vector<RunRecord> records;
      for (std::uint64_t s : seeds) {
        auto r = run_noise_sweep(ds, sigmas, kinds, {model.layers, model.hidden},
                                 train_config(train, s));
        records.insert(records.end(), r.begin(), r.end());
      }
      write_records_csv(out, records);
    } else if (active == lpc) {
      lp.mode = mode == "iterate" ? LabelPropMode::Iterate
                : mode == "mc"    ? LabelPropMode::MonteCarlo
                                  : LabelPropMode::Solve;
      const LabelPropRun run = run_label_prop(ds, lp);
      out << "mode,dataset,seed,node,label,prediction\n";
      for (std::size_t i = 0; i < run.nodes.size(); ++i) {
        const NodeId v = run.nodes[i];
        out << mode << ',' << csv_field(ds.name) << ',' << lp.seed << ',' << v << ','
            << ds.labels[v] << ',' << run.predictions[i] << '\n';
      }
      std::cerr << "# accuracy=" << format_double(run.accuracy) << '\n';
      if (!run.converged) std::cerr << "# warning: label propagation did not converge\n";
    }

    emit(common, out.str());
    return kExitOk;
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitData;
  } catch (const NumericalError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitNumerical;
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const InputError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitData;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitData;
  }
}
