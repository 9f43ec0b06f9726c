// Command-line entry point: train, eval, analyze, gen-synthetic, export.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "dpgnn/analysis.hpp"
#include "dpgnn/dataset.hpp"
#include "dpgnn/io.hpp"
#include "dpgnn/simd/kernels.hpp"
#include "dpgnn/train.hpp"

namespace fs = std::filesystem;
using namespace dpgnn;

namespace {

struct Overrides {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string mode;
  std::string agg;
  std::vector<std::string> assignments;
};

void add_override_options(CLI::App* cmd, Overrides& o) {
  cmd->add_option("--config", o.config_path, "key=value configuration file");
  cmd->add_option("--seed", o.seed, "override the run seed");
  cmd->add_option("--mode", o.mode, "dual | topology_only | feature_only | mlp_only");
  cmd->add_option("--agg", o.agg, "attention | mean | max");
  cmd->add_option("--set", o.assignments, "extra key=value overrides")->take_all();
}

TrainConfig resolve_config(const Overrides& o, std::optional<TrainConfig> base = std::nullopt) {
  TrainConfig config = base.value_or(TrainConfig{});
  if (!o.config_path.empty()) config = load_config(o.config_path);
  for (const auto& assignment : o.assignments) {
    const auto eq = assignment.find('=');
    if (eq == std::string::npos) throw std::invalid_argument("--set expects key=value, got '" + assignment + "'");
    apply_config_value(config, assignment.substr(0, eq), assignment.substr(eq + 1));
  }
  if (o.seed) config.seed = *o.seed;
  if (!o.mode.empty()) config.mode = parse_mode(o.mode);
  if (!o.agg.empty()) config.aggregator = parse_aggregator(o.agg);
  config.validate();
  return config;
}

struct RunStats {
  double mean = 0.0;
  double stddev = 0.0;
  std::size_t used = 0;
};

// Runs are sorted and, with 20 or more, the best and worst 5 are dropped.
RunStats summarize_runs(std::vector<double> values) {
  std::sort(values.begin(), values.end());
  if (values.size() >= 20) values = std::vector<double>(values.begin() + 5, values.end() - 5);
  RunStats s;
  s.used = values.size();
  s.mean = std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
  double sq = 0.0;
  for (double v : values) sq += (v - s.mean) * (v - s.mean);
  s.stddev = values.size() > 1 ? std::sqrt(sq / static_cast<double>(values.size() - 1)) : 0.0;
  return s;
}

int cmd_train(const Overrides& o, const fs::path& data_dir, const fs::path& out_dir, std::size_t runs) {
  const TrainConfig base = resolve_config(o);
  const DatasetBundle data = load_dataset(data_dir);
  fs::create_directories(out_dir);
  save_config(base, out_dir / "config.txt");
  const ModelInputs inputs = prepare_inputs(data, base);

  std::vector<double> test_accuracies;
  std::string runs_csv = "seed,best_epoch,epochs,train_acc,val_acc,test_acc\n";
  for (std::size_t r = 0; r < runs; ++r) {
    TrainConfig config = base;
    config.seed = base.seed + r;
    const fs::path run_dir = runs == 1 ? out_dir : out_dir / fmt::format("run_{}", config.seed);
    fs::create_directories(run_dir);
    const FitResult result = fit(data, inputs, config);
    write_history_csv(result.history, run_dir / "history.csv");
    save_checkpoint(make_checkpoint(config, result), run_dir / "checkpoint.bin");
    const ExportSummary summary = export_artifacts(result.params, inputs, config.forward_config(), data, run_dir);
    test_accuracies.push_back(summary.test_accuracy);
    runs_csv += fmt::format("{},{},{},{},{},{}\n", config.seed, result.best_epoch, result.epochs_run,
                            format_number(summary.train_accuracy), format_number(summary.val_accuracy),
                            format_number(summary.test_accuracy));
    fmt::print("seed {}: best epoch {} of {}, train {:.4f} val {:.4f} test {:.4f}\n", config.seed, result.best_epoch,
               result.epochs_run, summary.train_accuracy, summary.val_accuracy, summary.test_accuracy);
  }
  if (runs > 1) {
    write_text_file(out_dir / "runs.csv", runs_csv);
    const RunStats stats = summarize_runs(test_accuracies);
    fmt::print("test accuracy over {} runs ({} used): {:.2f} +- {:.2f}\n", runs, stats.used, 100.0 * stats.mean,
               100.0 * stats.stddev);
  }
  return 0;
}

int cmd_eval(const Overrides& o, const fs::path& data_dir, const fs::path& checkpoint_path) {
  const Checkpoint ck = load_checkpoint(checkpoint_path);
  const TrainConfig config = resolve_config(o, ck.config);
  const DatasetBundle data = load_dataset(data_dir);
  check_compatible(ck, model_shape(data, config));
  const ModelInputs inputs = prepare_inputs(data, config);
  const Matrix z = predict(inputs, ck.params, config.forward_config());
  const auto labels = data.graph.labels();
  fmt::print("metric,value\n");
  fmt::print("train_accuracy,{}\n", format_number(accuracy(z, labels, data.split.train)));
  if (!data.split.val.empty()) fmt::print("val_accuracy,{}\n", format_number(accuracy(z, labels, data.split.val)));
  if (!data.split.test.empty()) fmt::print("test_accuracy,{}\n", format_number(accuracy(z, labels, data.split.test)));
  return 0;
}

int cmd_export(const Overrides& o, const fs::path& data_dir, const fs::path& checkpoint_path, const fs::path& out_dir) {
  const Checkpoint ck = load_checkpoint(checkpoint_path);
  const TrainConfig config = resolve_config(o, ck.config);
  const DatasetBundle data = load_dataset(data_dir);
  check_compatible(ck, model_shape(data, config));
  const ModelInputs inputs = prepare_inputs(data, config);
  const ExportSummary s = export_artifacts(ck.params, inputs, config.forward_config(), data, out_dir);
  fmt::print("wrote {} (test accuracy {:.4f})\n", out_dir.string(), s.test_accuracy);
  return 0;
}

int cmd_analyze(const fs::path& data_dir, std::size_t max_hops, const fs::path& out_dir) {
  const DatasetBundle data = load_dataset(data_dir);
  const TopologyReport report = graph_summary(data.graph, max_hops);
  fmt::print("nodes {}  edges {}  average degree {:.2f}  components {}\n", report.nodes, report.edges,
             report.average_degree, report.component_count());
  for (const auto& c : report.per_hop) {
    const auto rate = c.rate();
    fmt::print("  P_{} = {}  ({} pairs)\n", c.hops, rate ? fmt::format("{:.4f}", *rate) : "undefined", c.pairs);
  }
  if (!out_dir.empty()) write_topology_report(report, out_dir);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Dual-perception graph neural network with multi-hop graph generation"};
  app.require_subcommand(1);
  std::string isa;
  app.add_option("--isa", isa, "force kernel variant: scalar | avx2 | neon");

  Overrides overrides;
  fs::path data_dir;
  fs::path out_dir;
  fs::path checkpoint;
  std::size_t runs = 1;

  auto* train = app.add_subcommand("train", "train a model and write history, checkpoint and exports");
  add_override_options(train, overrides);
  train->add_option("--data", data_dir, "dataset directory")->required();
  train->add_option("--out", out_dir, "output directory")->required();
  train->add_option("--runs", runs, "repeat with seeds seed..seed+R-1 and report mean +- std")->check(CLI::PositiveNumber);

  auto* eval = app.add_subcommand("eval", "evaluate a checkpoint");
  add_override_options(eval, overrides);
  eval->add_option("--data", data_dir, "dataset directory")->required();
  eval->add_option("--checkpoint", checkpoint, "checkpoint file")->required();

  auto* exporter = app.add_subcommand("export", "write embeddings, hop attention and metrics for a checkpoint");
  add_override_options(exporter, overrides);
  exporter->add_option("--data", data_dir, "dataset directory")->required();
  exporter->add_option("--checkpoint", checkpoint, "checkpoint file")->required();
  exporter->add_option("--out", out_dir, "output directory")->required();

  std::size_t max_hops = 6;
  auto* analyze = app.add_subcommand("analyze", "topology statistics and inter-class rates");
  analyze->add_option("--config", overrides.config_path, "accepted for uniformity; unused");
  analyze->add_option("--data", data_dir, "dataset directory")->required();
  analyze->add_option("--l-max", max_hops, "largest shortest-path length to tabulate")->check(CLI::PositiveNumber);
  analyze->add_option("--out", out_dir, "write topology.csv and pl.csv here");

  SyntheticSpec spec;
  auto* gen = app.add_subcommand("gen-synthetic", "stochastic block model dataset");
  gen->add_option("--config", overrides.config_path, "accepted for uniformity; unused");
  gen->add_option("--out", out_dir, "output directory")->required();
  gen->add_option("--nodes", spec.nodes, "node count");
  gen->add_option("--classes", spec.classes, "class count");
  gen->add_option("--p-in", spec.p_in, "intra-class edge probability");
  gen->add_option("--p-out", spec.p_out, "inter-class edge probability");
  gen->add_option("--dim", spec.dim, "feature dimension");
  gen->add_option("--noise", spec.feature_noise, "feature noise in [0, 1]");
  gen->add_option("--seed", spec.seed, "generator seed");

  CLI11_PARSE(app, argc, argv);

  try {
    if (!isa.empty()) {
      bool found = false;
      for (auto candidate : {simd::Isa::scalar, simd::Isa::avx2, simd::Isa::neon}) {
        if (isa == simd::isa_name(candidate)) {
          simd::select_isa(candidate);
          found = true;
        }
      }
      if (!found) throw std::invalid_argument("unknown --isa '" + isa + "'");
    }
    if (*train) return cmd_train(overrides, data_dir, out_dir, runs);
    if (*eval) return cmd_eval(overrides, data_dir, checkpoint);
    if (*exporter) return cmd_export(overrides, data_dir, checkpoint, out_dir);
    if (*analyze) return cmd_analyze(data_dir, max_hops, out_dir);
    if (*gen) {
      const DatasetBundle bundle = generate_synthetic(spec);
      save_dataset(bundle, out_dir);
      fmt::print("wrote {} ({} nodes, {} edges, {} classes)\n", out_dir.string(), bundle.graph.num_nodes(),
                 bundle.graph.num_edges(), bundle.graph.num_classes());
      return 0;
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 1;
}
