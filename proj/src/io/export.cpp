#include <algorithm>
#include <fstream>

#include <fmt/format.h>

#include "dpgnn/io.hpp"
#include "dpgnn/softmax.hpp"

namespace dpgnn {

namespace fs = std::filesystem;

std::string format_number(double value) { return fmt::format("{}", value); }

void write_text_file(const fs::path& path, std::string_view content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!out) throw std::runtime_error("failed writing " + path.string());
}

void write_history_csv(std::span<const EpochRecord> history, const fs::path& path) {
  std::string out = "epoch,sup_loss,unsup_loss,total_loss,train_acc,val_acc\n";
  for (const auto& r : history) {
    out += fmt::format("{},{},{},{},{},{}\n", r.epoch, format_number(r.loss.sup), format_number(r.loss.unsup),
                       format_number(r.loss.total), format_number(r.train_accuracy), format_number(r.val_accuracy));
  }
  write_text_file(path, out);
}

void write_topology_report(const TopologyReport& report, const fs::path& dir) {
  fs::create_directories(dir);
  std::string metrics = "metric,value\n";
  metrics += fmt::format("nodes,{}\n", report.nodes);
  metrics += fmt::format("edges,{}\n", report.edges);
  metrics += fmt::format("average_degree,{}\n", format_number(report.average_degree));
  metrics += fmt::format("components,{}\n", report.component_count());
  metrics += fmt::format("largest_component,{}\n", report.component_sizes.empty() ? 0 : report.component_sizes.front());
  metrics += fmt::format("isolated_nodes,{}\n",
                         std::count(report.component_sizes.begin(), report.component_sizes.end(), std::size_t{1}));
  metrics += fmt::format("max_hops,{}\n", report.max_hops);
  metrics += fmt::format("unreachable_pairs,{}\n", report.unreachable_pairs);
  write_text_file(dir / "topology.csv", metrics);

  std::string table = "hops,pairs,inter_class,p_l\n";
  for (const auto& c : report.per_hop) {
    const auto rate = c.rate();
    table += fmt::format("{},{},{},{}\n", c.hops, c.pairs, c.inter_class, rate ? format_number(*rate) : "undefined");
  }
  write_text_file(dir / "pl.csv", table);
}

namespace {

std::string attention_csv(const Matrix& logits) {
  const Matrix attention = softmax_rows(logits);
  std::string out = "node,hop,attention\n";
  for (std::size_t i = 0; i < attention.rows(); ++i)
    for (std::size_t l = 0; l < attention.cols(); ++l) out += fmt::format("{},{},{}\n", i, l, format_number(attention(i, l)));
  return out;
}

}  // namespace

ExportSummary export_artifacts(const ModelParameters& params, const ModelInputs& inputs, const ForwardConfig& config,
                               const DatasetBundle& data, const fs::path& dir) {
  fs::create_directories(dir);
  const Matrix z = predict(inputs, params, config);
  const auto labels = data.graph.labels();

  std::string embeddings = "node";
  for (std::size_t c = 0; c < z.cols(); ++c) embeddings += fmt::format(",z{}", c);
  embeddings += ",label\n";
  for (std::size_t i = 0; i < z.rows(); ++i) {
    embeddings += fmt::format("{}", i);
    for (double v : z.row(i)) embeddings += "," + format_number(v);
    embeddings += fmt::format(",{}\n", labels[i]);
  }
  write_text_file(dir / "embeddings.csv", embeddings);
  write_text_file(dir / "attention_topo.csv", attention_csv(params.hop_topo));
  write_text_file(dir / "attention_feat.csv", attention_csv(params.hop_feat));

  ExportSummary summary;
  summary.train_accuracy = accuracy(z, labels, data.split.train);
  std::string metrics = "metric,value\n";
  metrics += fmt::format("train_accuracy,{}\n", format_number(summary.train_accuracy));
  if (!data.split.val.empty()) {
    summary.val_accuracy = accuracy(z, labels, data.split.val);
    metrics += fmt::format("val_accuracy,{}\n", format_number(summary.val_accuracy));
  }
  if (!data.split.test.empty()) {
    summary.test_accuracy = accuracy(z, labels, data.split.test);
    metrics += fmt::format("test_accuracy,{}\n", format_number(summary.test_accuracy));
  }
  write_text_file(dir / "metrics.csv", metrics);
  return summary;
}

}  // namespace dpgnn
