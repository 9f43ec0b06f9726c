#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "dpgnn/dataset.hpp"
#include "dpgnn/io.hpp"

namespace dpgnn {

namespace fs = std::filesystem;

void DatasetBundle::validate() const {
  if (features.num_nodes() != graph.num_nodes()) {
    throw std::invalid_argument("dataset " + name + ": " + std::to_string(features.num_nodes()) +
                                " feature rows for " + std::to_string(graph.num_nodes()) + " nodes");
  }
  split.validate(graph.num_nodes());
}

namespace {

class LineReader {
 public:
  explicit LineReader(const fs::path& path) : path_(path), in_(path) {
    if (!in_) throw DatasetError(path.string() + ": missing or unreadable file");
  }

  bool next(std::string& line) {
    while (std::getline(in_, line)) {
      ++line_no_;
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (line.find_first_not_of(" \t") == std::string::npos || line.front() == '#') continue;
      return true;
    }
    return false;
  }

  [[noreturn]] void fail(const std::string& what) const {
    throw DatasetError(fmt::format("{}:{}: {}", path_.string(), line_no_, what));
  }

 private:
  fs::path path_;
  std::ifstream in_;
  std::size_t line_no_ = 0;
};

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t");
  if (first == std::string_view::npos) return {};
  return s.substr(first, s.find_last_not_of(" \t") - first + 1);
}

template <typename T>
bool parse(std::string_view text, T& out) {
  text = trim(text);
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, out);
  return ec == std::errc() && ptr == end && !text.empty();
}

std::vector<std::string_view> split_on(std::string_view line, char sep) {
  std::vector<std::string_view> parts;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(sep, start);
    parts.push_back(line.substr(start, pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return parts;
}

std::vector<std::string_view> split_whitespace(std::string_view line) {
  std::vector<std::string_view> parts;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t')) ++i;
    const std::size_t start = i;
    while (i < line.size() && line[i] != ' ' && line[i] != '\t') ++i;
    if (i > start) parts.push_back(line.substr(start, i - start));
  }
  return parts;
}

}  // namespace

DatasetBundle load_dataset(const fs::path& dir) {
  DatasetBundle bundle;
  bundle.name = dir.filename().string();
  if (bundle.name.empty()) bundle.name = dir.parent_path().filename().string();

  std::string line;
  std::vector<int> labels;
  {
    LineReader reader(dir / "labels.tsv");
    while (reader.next(line)) {
      int label = 0;
      if (!parse(line, label)) reader.fail("expected an integer label");
      if (label < 0) reader.fail("negative label");
      labels.push_back(label);
    }
  }
  const std::size_t n = labels.size();
  if (n == 0) throw DatasetError((dir / "labels.tsv").string() + ": no labels");
  int num_classes = 0;
  for (int label : labels) num_classes = std::max(num_classes, label + 1);
  num_classes = std::max(num_classes, 2);

  std::vector<Edge> edges;
  {
    LineReader reader(dir / "edges.tsv");
    while (reader.next(line)) {
      const auto parts = split_whitespace(line);
      std::size_t i = 0;
      std::size_t j = 0;
      if (parts.size() != 2 || !parse(parts[0], i) || !parse(parts[1], j)) reader.fail("expected 'i<TAB>j'");
      if (i >= n || j >= n) {
        reader.fail(fmt::format("node index {} out of range for {} nodes", std::max(i, j), n));
      }
      edges.emplace_back(i, j);
    }
  }

  Matrix features;
  {
    LineReader reader(dir / "features.csv");
    std::vector<double> values;
    std::size_t rows = 0;
    std::size_t dim = 0;
    while (reader.next(line)) {
      const auto parts = split_on(line, ',');
      if (rows == 0) dim = parts.size();
      if (parts.size() != dim) reader.fail(fmt::format("feature dimension mismatch: {} values, expected {}", parts.size(), dim));
      for (const auto part : parts) {
        double v = 0.0;
        if (!parse(part, v) || !std::isfinite(v)) reader.fail("malformed feature value '" + std::string(part) + "'");
        if (v < 0.0) reader.fail("negative feature value " + std::string(trim(part)) + " (features must be non-negative)");
        values.push_back(v);
      }
      ++rows;
    }
    if (rows != n) {
      throw DatasetError(fmt::format("{}: {} feature rows for {} labeled nodes", (dir / "features.csv").string(), rows, n));
    }
    features = Matrix(rows, dim, std::move(values));
  }

  DataSplit split;
  {
    LineReader reader(dir / "split.tsv");
    std::vector<char> seen(n, 0);
    while (reader.next(line)) {
      const auto parts = split_whitespace(line);
      std::size_t index = 0;
      if (parts.size() != 2 || !parse(parts[0], index)) reader.fail("expected 'index<TAB>train|val|test'");
      if (index >= n) reader.fail(fmt::format("node index {} out of range for {} nodes", index, n));
      if (seen[index]) reader.fail(fmt::format("node {} listed twice", index));
      seen[index] = 1;
      if (parts[1] == "train") split.train.push_back(index);
      else if (parts[1] == "val") split.val.push_back(index);
      else if (parts[1] == "test") split.test.push_back(index);
      else reader.fail("unknown split '" + std::string(parts[1]) + "'");
    }
    if (split.train.empty()) throw DatasetError((dir / "split.tsv").string() + ": no training nodes");
  }

  bundle.graph = LabeledGraph::from_edge_list(n, std::move(edges), std::move(labels), num_classes);
  bundle.features = NodeFeatures(std::move(features));
  bundle.split = std::move(split);
  bundle.validate();
  return bundle;
}

void save_dataset(const DatasetBundle& bundle, const fs::path& dir) {
  fs::create_directories(dir);
  std::string edges;
  for (const auto& [i, j] : bundle.graph.edges()) edges += fmt::format("{}\t{}\n", i, j);
  write_text_file(dir / "edges.tsv", edges);

  std::string labels;
  for (int label : bundle.graph.labels()) labels += fmt::format("{}\n", label);
  write_text_file(dir / "labels.tsv", labels);

  std::string features;
  const Matrix& x = bundle.features.matrix();
  for (std::size_t i = 0; i < x.rows(); ++i) {
    for (std::size_t j = 0; j < x.cols(); ++j) {
      if (j) features += ',';
      features += format_number(x(i, j));
    }
    features += '\n';
  }
  write_text_file(dir / "features.csv", features);

  std::string split;
  for (std::size_t i : bundle.split.train) split += fmt::format("{}\ttrain\n", i);
  for (std::size_t i : bundle.split.val) split += fmt::format("{}\tval\n", i);
  for (std::size_t i : bundle.split.test) split += fmt::format("{}\ttest\n", i);
  write_text_file(dir / "split.tsv", split);
}

}  // namespace dpgnn
