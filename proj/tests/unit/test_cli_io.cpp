#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <unistd.h>

#include "dpgnn/io.hpp"

using namespace dpgnn;
namespace fs = std::filesystem;

namespace {

class TempDir {
 public:
  TempDir() {
    static int counter = 0;
    path_ = fs::temp_directory_path() /
            ("dpgnn_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    fs::remove_all(path_);
    fs::create_directories(path_);
  }
  ~TempDir() { fs::remove_all(path_); }
  const fs::path& path() const { return path_; }

 private:
  fs::path path_;
};

void write(const fs::path& p, const std::string& text) {
  std::ofstream(p, std::ios::binary) << text;
}

std::string read(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_tiny(const fs::path& dir) {
  write(dir / "labels.tsv", "0\n1\n1\n");
  write(dir / "edges.tsv", "0\t1\n1\t0\n1\t2\n2\t2\n");
  write(dir / "features.csv", "1,0\n0,1\n0.5,0.5\n");
  write(dir / "split.tsv", "0\ttrain\n1\ttrain\n2\ttest\n");
}

std::string load_error(const fs::path& dir) {
  try {
    load_dataset(dir);
  } catch (const DatasetError& e) {
    return e.what();
  }
  return {};
}

TrainConfig small_config() {
  TrainConfig cfg;
  cfg.max_epochs = 15;
  cfg.hidden_dim = 8;
  cfg.top_k = 4;
  return cfg;
}

DatasetBundle small_dataset(std::uint64_t seed = 0) {
  SyntheticSpec spec;
  spec.nodes = 60;
  spec.classes = 3;
  spec.dim = 9;
  spec.seed = seed;
  return generate_synthetic(spec);
}

}  // namespace

TEST(LoadDataset, WellFormedFixture) {
  TempDir dir;
  write_tiny(dir.path());
  const auto b = load_dataset(dir.path());
  EXPECT_EQ(b.graph.num_nodes(), 3u);
  EXPECT_EQ(b.graph.num_edges(), 2u);
  EXPECT_EQ(b.graph.num_classes(), 2);
  EXPECT_EQ(b.features.dim(), 2u);
  EXPECT_EQ(b.split.train, (std::vector<std::size_t>{0, 1}));
  EXPECT_EQ(b.split.test, (std::vector<std::size_t>{2}));
}

TEST(LoadDataset, DistinctDiagnostics) {
  TempDir dir;
  write_tiny(dir.path());
  write(dir.path() / "edges.tsv", "0\t1\n0\t99\n");
  auto msg = load_error(dir.path());
  EXPECT_NE(msg.find("edges.tsv:2:"), std::string::npos) << msg;
  EXPECT_NE(msg.find("out of range"), std::string::npos) << msg;

  write_tiny(dir.path());
  write(dir.path() / "features.csv", "1,0\n0,-1\n0.5,0.5\n");
  msg = load_error(dir.path());
  EXPECT_NE(msg.find("features.csv:2:"), std::string::npos) << msg;
  EXPECT_NE(msg.find("non-negative"), std::string::npos) << msg;

  write_tiny(dir.path());
  write(dir.path() / "features.csv", "1,0\n0,1,3\n0.5,0.5\n");
  msg = load_error(dir.path());
  EXPECT_NE(msg.find("features.csv:2:"), std::string::npos) << msg;
  EXPECT_NE(msg.find("dimension mismatch"), std::string::npos) << msg;

  write_tiny(dir.path());
  fs::remove(dir.path() / "split.tsv");
  msg = load_error(dir.path());
  EXPECT_NE(msg.find("split.tsv"), std::string::npos) << msg;
  EXPECT_NE(msg.find("missing"), std::string::npos) << msg;

  write_tiny(dir.path());
  write(dir.path() / "split.tsv", "0\ttrain\n1\tholdout\n");
  msg = load_error(dir.path());
  EXPECT_NE(msg.find("split.tsv:2:"), std::string::npos) << msg;
}

TEST(Config, RoundTrip) {
  TrainConfig cfg;
  EXPECT_EQ(parse_config(serialize_config(cfg)), cfg);
  cfg.top_k = 7;
  cfg.hops_topo = 5;
  cfg.hops_feat = 2;
  cfg.samples = 4;
  cfg.temperature = 0.1 + 0.2;
  cfg.lambda = 1.0 / 3.0;
  cfg.dropout = 0.25;
  cfg.learning_rate = 3e-3;
  cfg.weight_decay = 0.0;
  cfg.seed = 0xffffffffffffffffull;
  cfg.aggregator = AggregatorKind::max;
  cfg.mode = PerceptionMode::feature_only;
  EXPECT_EQ(parse_config(serialize_config(cfg)), cfg);
}

TEST(Config, Errors) {
  EXPECT_THROW(parse_config("top_k = 3\nbogus = 1\n"), std::invalid_argument);
  EXPECT_THROW(parse_config("temperature = abc\n"), std::invalid_argument);
  EXPECT_THROW(parse_config("dropout = 1.5\n"), std::invalid_argument);
  try {
    parse_config("# comment\n\nsamples = x\n");
    FAIL();
  } catch (const std::invalid_argument& e) {
    EXPECT_NE(std::string(e.what()).find("line 3"), std::string::npos) << e.what();
  }
  EXPECT_EQ(parse_config("# only a comment\n").samples, TrainConfig{}.samples);
}

TEST(Checkpoint, RoundTripIsByteIdentical) {
  TempDir dir;
  const auto data = small_dataset();
  const auto cfg = small_config();
  const auto result = fit(data, cfg);
  const Checkpoint ck = make_checkpoint(cfg, result);
  save_checkpoint(ck, dir.path() / "a.bin");
  const Checkpoint back = load_checkpoint(dir.path() / "a.bin");
  EXPECT_EQ(back, ck);
  save_checkpoint(back, dir.path() / "b.bin");
  EXPECT_EQ(read(dir.path() / "a.bin"), read(dir.path() / "b.bin"));

  const auto inputs = prepare_inputs(data, cfg);
  const auto test = data.split.test;
  EXPECT_EQ(evaluate_accuracy(inputs, back.params, cfg.forward_config(), data.graph.labels(), test),
            evaluate_accuracy(inputs, result.params, cfg.forward_config(), data.graph.labels(), test));
}

TEST(Checkpoint, CorruptionAndVersionErrors) {
  const auto data = small_dataset();
  const auto cfg = small_config();
  const std::string bytes = encode_checkpoint(make_checkpoint(cfg, fit(data, cfg)));

  auto kind_of = [](std::string_view b) {
    try {
      decode_checkpoint(b);
    } catch (const CheckpointError& e) {
      return e.kind();
    }
    return CheckpointError::Kind::io;
  };
  EXPECT_EQ(kind_of(std::string_view(bytes).substr(0, bytes.size() / 2)), CheckpointError::Kind::corrupt);
  EXPECT_EQ(kind_of(std::string_view(bytes).substr(0, 5)), CheckpointError::Kind::corrupt);
  std::string flipped = bytes;
  flipped[bytes.size() / 2] ^= 0x40;
  EXPECT_EQ(kind_of(flipped), CheckpointError::Kind::corrupt);
  std::string version = bytes;
  version[8] = static_cast<char>(kCheckpointVersion + 1);
  EXPECT_EQ(kind_of(version), CheckpointError::Kind::version);
  EXPECT_EQ(kind_of(bytes + "x"), CheckpointError::Kind::corrupt);

  try {
    load_checkpoint("/nonexistent/dir/ck.bin");
    FAIL();
  } catch (const CheckpointError& e) {
    EXPECT_EQ(e.kind(), CheckpointError::Kind::io);
  }
}

TEST(Checkpoint, ShapeMismatch) {
  const auto data = small_dataset();
  const auto cfg = small_config();
  const Checkpoint ck = make_checkpoint(cfg, fit(data, cfg));
  EXPECT_NO_THROW(check_compatible(ck, model_shape(data, cfg)));

  SyntheticSpec other;
  other.nodes = 80;
  other.classes = 4;
  other.dim = 12;
  try {
    check_compatible(ck, model_shape(generate_synthetic(other), cfg));
    FAIL();
  } catch (const CheckpointError& e) {
    EXPECT_EQ(e.kind(), CheckpointError::Kind::shape);
  }
}

TEST(Synthetic, Properties) {
  SyntheticSpec spec;
  spec.nodes = 200;
  spec.p_out = 0.0;
  const auto pure = generate_synthetic(spec);
  const auto rate = inter_class_rate(shortest_paths_up_to(pure.graph, 1), pure.graph.labels(), 1);
  ASSERT_TRUE(rate.has_value());
  EXPECT_EQ(*rate, 0.0);

  const auto again = generate_synthetic(spec);
  EXPECT_EQ(again.features.matrix(), pure.features.matrix());
  EXPECT_EQ(std::vector<Edge>(again.graph.edges().begin(), again.graph.edges().end()),
            std::vector<Edge>(pure.graph.edges().begin(), pure.graph.edges().end()));
  EXPECT_EQ(again.split.test, pure.split.test);

  for (double v : pure.features.matrix().values()) EXPECT_GE(v, 0.0);
  EXPECT_EQ(pure.split.train.size(), 80u);
}

TEST(Synthetic, LabelIndependentEdgesMatchChance) {
  double sum = 0.0;
  const int seeds = 5;
  for (int s = 0; s < seeds; ++s) {
    SyntheticSpec spec;
    spec.nodes = 500;
    spec.classes = 4;
    spec.p_in = spec.p_out = 0.02;
    spec.seed = static_cast<std::uint64_t>(s);
    const auto b = generate_synthetic(spec);
    sum += *inter_class_rate(shortest_paths_up_to(b.graph, 1), b.graph.labels(), 1);
  }
  EXPECT_NEAR(sum / seeds, 0.75, 0.05 * 0.75);
}

TEST(Synthetic, InvalidSpecs) {
  SyntheticSpec spec;
  spec.p_out = 0.5;
  spec.p_in = 0.1;
  EXPECT_THROW(generate_synthetic(spec), std::invalid_argument);
  spec = {};
  spec.dim = 3;
  EXPECT_THROW(generate_synthetic(spec), std::invalid_argument);
  spec = {};
  spec.nodes = 4;
  EXPECT_THROW(generate_synthetic(spec), std::invalid_argument);
}

TEST(Synthetic, SaveThenLoadValidates) {
  TempDir dir;
  for (std::uint64_t seed : {0u, 1u, 2u}) {
    SyntheticSpec spec;
    spec.nodes = 90;
    spec.classes = 3;
    spec.dim = 7;
    spec.seed = seed;
    const auto b = generate_synthetic(spec);
    save_dataset(b, dir.path());
    const auto back = load_dataset(dir.path());
    EXPECT_NO_THROW(back.validate());
    EXPECT_EQ(back.features.matrix(), b.features.matrix());
    EXPECT_EQ(back.graph.num_edges(), b.graph.num_edges());
    EXPECT_EQ(back.split.val, b.split.val);
  }
}

TEST(Export, FilesAndInvariants) {
  TempDir a, b;
  const auto data = small_dataset(4);
  const auto cfg = small_config();
  const auto result = fit(data, cfg);
  const auto inputs = prepare_inputs(data, cfg);
  export_artifacts(result.params, inputs, cfg.forward_config(), data, a.path());
  export_artifacts(result.params, inputs, cfg.forward_config(), data, b.path());

  for (const char* name : {"embeddings.csv", "attention_topo.csv", "attention_feat.csv", "metrics.csv"}) {
    ASSERT_TRUE(fs::exists(a.path() / name)) << name;
    EXPECT_EQ(read(a.path() / name), read(b.path() / name)) << name;
  }

  std::istringstream emb(read(a.path() / "embeddings.csv"));
  std::string line;
  std::size_t rows = 0;
  std::getline(emb, line);
  while (std::getline(emb, line)) rows += !line.empty();
  EXPECT_EQ(rows, data.graph.num_nodes());

  std::istringstream att(read(a.path() / "attention_topo.csv"));
  std::getline(att, line);
  std::vector<double> sums(data.graph.num_nodes(), 0.0);
  while (std::getline(att, line)) {
    std::size_t node = 0, hop = 0;
    double value = 0.0;
    char c1 = 0, c2 = 0;
    std::istringstream ls(line);
    ls >> node >> c1 >> hop >> c2 >> value;
    sums.at(node) += value;
  }
  for (double s : sums) EXPECT_NEAR(s, 1.0, 1e-6);
}

TEST(Export, NumbersRoundTrip) {
  for (double v : {0.1, 1.0 / 3.0, 1e-300, 12345.678, 0.0}) EXPECT_EQ(std::stod(format_number(v)), v);
}

TEST(Cli, RejectsBadArguments) {
  const std::string cli = DPGNN_CLI_PATH;
  EXPECT_NE(std::system((cli + " train --data /nonexistent/x --out /tmp/never > /dev/null 2>&1").c_str()), 0);
  EXPECT_NE(std::system((cli + " frobnicate > /dev/null 2>&1").c_str()), 0);
}
