#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>

#include <fmt/format.h>

#include "dpgnn/io.hpp"

namespace dpgnn {

namespace {

constexpr std::string_view kMagic = "DPGNNCKP";

static_assert(std::endian::native == std::endian::little, "checkpoint encoding assumes a little-endian host");

// FNV-1a over the payload; detects truncation and bit rot.
std::uint64_t fnv1a(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

class Writer {
 public:
  template <typename T>
  void pod(T value) {
    char buf[sizeof(T)];
    std::memcpy(buf, &value, sizeof(T));
    out_.append(buf, sizeof(T));
  }
  void string(std::string_view s) {
    pod<std::uint64_t>(s.size());
    out_.append(s);
  }
  void matrix(std::string_view name, const Matrix& m) {
    string(name);
    pod<std::uint64_t>(m.rows());
    pod<std::uint64_t>(m.cols());
    out_.append(reinterpret_cast<const char*>(m.data()), m.size() * sizeof(double));
  }
  std::string& bytes() { return out_; }

 private:
  std::string out_;
};

class Reader {
 public:
  explicit Reader(std::string_view in) : in_(in) {}

  template <typename T>
  T pod() {
    need(sizeof(T));
    T value;
    std::memcpy(&value, in_.data() + pos_, sizeof(T));
    pos_ += sizeof(T);
    return value;
  }
  std::string string() {
    const auto size = pod<std::uint64_t>();
    need(size);
    std::string s(in_.substr(pos_, size));
    pos_ += size;
    return s;
  }
  Matrix matrix(std::string_view expected_name) {
    const std::string name = string();
    if (name != expected_name) {
      throw CheckpointError(CheckpointError::Kind::corrupt,
                            fmt::format("checkpoint: expected tensor '{}', found '{}'", expected_name, name));
    }
    const auto rows = pod<std::uint64_t>();
    const auto cols = pod<std::uint64_t>();
    if (cols != 0 && rows > (in_.size() - pos_) / sizeof(double) / cols)
      throw CheckpointError(CheckpointError::Kind::corrupt, "checkpoint: tensor larger than file");
    const std::size_t count = rows * cols;
    need(count * sizeof(double));
    std::vector<double> data(count);
    std::memcpy(data.data(), in_.data() + pos_, count * sizeof(double));
    pos_ += count * sizeof(double);
    return Matrix(rows, cols, std::move(data));
  }
  bool done() const { return pos_ == in_.size(); }

 private:
  void need(std::size_t bytes) const {
    if (in_.size() - pos_ < bytes) throw CheckpointError(CheckpointError::Kind::corrupt, "checkpoint: truncated data");
  }

  std::string_view in_;
  std::size_t pos_ = 0;
};

}  // namespace

std::string encode_checkpoint(const Checkpoint& ck) {
  Writer w;
  w.string(serialize_config(ck.config));
  w.pod<std::uint64_t>(ck.best_epoch);
  w.pod<std::uint64_t>(ck.rng_seed);
  w.pod<std::uint64_t>(ck.next_epoch);
  const auto params = ck.params.tensors();
  for (std::size_t t = 0; t < ModelParameters::kTensorCount; ++t) w.matrix(ModelParameters::kNames[t], *params[t]);
  const OptimizerState& opt = ck.optimizer;
  w.pod<std::uint64_t>(opt.step);
  for (double v : {opt.learning_rate, opt.beta1, opt.beta2, opt.epsilon, opt.weight_decay}) w.pod<double>(v);
  for (std::size_t t = 0; t < ModelParameters::kTensorCount; ++t) {
    w.matrix(ModelParameters::kNames[t], opt.first_moment[t]);
    w.matrix(ModelParameters::kNames[t], opt.second_moment[t]);
  }
  const std::string payload = std::move(w.bytes());

  Writer header;
  header.bytes().append(kMagic);
  header.pod<std::uint32_t>(kCheckpointVersion);
  header.bytes().append(payload);
  header.pod<std::uint64_t>(fnv1a(payload));
  return std::move(header.bytes());
}

Checkpoint decode_checkpoint(std::string_view bytes) {
  constexpr std::size_t head = 8 + sizeof(std::uint32_t);
  if (bytes.size() < head + sizeof(std::uint64_t) || bytes.substr(0, kMagic.size()) != kMagic) {
    throw CheckpointError(CheckpointError::Kind::corrupt, "checkpoint: not a checkpoint file (bad magic or truncated)");
  }
  std::uint32_t version = 0;
  std::memcpy(&version, bytes.data() + kMagic.size(), sizeof(version));
  if (version != kCheckpointVersion) {
    throw CheckpointError(CheckpointError::Kind::version,
                          fmt::format("checkpoint: format version {} unsupported (expected {})", version,
                                      kCheckpointVersion));
  }
  const std::string_view payload = bytes.substr(head, bytes.size() - head - sizeof(std::uint64_t));
  std::uint64_t stored_hash = 0;
  std::memcpy(&stored_hash, bytes.data() + bytes.size() - sizeof(stored_hash), sizeof(stored_hash));
  if (fnv1a(payload) != stored_hash) throw CheckpointError(CheckpointError::Kind::corrupt, "checkpoint: checksum mismatch");

  Reader r(payload);
  Checkpoint ck;
  try {
    ck.config = parse_config(r.string());
  } catch (const std::invalid_argument& e) {
    throw CheckpointError(CheckpointError::Kind::corrupt, std::string("checkpoint: bad config: ") + e.what());
  }
  ck.best_epoch = r.pod<std::uint64_t>();
  ck.rng_seed = r.pod<std::uint64_t>();
  ck.next_epoch = r.pod<std::uint64_t>();
  auto params = ck.params.tensors();
  for (std::size_t t = 0; t < ModelParameters::kTensorCount; ++t) *params[t] = r.matrix(ModelParameters::kNames[t]);
  OptimizerState& opt = ck.optimizer;
  opt.step = r.pod<std::uint64_t>();
  opt.learning_rate = r.pod<double>();
  opt.beta1 = r.pod<double>();
  opt.beta2 = r.pod<double>();
  opt.epsilon = r.pod<double>();
  opt.weight_decay = r.pod<double>();
  for (std::size_t t = 0; t < ModelParameters::kTensorCount; ++t) {
    opt.first_moment[t] = r.matrix(ModelParameters::kNames[t]);
    opt.second_moment[t] = r.matrix(ModelParameters::kNames[t]);
  }
  if (!r.done()) throw CheckpointError(CheckpointError::Kind::corrupt, "checkpoint: trailing bytes");
  return ck;
}

void save_checkpoint(const Checkpoint& checkpoint, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw CheckpointError(CheckpointError::Kind::io, "cannot write checkpoint " + path.string());
  const std::string bytes = encode_checkpoint(checkpoint);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw CheckpointError(CheckpointError::Kind::io, "failed writing checkpoint " + path.string());
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CheckpointError(CheckpointError::Kind::io, "cannot open checkpoint " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  try {
    return decode_checkpoint(buffer.str());
  } catch (const CheckpointError& e) {
    throw CheckpointError(e.kind(), path.string() + ": " + e.what());
  }
}

void check_compatible(const Checkpoint& checkpoint, const ModelShape& shape) {
  try {
    checkpoint.params.check_shape(shape);
  } catch (const std::invalid_argument& e) {
    throw CheckpointError(CheckpointError::Kind::shape, std::string("checkpoint does not fit this dataset: ") + e.what());
  }
}

Checkpoint make_checkpoint(const TrainConfig& config, const FitResult& fit) {
  return {config, fit.params, fit.optimizer, fit.best_epoch, config.seed, fit.epochs_run + 1};
}

}  // namespace dpgnn
