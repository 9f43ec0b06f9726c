#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>

#include "dpgnn/analysis.hpp"
#include "dpgnn/dataset.hpp"
#include "dpgnn/model.hpp"
#include "dpgnn/train.hpp"

namespace dpgnn {

// ---- configuration --------------------------------------------------------

/// key=value lines, one per TrainConfig field, '#' starts a comment.
std::string serialize_config(const TrainConfig& config);
/// Unknown keys and malformed values throw std::invalid_argument naming the
/// line. Missing keys keep their defaults. The result is validated.
TrainConfig parse_config(std::string_view text);
TrainConfig load_config(const std::filesystem::path& path);
void save_config(const TrainConfig& config, const std::filesystem::path& path);
/// Applies a single key=value assignment to `config`.
void apply_config_value(TrainConfig& config, std::string_view key, std::string_view value);

// ---- checkpoints ----------------------------------------------------------

struct Checkpoint {
  TrainConfig config;
  ModelParameters params;
  OptimizerState optimizer;
  std::uint64_t best_epoch = 0;
  /// Random state: every stream derives from (seed, epoch, member), so the
  /// run seed and the next epoch index fully determine it.
  std::uint64_t rng_seed = 0;
  std::uint64_t next_epoch = 1;

  friend bool operator==(const Checkpoint&, const Checkpoint&) = default;
};

class CheckpointError : public std::runtime_error {
 public:
  enum class Kind { io, corrupt, version, shape };
  CheckpointError(Kind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  Kind kind() const noexcept { return kind_; }

 private:
  Kind kind_;
};

inline constexpr std::uint32_t kCheckpointVersion = 1;

std::string encode_checkpoint(const Checkpoint& checkpoint);
Checkpoint decode_checkpoint(std::string_view bytes);
void save_checkpoint(const Checkpoint& checkpoint, const std::filesystem::path& path);
Checkpoint load_checkpoint(const std::filesystem::path& path);
/// Throws CheckpointError(Kind::shape) when the stored tensors do not fit `shape`.
void check_compatible(const Checkpoint& checkpoint, const ModelShape& shape);

Checkpoint make_checkpoint(const TrainConfig& config, const FitResult& fit);

// ---- CSV outputs ----------------------------------------------------------

/// Shortest round-trip decimal form; the same double always prints the same bytes.
std::string format_number(double value);

/// epoch,sup_loss,unsup_loss,total_loss,train_acc,val_acc
void write_history_csv(std::span<const EpochRecord> history, const std::filesystem::path& path);

/// topology.csv (metric,value) and pl.csv (hops,pairs,inter_class,p_l).
void write_topology_report(const TopologyReport& report, const std::filesystem::path& dir);

struct ExportSummary {
  double train_accuracy = 0.0;
  double val_accuracy = 0.0;
  double test_accuracy = 0.0;
};

/// embeddings.csv (node, z_0..z_{C-1}, label), attention_topo.csv and
/// attention_feat.csv (node, hop, attention), metrics.csv (metric, value).
ExportSummary export_artifacts(const ModelParameters& params, const ModelInputs& inputs, const ForwardConfig& config,
                               const DatasetBundle& data, const std::filesystem::path& dir);

/// Writes `content` to `path`, throwing std::runtime_error with the path on failure.
void write_text_file(const std::filesystem::path& path, std::string_view content);

}  // namespace dpgnn
