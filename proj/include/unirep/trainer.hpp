#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "unirep/model.hpp"
#include "unirep/optim.hpp"

namespace unirep {

struct TrainConfig {
  ModelConfig model;
  TokenizerConfig tokenizer;
  int epochs = 30;                 // full-scale reference: 25
  int batch_size = 64;             // full-scale reference: 512
  double lr_lm = 1e-3;             // full-scale reference: 2e-5
  double lr_snp = 1e-2;            // full-scale reference: 2e-3
  double weight_decay = 0.0;
  std::uint64_t seed = 1;
  std::set<TaskTag> enabled_tasks = {TaskTag::TermSnp, TaskTag::TermTerm, TaskTag::Synonym};
  std::set<std::string> disabled_sources;  // drop pairs by source label
  LossDirection direction = LossDirection::Symmetric;
  double weight_cap = 2.0;
  double correlation_threshold = 0.05;

  void validate() const;
};

// One scheduled task-homogeneous batch: indices into a dataset's pair list.
struct BatchPlan {
  TaskTag task = TaskTag::TermTerm;
  const PairDataset* dataset = nullptr;
  std::vector<std::size_t> indices;
};

// Per epoch every dataset is shuffled under (seed, epoch, task) and chunked;
// the interleaving draws each next task proportionally to its remaining
// unconsumed pairs. Trailing batches with fewer than 2 pairs are dropped.
std::vector<BatchPlan> schedule_batches(std::span<const PairDataset* const> datasets,
                                        int batch_size, std::uint64_t seed, int epoch);

struct StepRecord {
  long step = 0;
  int epoch = 0;
  TaskTag task = TaskTag::TermTerm;
  double loss = 0.0;
  double inv_tau = 0.0;
};

struct TrainLog {
  std::vector<StepRecord> steps;
  std::vector<double> epoch_mean_loss;  // index 0 = epoch 1

  std::map<TaskTag, long> task_step_counts() const;
  void write_tsv(const std::filesystem::path& path) const;
};

// Assigns stable integer identities to concepts for duplicate-positive
// masking; SNP tails use their vocabulary index.
class ConceptKeyMap {
 public:
  std::int64_t key_for(const std::string& normalized);

 private:
  std::map<std::string, std::int64_t> ids_;
};

TrainingBatch assemble_batch(const BatchPlan& plan, const TokenizerConfig& tok,
                             ConceptKeyMap& keys);

struct TrainResult {
  ModelState model;
  TrainLog log;
};

// Runs the multi-task loop. When `checkpoint_path` is set, the model is
// saved after every epoch (write-temp-then-rename), so a numeric abort
// leaves the last completed epoch on disk.
TrainResult train(const TrainConfig& config, std::span<const PairDataset* const> datasets,
                  const std::optional<std::filesystem::path>& checkpoint_path = std::nullopt,
                  const std::optional<std::filesystem::path>& log_path = std::nullopt);

// Checkpoint: magic "UNIREP\0\1", text header (key=value lines, blank line
// terminator), then float32 arrays in the param_views order, each preceded
// by a little-endian uint64 element count.
void save_checkpoint(const ModelState& model, const std::set<TaskTag>& enabled_tasks,
                     const std::filesystem::path& path);

struct Checkpoint {
  ModelState model;
  std::set<TaskTag> enabled_tasks;
};

Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace unirep
