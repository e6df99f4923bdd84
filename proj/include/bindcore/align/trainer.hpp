#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <vector>

#include "bindcore/align/model.hpp"
#include "bindcore/chem/datastore.hpp"

namespace bindcore::align {

struct AlignmentConfig {
  double temperature = 1.0;
  int batch_size = 16;
  int max_epochs = 100;
  double lr = 1e-3;
  std::vector<chem::PairKind> active_pairs{chem::kAllPairKinds.begin(), chem::kAllPairKinds.end()};
  int patience = 10;  // epochs without validation improvement before stopping
  std::uint64_t seed = 1;
  bool learnable_temperature = false;

  void validate() const;
};

struct BatchItem {
  chem::PairKind kind;
  chem::PairEntry entry;
};

// One optimization step on a homogeneous batch: encode both sides, symmetric
// contrastive loss, backprop, one Adam step per parameter set the loss
// reached. Returns the loss value.
double train_step(JointModel& model, const chem::DataStore& data,
                  std::span<const BatchItem> batch, const AlignmentConfig& config);

struct EpochRecord {
  int epoch = 0;  // 1-based
  chem::PairKind kind;
  double loss = 0.0;
  double val_recall_at_1 = 0.0;
};

struct TrainResult {
  std::vector<EpochRecord> log;
  double best_val = 0.0;
  int best_epoch = 0;  // 0 when no epoch ran
  int epochs_run = 0;
};

std::string metrics_jsonl(const std::vector<EpochRecord>& log);

// Round-robin multi-pair training: one batch of every active kind per cycle,
// smaller kinds recycling (reshuffled) within the epoch. Early-stops when the
// mean validation R@1 over active kinds stops improving. With a run_dir,
// writes metrics.jsonl plus best.ckpt / last.ckpt.
TrainResult train(JointModel& model, const chem::DataStore& data, const AlignmentConfig& config,
                  const std::optional<std::filesystem::path>& run_dir = std::nullopt);

}  // namespace bindcore::align
