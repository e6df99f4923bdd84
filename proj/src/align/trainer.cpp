#include "bindcore/align/trainer.hpp"

#include <algorithm>
#include <fstream>
#include <numeric>
#include <sstream>

#include <nlohmann/json.hpp>

#include "bindcore/align/checkpoint.hpp"
#include "bindcore/align/loss.hpp"
#include "bindcore/common/error.hpp"
#include "bindcore/eval/retrieval.hpp"
#include "bindcore/num/rng.hpp"

namespace bindcore::align {

using num::Tensor;

void AlignmentConfig::validate() const {
  if (!(temperature > 0.0)) throw ConfigError("temperature must be positive");
  if (batch_size < 2) throw ConfigError("batch_size must be >= 2 (in-batch negatives)");
  if (max_epochs < 0) throw ConfigError("max_epochs must be >= 0");
  if (patience < 1) throw ConfigError("patience must be >= 1");
  if (active_pairs.empty()) throw ConfigError("active_pairs must not be empty");
  for (std::size_t i = 0; i < active_pairs.size(); ++i) {
    for (std::size_t j = i + 1; j < active_pairs.size(); ++j) {
      if (active_pairs[i] == active_pairs[j]) {
        throw ConfigError("active_pairs lists " + chem::pair_kind_name(active_pairs[i]) + " twice");
      }
    }
  }
}

double train_step(JointModel& model, const chem::DataStore& data,
                  std::span<const BatchItem> batch, const AlignmentConfig& config) {
  if (batch.size() < 2) {
    throw ContractError("train_step: batch size " + std::to_string(batch.size()) + " < 2");
  }
  const chem::PairKind kind = batch.front().kind;
  for (const auto& item : batch) {
    if (item.kind != kind) {
      throw ContractError("train_step: mixed pair kinds in one batch (" +
                          chem::pair_kind_name(kind) + " and " + chem::pair_kind_name(item.kind) +
                          ")");
    }
  }
  const auto [left_mod, right_mod] = pair_modalities(kind);
  const int d = model.config.embed_dim;

  num::Tape tape;
  num::TapeScope scope(tape);

  std::vector<Tensor> left_rows, right_rows;
  left_rows.reserve(batch.size());
  for (const auto& item : batch) {
    left_rows.push_back(num::reshape(model.embed_record(left_mod, data, item.entry.left), {1, d}));
    right_rows.push_back(
        num::reshape(model.embed_record(right_mod, data, item.entry.right), {1, d}));
  }
  Tensor x = num::concat(left_rows, 0);
  Tensor y = num::concat(right_rows, 0);

  const bool learnable = config.learnable_temperature && model.log_tau.defined();
  Tensor loss = learnable ? symmetric_loss(x, y, model.log_tau)
                          : symmetric_loss(x, y, config.temperature);
  tape.backward(loss);

  for (chem::Modality mod : {left_mod, right_mod}) {
    auto& state = model.adam_for(mod);
    state.config().lr = config.lr;
    state.step(model.params_for(mod), num::MissingGrad::Skip);
  }
  if (learnable) {
    model.adam_shared.config().lr = config.lr;
    model.adam_shared.step(model.params_shared, num::MissingGrad::Skip);
  }
  if (left_mod == chem::Modality::Conformation || right_mod == chem::Modality::Conformation ||
      right_mod == chem::Modality::Pocket) {
    model.clamp_kernel_sigmas();
  }
  return loss.item();
}

std::string metrics_jsonl(const std::vector<EpochRecord>& log) {
  std::ostringstream out;
  for (const auto& rec : log) {
    nlohmann::json j;
    j["epoch"] = rec.epoch;
    j["pair_kind"] = chem::pair_kind_name(rec.kind);
    j["loss"] = rec.loss;
    j["val_recall_at_1"] = rec.val_recall_at_1;
    out << j.dump() << '\n';
  }
  return out.str();
}

namespace {

// Shuffled pretrain queue for one pair kind; reshuffles whenever exhausted so
// small kinds keep contributing a batch per cycle.
class BatchQueue {
 public:
  BatchQueue(const chem::PairManifest& pretrain, num::Rng rng)
      : entries_(pretrain.entries), rng_(rng) {
    reshuffle();
  }

  std::size_t epoch_batches(int batch_size) const {
    return (entries_.size() + static_cast<std::size_t>(batch_size) - 1) /
           static_cast<std::size_t>(batch_size);
  }

  std::vector<BatchItem> next(chem::PairKind kind, int batch_size) {
    std::vector<BatchItem> batch;
    batch.reserve(static_cast<std::size_t>(batch_size));
    for (int i = 0; i < batch_size; ++i) {
      if (cursor_ >= order_.size()) reshuffle();
      batch.push_back({kind, entries_[order_[cursor_++]]});
    }
    return batch;
  }

 private:
  void reshuffle() {
    order_.resize(entries_.size());
    std::iota(order_.begin(), order_.end(), std::size_t{0});
    num::Rng r = rng_.split(reshuffles_++);
    r.shuffle(order_);
    cursor_ = 0;
  }

  std::vector<chem::PairEntry> entries_;
  std::vector<std::size_t> order_;
  std::size_t cursor_ = 0;
  num::Rng rng_;
  std::uint64_t reshuffles_ = 0;
};

}  // namespace

TrainResult train(JointModel& model, const chem::DataStore& data, const AlignmentConfig& config,
                  const std::optional<std::filesystem::path>& run_dir) {
  config.validate();
  if (config.learnable_temperature && !model.log_tau.defined()) {
    throw ConfigError("learnable_temperature requires a model built with it enabled");
  }
  if (model.config.text.vocab_size != data.vocab().size()) {
    throw ConfigError("model vocabulary size " + std::to_string(model.config.text.vocab_size) +
                      " does not match data vocabulary " + std::to_string(data.vocab().size()));
  }
  for (chem::PairKind kind : config.active_pairs) {
    if (!data.has_kind(kind)) {
      throw DataError("train: no manifest loaded for active pair " + chem::pair_kind_name(kind));
    }
    if (data.manifest(kind).filter(chem::Split::Pretrain).entries.empty()) {
      throw DataError("train: empty pretrain split for " + chem::pair_kind_name(kind));
    }
  }

  std::ofstream metrics;
  if (run_dir) {
    std::filesystem::create_directories(*run_dir);
    metrics.open(*run_dir / "metrics.jsonl", std::ios::trunc);
    if (!metrics) throw DataError("train: cannot write metrics under " + run_dir->string());
  }

  TrainResult result;
  num::Rng root(config.seed);
  double best = -1.0;
  int best_epoch = 0;
  int stale_epochs = 0;
  bool saved_best = false;

  for (int epoch = 1; epoch <= config.max_epochs; ++epoch) {
    num::Rng epoch_rng = root.split("epoch").split(static_cast<std::uint64_t>(epoch));

    std::vector<BatchQueue> queues;
    std::size_t cycles = 0;
    for (std::size_t ki = 0; ki < config.active_pairs.size(); ++ki) {
      const auto pretrain = data.manifest(config.active_pairs[ki]).filter(chem::Split::Pretrain);
      BatchQueue q(pretrain, epoch_rng.split(ki));
      cycles = std::max(cycles, q.epoch_batches(config.batch_size));
      queues.push_back(std::move(q));
    }

    std::vector<double> loss_sums(config.active_pairs.size(), 0.0);
    for (std::size_t cycle = 0; cycle < cycles; ++cycle) {
      for (std::size_t ki = 0; ki < config.active_pairs.size(); ++ki) {
        auto batch = queues[ki].next(config.active_pairs[ki], config.batch_size);
        loss_sums[ki] += train_step(model, data, batch, config);
      }
    }

    double val_sum = 0.0;
    for (std::size_t ki = 0; ki < config.active_pairs.size(); ++ki) {
      EpochRecord rec;
      rec.epoch = epoch;
      rec.kind = config.active_pairs[ki];
      rec.loss = loss_sums[ki] / static_cast<double>(cycles);
      rec.val_recall_at_1 = eval::validation_recall_at_1(model, data, rec.kind);
      val_sum += rec.val_recall_at_1;
      result.log.push_back(rec);
      if (metrics.is_open()) {
        metrics << metrics_jsonl({rec});
        metrics.flush();
      }
    }
    result.epochs_run = epoch;

    const double val_mean = val_sum / static_cast<double>(config.active_pairs.size());
    if (val_mean > best) {
      best = val_mean;
      best_epoch = epoch;
      stale_epochs = 0;
      if (run_dir) {
        save_checkpoint(model, *run_dir / "best.ckpt");
        saved_best = true;
      }
    } else {
      ++stale_epochs;
      if (stale_epochs >= config.patience) break;
    }
  }

  result.best_val = best < 0.0 ? 0.0 : best;
  result.best_epoch = best_epoch;
  if (run_dir) {
    save_checkpoint(model, *run_dir / "last.ckpt");
    if (!saved_best) save_checkpoint(model, *run_dir / "best.ckpt");
  }
  return result;
}

}  // namespace bindcore::align
