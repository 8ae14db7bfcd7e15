#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "gcalstm/attention.hpp"
#include "gcalstm/data.hpp"
#include "gcalstm/model.hpp"

namespace gcalstm {

struct TrainConfig {
  double learning_rate = 1.5e-3;
  double decay_rate = 0.95;  // learning rate multiplier per epoch
  double momentum = 0.9;
  std::size_t batch_size = 16;
  std::size_t max_epochs = 40;  // per training step
  std::size_t patience = 3;     // non-improving epochs before stopping a step
  double clip_norm = 5.0;       // 0 disables gradient clipping
  bool monitor_error_rate = false;  // patience watches error rate instead of loss
  std::uint64_t seed = 1;

  void validate() const;
  double lr_at_epoch(std::size_t epoch) const;
};

struct EpochRecord {
  std::size_t epoch = 0;  // global epoch index
  std::size_t step = 0;   // stepwise training step (0 for direct)
  double lr = 0.0;
  double train_loss = 0.0;
  double val_loss = 0.0;
  double val_accuracy = 0.0;
  double wall_seconds = 0.0;  // excluded from the deterministic report
};

struct TrainReport {
  std::vector<EpochRecord> epochs;
  std::vector<std::size_t> step_boundaries;  // first global epoch of each step
  std::size_t best_epoch = 0;
  double best_val_loss = 0.0;
  double final_test_accuracy = -1.0;  // filled by the caller when a test set exists
  bool diverged = false;

  // Deterministic fields only; wall-clock timings go to save_timing.
  void save(const std::string& path) const;
  void save_timing(const std::string& path) const;
};

struct EvalResult {
  double accuracy = 0.0;
  double mean_loss = 0.0;
  DenseMatrix confusion;  // rows = true class, cols = predicted

  void save(const std::string& path) const;
};

// Evaluation-mode accuracy / confusion / mean loss. Throws ContractError on an
// empty set.
EvalResult evaluate(const Model& model, const std::vector<SkeletonSequence>& sequences);

// Whole-network training: supervises the final context's posterior only.
TrainReport train_direct(Model& model, const std::vector<SkeletonSequence>& train,
                         const std::vector<SkeletonSequence>& validation, const TrainConfig& cfg);

// Incremental training: step n supervises the posterior of context n and
// updates only parameters used through iteration n; a step advances when its
// validation metric stops improving for `patience` epochs.
TrainReport train_stepwise(Model& model, const std::vector<SkeletonSequence>& train,
                           const std::vector<SkeletonSequence>& validation, const TrainConfig& cfg);

// Mean over frames of the attention mass a joint-space map assigns to the
// given joints, each frame's mass normalized by its total. Result in [0, 1].
double attention_mass_on_joints(const AttentionMap& joint_space_map,
                                const std::vector<std::size_t>& joints);

}  // namespace gcalstm
