#pragma once

#include <optional>
#include <string>
#include <vector>

#include "gcalstm/attention.hpp"
#include "gcalstm/data.hpp"
#include "gcalstm/params.hpp"
#include "gcalstm/partition.hpp"
#include "gcalstm/stlstm.hpp"

namespace gcalstm {

// gca            — joint-level (fine-grained) attention, one stream
// gca_coarse     — body-part-level (coarse-grained) attention, one stream
// two_stream     — shared first layer, fine + coarse streams, fused scores
// baseline_global_1 — two plain ST-LSTM layers, feed-forward head over the
//                     concatenated second-layer states
// baseline_global_2 — two plain ST-LSTM layers, classifier on the mean of
//                     second-layer states
enum class ModelVariant { gca, gca_coarse, two_stream, baseline_global_1, baseline_global_2 };

std::string to_string(ModelVariant v);
ModelVariant model_variant_from_string(const std::string& s);

struct ModelConfig {
  ModelVariant variant = ModelVariant::gca;
  std::size_t joints = 15;
  std::size_t frames = 20;
  std::size_t input_dim = 3;
  std::size_t hidden = 128;  // d, also the global context dimension
  std::size_t classes = 8;
  AttentionConfig attention;
  JointOrder joint_order;     // empty order means identity
  BodyPartition partition;    // required by coarse attention
  double dropout = 0.5;
  InitFamily init_family = InitFamily::uniform_scaled;
  double init_gaussian_stddev = 0.1;

  bool has_fine_stream() const;
  bool has_coarse_stream() const;
  bool is_baseline() const;
  void validate() const;
};

// Names of the scoring tensors for one (stream, iteration, step) slot after
// resolving the sharing flags. With share_across_iterations all iterations
// alias one underlying tensor set; without share_within_iteration every grid
// step owns its own set.
struct ScoreSlotNames {
  std::string We1, be1, We2, be2;
};
ScoreSlotNames score_slot_names(const std::string& stream, const AttentionConfig& cfg, std::size_t iteration,
                                std::size_t row, std::size_t col);

// Everything one attention stream produces in a forward pass, kept for the
// backward pass and for inspection.
struct StreamForward {
  std::vector<AttentionMap> maps;                 // iterations 1..n_run
  std::vector<std::vector<Vec>> score_hidden;     // per iteration: tanh(We2 [v; IF]) per grid step
  std::vector<LatticeState> layer2;               // per iteration, gate mode
  std::vector<Vec> contexts;                      // IF^0 .. IF^n_run
  std::vector<Vec> attention_repr;                // F^1 .. F^n_run
  std::vector<Vec> input_mask;                    // dropout masks on layer-2 inputs (empty = none)
  std::vector<Vec> layer2_inputs;                 // masked first-layer hidden states
  std::vector<Vec> part_means;                    // coarse stream: 5*T part representations
  Vec context_mask;                               // dropout mask on the classified context
  Vec dropped_context;
  Vec logits;
  Vec posterior;
};

struct BaselineForward {
  std::vector<Vec> input_mask;
  std::vector<Vec> layer2_inputs;
  LatticeState layer2;
  Vec global_repr;  // mean of layer-2 states, or tanh of the feed-forward head
  Vec context_mask;
  Vec dropped_global;
  Vec logits;
};

struct ModelForward {
  std::vector<Vec> inputs;  // chain-ordered J*T joint coordinates
  LatticeState layer1;
  std::size_t layer1_evals = 0;  // forward passes of the shared first layer
  StreamForward fine;
  StreamForward coarse;
  BaselineForward baseline;
  Vec posterior;  // fused for two_stream, otherwise the single stream's
  std::size_t supervised_iteration = 0;
  bool training = false;
};

// One model instance: configuration plus its parameter store. Forward is
// const; backward accumulates gradients into the store.
class Model {
 public:
  explicit Model(ModelConfig cfg);

  const ModelConfig& config() const { return cfg_; }
  ParamStore& params() { return store_; }
  const ParamStore& params() const { return store_; }

  void init_params(RngStream& rng);

  // `supervise` picks the attention iteration whose context is classified
  // (stepwise training); defaults to N. rng supplies dropout masks and must be
  // present when training with dropout > 0.
  ModelForward forward(const SkeletonSequence& seq, bool training = false, RngStream* rng = nullptr,
                       std::optional<std::size_t> supervise = std::nullopt) const;

  double loss(const ModelForward& fwd, std::size_t label) const;

  // Accumulates gradients of weight * nll(posterior, label) into the store and
  // returns the unweighted loss.
  double backward(const ModelForward& fwd, std::size_t label, double weight = 1.0);

  // Evaluation-mode forward + loss; the deterministic probe used by
  // finite-difference checks.
  double eval_loss(const SkeletonSequence& seq, std::size_t label,
                   std::optional<std::size_t> supervise = std::nullopt) const;

  // Re-expresses a fine attention map (chain positions) in joint-id space.
  AttentionMap map_to_joint_space(const AttentionMap& map) const;

  std::size_t chain_position_of_joint(std::size_t joint) const { return position_of_joint_[joint]; }

 private:
  ModelConfig cfg_;
  ParamStore store_;
  std::vector<std::size_t> position_of_joint_;  // inverse of the joint order
  std::vector<std::size_t> part_of_position_;   // body part per chain position

  void register_params();
  void register_stream_params(const std::string& stream, std::size_t grid_rows);

  std::vector<Vec> chain_inputs(const SkeletonSequence& seq) const;
  Vec initial_context(const LatticeState& layer1) const;

  void run_stream(const std::string& stream, bool coarse, const ModelForward& fwd, StreamForward& out,
                  std::size_t n_run, bool training, RngStream* rng) const;
  void stream_backward(const std::string& stream, bool coarse, const ModelForward& fwd,
                       const StreamForward& sf, const Vec& dposterior, std::vector<Vec>& dh1,
                       Vec& dcontext0);

  void baseline_forward_pass(ModelForward& fwd, bool training, RngStream* rng) const;
  void baseline_backward(const ModelForward& fwd, const Vec& dposterior, std::vector<Vec>& dh1);
};

// -log(max(posterior[label], 1e-12)). Throws ContractError on a bad label.
double nll_loss(const Vec& posterior, std::size_t label);

}  // namespace gcalstm
