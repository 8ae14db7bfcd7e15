#pragma once

#include <cstddef>
#include <string>

#include "gcalstm/matrix.hpp"

namespace gcalstm {

// How the attention representation is formed: `gate` feeds the informativeness
// score into the second layer's cell update; `soft` replaces that layer with a
// score-weighted sum of first-layer hidden states.
enum class AttentionMode { gate, soft };

// How the global context memory is initialized from the first layer: mean of
// all hidden states, or a feed-forward map over their concatenation.
enum class InitMode { average, feedforward };

struct AttentionConfig {
  std::size_t iterations = 2;  // N
  bool share_within_iteration = true;
  bool share_across_iterations = false;
  AttentionMode attention_mode = AttentionMode::gate;
  InitMode init_mode = InitMode::feedforward;
  std::size_t score_hidden = 128;  // d_e, width of the scoring map

  void validate() const;
};

// Normalized informativeness scores of one attention iteration. Rows are
// joints (fine stream) or body parts (coarse stream), columns are frames; the
// whole grid sums to 1.
struct AttentionMap {
  std::size_t iteration = 0;  // 1-based
  DenseMatrix scores;

  double sum() const;
};

// The global context memory vector IF, refined across attention iterations.
struct GlobalContext {
  Vec value;
  std::size_t iteration = 0;  // 0 right after initialization
};

std::string to_string(AttentionMode mode);
std::string to_string(InitMode mode);
AttentionMode attention_mode_from_string(const std::string& s);
InitMode init_mode_from_string(const std::string& s);

}  // namespace gcalstm
