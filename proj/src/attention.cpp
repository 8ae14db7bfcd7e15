#include "gcalstm/attention.hpp"

#include "gcalstm/errors.hpp"

namespace gcalstm {

void AttentionConfig::validate() const {
  if (iterations < 1) throw ContractError("AttentionConfig: need at least one attention iteration");
  if (score_hidden < 1) throw ContractError("AttentionConfig: score_hidden must be at least 1");
}

double AttentionMap::sum() const {
  double s = 0.0;
  for (double v : scores.data) s += v;
  return s;
}

std::string to_string(AttentionMode mode) { return mode == AttentionMode::gate ? "gate" : "soft"; }
std::string to_string(InitMode mode) { return mode == InitMode::average ? "average" : "feedforward"; }

AttentionMode attention_mode_from_string(const std::string& s) {
  if (s == "gate") return AttentionMode::gate;
  if (s == "soft") return AttentionMode::soft;
  throw ContractError("unknown attention mode: " + s);
}

InitMode init_mode_from_string(const std::string& s) {
  if (s == "average") return InitMode::average;
  if (s == "feedforward") return InitMode::feedforward;
  throw ContractError("unknown init mode: " + s);
}

}  // namespace gcalstm
