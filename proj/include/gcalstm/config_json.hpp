#pragma once

#include <json.hpp>

#include "gcalstm/model.hpp"
#include "gcalstm/synthetic.hpp"
#include "gcalstm/trainer.hpp"

namespace gcalstm {

nlohmann::json model_config_to_json(const ModelConfig& cfg);
ModelConfig model_config_from_json(const nlohmann::json& j);

nlohmann::json synthetic_spec_to_json(const SyntheticSpec& spec);
SyntheticSpec synthetic_spec_from_json(const nlohmann::json& j);

nlohmann::json train_config_to_json(const TrainConfig& cfg);
TrainConfig train_config_from_json(const nlohmann::json& j);

}  // namespace gcalstm
