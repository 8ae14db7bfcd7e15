#include "gcalstm/config_json.hpp"

#include "gcalstm/errors.hpp"

namespace gcalstm {

using nlohmann::json;

namespace {

template <typename T>
T get_or(const json& j, const char* key, T fallback) {
  if (!j.contains(key)) return fallback;
  return j.at(key).get<T>();
}

}  // namespace

nlohmann::json model_config_to_json(const ModelConfig& cfg) {
  json j;
  j["variant"] = to_string(cfg.variant);
  j["joints"] = cfg.joints;
  j["frames"] = cfg.frames;
  j["input_dim"] = cfg.input_dim;
  j["hidden"] = cfg.hidden;
  j["classes"] = cfg.classes;
  j["dropout"] = cfg.dropout;
  j["init_family"] = cfg.init_family == InitFamily::uniform_scaled ? "uniform_scaled" : "gaussian";
  j["init_gaussian_stddev"] = cfg.init_gaussian_stddev;
  j["joint_order"] = cfg.joint_order.order;

  json att;
  att["iterations"] = cfg.attention.iterations;
  att["share_within_iteration"] = cfg.attention.share_within_iteration;
  att["share_across_iterations"] = cfg.attention.share_across_iterations;
  att["attention_mode"] = to_string(cfg.attention.attention_mode);
  att["init_mode"] = to_string(cfg.attention.init_mode);
  att["score_hidden"] = cfg.attention.score_hidden;
  j["attention"] = att;

  if (cfg.has_coarse_stream()) j["partition"] = cfg.partition.joints_of_part;
  return j;
}

ModelConfig model_config_from_json(const json& j) {
  ModelConfig cfg;
  cfg.variant = model_variant_from_string(j.at("variant").get<std::string>());
  cfg.joints = j.at("joints").get<std::size_t>();
  cfg.frames = j.at("frames").get<std::size_t>();
  cfg.input_dim = get_or<std::size_t>(j, "input_dim", 3);
  cfg.hidden = get_or<std::size_t>(j, "hidden", 128);
  cfg.classes = j.at("classes").get<std::size_t>();
  cfg.dropout = get_or<double>(j, "dropout", 0.5);
  const std::string family = get_or<std::string>(j, "init_family", "uniform_scaled");
  if (family == "uniform_scaled") {
    cfg.init_family = InitFamily::uniform_scaled;
  } else if (family == "gaussian") {
    cfg.init_family = InitFamily::gaussian;
  } else {
    throw ContractError("unknown init family: " + family);
  }
  cfg.init_gaussian_stddev = get_or<double>(j, "init_gaussian_stddev", 0.1);
  if (j.contains("joint_order")) {
    cfg.joint_order.order = j.at("joint_order").get<std::vector<std::size_t>>();
  }

  if (j.contains("attention")) {
    const json& att = j.at("attention");
    cfg.attention.iterations = get_or<std::size_t>(att, "iterations", 2);
    cfg.attention.share_within_iteration = get_or<bool>(att, "share_within_iteration", true);
    cfg.attention.share_across_iterations = get_or<bool>(att, "share_across_iterations", false);
    cfg.attention.attention_mode =
        attention_mode_from_string(get_or<std::string>(att, "attention_mode", "gate"));
    cfg.attention.init_mode = init_mode_from_string(get_or<std::string>(att, "init_mode", "feedforward"));
    cfg.attention.score_hidden = get_or<std::size_t>(att, "score_hidden", cfg.hidden);
  } else {
    cfg.attention.score_hidden = cfg.hidden;
  }

  if (j.contains("partition")) {
    cfg.partition = BodyPartition::from_parts(
        j.at("partition").get<std::vector<std::vector<std::size_t>>>(), cfg.joints);
  } else if (cfg.has_coarse_stream()) {
    cfg.partition = BodyPartition::contiguous(cfg.joints);
  }
  return cfg;
}

nlohmann::json synthetic_spec_to_json(const SyntheticSpec& spec) {
  json j;
  j["joints"] = spec.joints;
  j["frames"] = spec.frames;
  j["distractor_amplitude"] = spec.distractor_amplitude;
  j["noise_sigma"] = spec.noise_sigma;
  j["train_per_class"] = spec.train_per_class;
  j["val_per_class"] = spec.val_per_class;
  j["test_per_class"] = spec.test_per_class;
  j["seed"] = spec.seed;
  json classes = json::array();
  for (const auto& cls : spec.class_specs) {
    json c;
    c["name"] = cls.name;
    c["part_level"] = cls.part_level;
    json motions = json::array();
    for (const auto& m : cls.motions) {
      motions.push_back({{"joint", m.joint},
                         {"amplitude", m.amplitude},
                         {"frequency", m.frequency},
                         {"phase", m.phase},
                         {"axis", m.axis}});
    }
    c["motions"] = motions;
    classes.push_back(c);
  }
  j["classes"] = classes;
  return j;
}

SyntheticSpec synthetic_spec_from_json(const json& j) {
  SyntheticSpec spec = SyntheticSpec::default_spec();
  spec.joints = get_or<std::size_t>(j, "joints", spec.joints);
  spec.frames = get_or<std::size_t>(j, "frames", spec.frames);
  spec.distractor_amplitude = get_or<double>(j, "distractor_amplitude", spec.distractor_amplitude);
  spec.noise_sigma = get_or<double>(j, "noise_sigma", spec.noise_sigma);
  spec.train_per_class = get_or<std::size_t>(j, "train_per_class", spec.train_per_class);
  spec.val_per_class = get_or<std::size_t>(j, "val_per_class", spec.val_per_class);
  spec.test_per_class = get_or<std::size_t>(j, "test_per_class", spec.test_per_class);
  spec.seed = get_or<std::uint64_t>(j, "seed", spec.seed);
  if (j.contains("classes")) {
    spec.class_specs.clear();
    for (const json& c : j.at("classes")) {
      ClassMotionSpec cls;
      cls.name = get_or<std::string>(c, "name", "class" + std::to_string(spec.class_specs.size()));
      cls.part_level = get_or<bool>(c, "part_level", false);
      for (const json& m : c.at("motions")) {
        JointMotion motion;
        motion.joint = m.at("joint").get<std::size_t>();
        motion.amplitude = get_or<double>(m, "amplitude", motion.amplitude);
        motion.frequency = get_or<double>(m, "frequency", motion.frequency);
        motion.phase = get_or<double>(m, "phase", motion.phase);
        if (m.contains("axis")) motion.axis = m.at("axis").get<std::array<double, 3>>();
        cls.motions.push_back(motion);
      }
      spec.class_specs.push_back(std::move(cls));
    }
  }
  return spec;
}

nlohmann::json train_config_to_json(const TrainConfig& cfg) {
  json j;
  j["learning_rate"] = cfg.learning_rate;
  j["decay_rate"] = cfg.decay_rate;
  j["momentum"] = cfg.momentum;
  j["batch_size"] = cfg.batch_size;
  j["max_epochs"] = cfg.max_epochs;
  j["patience"] = cfg.patience;
  j["clip_norm"] = cfg.clip_norm;
  j["monitor_error_rate"] = cfg.monitor_error_rate;
  j["seed"] = cfg.seed;
  return j;
}

TrainConfig train_config_from_json(const json& j) {
  TrainConfig cfg;
  cfg.learning_rate = get_or<double>(j, "learning_rate", cfg.learning_rate);
  cfg.decay_rate = get_or<double>(j, "decay_rate", cfg.decay_rate);
  cfg.momentum = get_or<double>(j, "momentum", cfg.momentum);
  cfg.batch_size = get_or<std::size_t>(j, "batch_size", cfg.batch_size);
  cfg.max_epochs = get_or<std::size_t>(j, "max_epochs", cfg.max_epochs);
  cfg.patience = get_or<std::size_t>(j, "patience", cfg.patience);
  cfg.clip_norm = get_or<double>(j, "clip_norm", cfg.clip_norm);
  cfg.monitor_error_rate = get_or<bool>(j, "monitor_error_rate", cfg.monitor_error_rate);
  cfg.seed = get_or<std::uint64_t>(j, "seed", cfg.seed);
  return cfg;
}

}  // namespace gcalstm
