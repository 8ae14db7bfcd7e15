#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "gcalstm/data.hpp"
#include "gcalstm/partition.hpp"

namespace gcalstm {

// Oscillation applied to one informative joint.
struct JointMotion {
  std::size_t joint = 0;
  double amplitude = 0.25;            // meters
  double frequency = 2.0;             // cycles over the whole sequence
  double phase = 0.0;                 // radians, relative to the sequence phase
  std::array<double, 3> axis{1, 0, 0};
};

// One action class: the informative joints and their motion templates.
// Distractor joints get shared low-amplitude motion with per-sequence
// random axis/frequency/phase, so they carry no class signal.
struct ClassMotionSpec {
  std::string name;
  std::vector<JointMotion> motions;
  bool part_level = false;  // informative set is a whole body part

  std::vector<std::size_t> informative_joints() const;
};

struct SyntheticSpec {
  std::size_t joints = 15;
  std::size_t frames = 20;
  std::vector<ClassMotionSpec> class_specs;
  double distractor_amplitude = 0.08;  // meters; must stay below informative amplitudes
  double noise_sigma = 0.01;           // meters
  std::size_t train_per_class = 100;
  std::size_t val_per_class = 25;
  std::size_t test_per_class = 25;
  std::uint64_t seed = 7;

  std::size_t classes() const { return class_specs.size(); }
  void validate() const;

  // J=15, T=20, C=8: four classes keyed to two informative joints in
  // different body parts, four keyed to coherent whole-part motion.
  static SyntheticSpec default_spec();
};

struct SyntheticDataset {
  std::vector<SkeletonSequence> train;
  std::vector<SkeletonSequence> validation;
  std::vector<SkeletonSequence> test;
  BodyPartition partition;
  std::vector<std::vector<std::size_t>> informative_joints;  // per class, ground truth
};

// Pure function of the spec (including its seed): identical specs produce
// bit-identical datasets.
SyntheticDataset generate_synthetic(const SyntheticSpec& spec);

// Ground-truth informative sets, one line per class: "class <c> joints <j...>".
void save_ground_truth(const std::string& path, const std::vector<std::vector<std::size_t>>& sets);
std::vector<std::vector<std::size_t>> load_ground_truth(const std::string& path);

}  // namespace gcalstm
