#include "gcalstm/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "gcalstm/errors.hpp"

namespace gcalstm {

namespace {

constexpr double kTwoPi = 2.0 * 3.14159265358979323846;

// Rough standing pose, ~1.7 m tall, five parts of three joints:
// torso (hip, spine, head), left arm, right arm, left leg, right leg.
constexpr std::array<std::array<double, 3>, 15> kBasePose15 = {{
    {0.00, 0.90, 0.00},   // 0  hip center
    {0.00, 1.25, 0.00},   // 1  spine
    {0.00, 1.60, 0.00},   // 2  head
    {0.20, 1.45, 0.00},   // 3  left shoulder
    {0.45, 1.45, 0.00},   // 4  left elbow
    {0.70, 1.45, 0.00},   // 5  left wrist
    {-0.20, 1.45, 0.00},  // 6  right shoulder
    {-0.45, 1.45, 0.00},  // 7  right elbow
    {-0.70, 1.45, 0.00},  // 8  right wrist
    {0.12, 0.85, 0.00},   // 9  left hip
    {0.12, 0.45, 0.00},   // 10 left knee
    {0.12, 0.05, 0.00},   // 11 left ankle
    {-0.12, 0.85, 0.00},  // 12 right hip
    {-0.12, 0.45, 0.00},  // 13 right knee
    {-0.12, 0.05, 0.00},  // 14 right ankle
}};

std::array<double, 3> base_position(std::size_t joint, std::size_t joints) {
  if (joints == 15) return kBasePose15[joint];
  // Generic fallback: joints spread over a vertical spiral of body height.
  const double a = 0.7 * static_cast<double>(joint);
  const double frac = joints > 1 ? static_cast<double>(joint) / static_cast<double>(joints - 1) : 0.0;
  return {0.3 * std::sin(a), 0.05 + 1.55 * frac, 0.3 * std::cos(a)};
}

std::array<double, 3> random_unit_axis(RngStream& rng) {
  double x = rng.normal();
  double y = rng.normal();
  double z = rng.normal();
  double n = std::sqrt(x * x + y * y + z * z);
  if (n < 1e-12) return {1.0, 0.0, 0.0};
  return {x / n, y / n, z / n};
}

SkeletonSequence render_sequence(const SyntheticSpec& spec, std::size_t label, std::string id,
                                 RngStream rng) {
  const std::size_t J = spec.joints;
  const std::size_t T = spec.frames;
  SkeletonSequence seq(std::move(id), label, J, T);

  // Per-sequence randomness shared by the informative motions.
  const double tx = rng.uniform(-0.5, 0.5);
  const double ty = rng.uniform(-0.5, 0.5);
  const double tz = rng.uniform(-0.5, 0.5);
  const double phase = rng.uniform(0.0, kTwoPi);
  const double freq_jitter = rng.uniform(0.9, 1.1);

  const ClassMotionSpec& cls = spec.class_specs[label];
  std::vector<const JointMotion*> motion_of_joint(J, nullptr);
  for (const JointMotion& m : cls.motions) motion_of_joint[m.joint] = &m;

  for (std::size_t j = 0; j < J; ++j) {
    const auto base = base_position(j, J);
    if (const JointMotion* m = motion_of_joint[j]) {
      for (std::size_t t = 0; t < T; ++t) {
        const double arg = kTwoPi * m->frequency * freq_jitter * static_cast<double>(t) /
                               static_cast<double>(T) +
                           phase + m->phase;
        const double s = m->amplitude * std::sin(arg);
        seq.at(j, t, 0) = base[0] + tx + s * m->axis[0];
        seq.at(j, t, 1) = base[1] + ty + s * m->axis[1];
        seq.at(j, t, 2) = base[2] + tz + s * m->axis[2];
      }
    } else {
      const auto axis = random_unit_axis(rng);
      const double f = rng.uniform(0.5, 2.5);
      const double ph = rng.uniform(0.0, kTwoPi);
      for (std::size_t t = 0; t < T; ++t) {
        const double arg = kTwoPi * f * static_cast<double>(t) / static_cast<double>(T) + ph;
        const double s = spec.distractor_amplitude * std::sin(arg);
        seq.at(j, t, 0) = base[0] + tx + s * axis[0];
        seq.at(j, t, 1) = base[1] + ty + s * axis[1];
        seq.at(j, t, 2) = base[2] + tz + s * axis[2];
      }
    }
  }

  if (spec.noise_sigma > 0.0) {
    for (double& v : seq.coords) v += spec.noise_sigma * rng.normal();
  }
  return seq;
}

}  // namespace

std::vector<std::size_t> ClassMotionSpec::informative_joints() const {
  std::set<std::size_t> joints;
  for (const JointMotion& m : motions) joints.insert(m.joint);
  return {joints.begin(), joints.end()};
}

void SyntheticSpec::validate() const {
  if (joints == 0 || frames == 0) throw ContractError("SyntheticSpec: empty grid");
  if (class_specs.size() < 2) throw ContractError("SyntheticSpec: need at least 2 classes");
  if (distractor_amplitude < 0.0) throw ContractError("SyntheticSpec: negative distractor amplitude");
  if (noise_sigma < 0.0) throw ContractError("SyntheticSpec: negative noise sigma");
  for (std::size_t c = 0; c < class_specs.size(); ++c) {
    const auto& cls = class_specs[c];
    if (cls.motions.empty()) {
      throw ContractError("SyntheticSpec: class " + std::to_string(c) + " has no informative joints");
    }
    for (const JointMotion& m : cls.motions) {
      if (m.joint >= joints) {
        throw ContractError("SyntheticSpec: class " + std::to_string(c) + " references joint " +
                            std::to_string(m.joint) + " out of range");
      }
      if (m.amplitude <= 0.0) throw ContractError("SyntheticSpec: non-positive motion amplitude");
      if (m.amplitude <= distractor_amplitude) {
        throw ContractError("SyntheticSpec: informative amplitude must exceed distractor amplitude");
      }
    }
  }
}

SyntheticSpec SyntheticSpec::default_spec() {
  SyntheticSpec spec;

  auto fine = [](std::string name, std::size_t j1, std::array<double, 3> ax1, std::size_t j2,
                 std::array<double, 3> ax2) {
    ClassMotionSpec cls;
    cls.name = std::move(name);
    cls.motions.push_back({j1, 0.25, 2.0, 0.0, ax1});
    cls.motions.push_back({j2, 0.25, 2.0, 1.3, ax2});
    return cls;
  };
  // Informative pairs span two different body parts.
  spec.class_specs.push_back(fine("lwrist_rankle", 5, {1, 0, 0}, 14, {0, 0, 1}));
  spec.class_specs.push_back(fine("rwrist_lankle", 8, {1, 0, 0}, 11, {0, 0, 1}));
  spec.class_specs.push_back(fine("head_relbow", 2, {0, 0, 1}, 7, {0, 1, 0}));
  spec.class_specs.push_back(fine("lelbow_rknee", 4, {0, 1, 0}, 13, {1, 0, 0}));

  auto coarse = [](std::string name, std::size_t first_joint, std::array<double, 3> ax) {
    ClassMotionSpec cls;
    cls.name = std::move(name);
    cls.part_level = true;
    // Coherent swing with distal joints moving more.
    cls.motions.push_back({first_joint, 0.12, 1.5, 0.0, ax});
    cls.motions.push_back({first_joint + 1, 0.20, 1.5, 0.0, ax});
    cls.motions.push_back({first_joint + 2, 0.28, 1.5, 0.0, ax});
    return cls;
  };
  spec.class_specs.push_back(coarse("larm_swing", 3, {0, 0, 1}));
  spec.class_specs.push_back(coarse("rarm_swing", 6, {0, 0, 1}));
  spec.class_specs.push_back(coarse("lleg_swing", 9, {1, 0, 0}));
  spec.class_specs.push_back(coarse("rleg_swing", 12, {1, 0, 0}));

  return spec;
}

SyntheticDataset generate_synthetic(const SyntheticSpec& spec) {
  spec.validate();
  SyntheticDataset dataset;
  dataset.partition = BodyPartition::contiguous(spec.joints);
  for (const auto& cls : spec.class_specs) {
    dataset.informative_joints.push_back(cls.informative_joints());
  }

  RngStream master(spec.seed);
  struct SplitPlan {
    const char* tag;
    std::size_t count;
    std::vector<SkeletonSequence>* out;
    std::uint64_t stream;
  };
  const SplitPlan plans[] = {
      {"train", spec.train_per_class, &dataset.train, 1},
      {"val", spec.val_per_class, &dataset.validation, 2},
      {"test", spec.test_per_class, &dataset.test, 3},
  };
  for (const auto& plan : plans) {
    for (std::size_t c = 0; c < spec.classes(); ++c) {
      for (std::size_t k = 0; k < plan.count; ++k) {
        std::ostringstream id;
        id << plan.tag << "_c" << c << "_" << k;
        RngStream rng = master.fork(plan.stream * 1000003ULL + c * 1009ULL + k);
        plan.out->push_back(render_sequence(spec, c, id.str(), rng));
      }
    }
  }
  return dataset;
}

void save_ground_truth(const std::string& path, const std::vector<std::vector<std::size_t>>& sets) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write ground-truth file: " + path);
  for (std::size_t c = 0; c < sets.size(); ++c) {
    out << "class " << c << " joints";
    for (std::size_t j : sets[c]) out << ' ' << j;
    out << '\n';
  }
}

std::vector<std::vector<std::size_t>> load_ground_truth(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open ground-truth file: " + path);
  std::vector<std::vector<std::size_t>> sets;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ss(line);
    std::string kw1, kw2;
    std::size_t cls = 0;
    if (!(ss >> kw1 >> cls >> kw2) || kw1 != "class" || kw2 != "joints") {
      throw ParseError(path + ":" + std::to_string(line_no) + ": expected 'class <c> joints <j...>'");
    }
    if (cls != sets.size()) {
      throw ParseError(path + ":" + std::to_string(line_no) + ": classes out of order");
    }
    std::vector<std::size_t> joints;
    std::size_t j = 0;
    while (ss >> j) joints.push_back(j);
    if (joints.empty()) throw ParseError(path + ":" + std::to_string(line_no) + ": empty informative set");
    sets.push_back(std::move(joints));
  }
  return sets;
}

}  // namespace gcalstm
