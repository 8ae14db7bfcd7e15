#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "gcalstm/rng.hpp"

namespace gcalstm {

// One skeleton sequence: a J x T grid of 3-D joint coordinates (meters) and a
// class label.
struct SkeletonSequence {
  std::string id;
  std::size_t label = 0;
  std::size_t joints = 0;
  std::size_t frames = 0;
  std::vector<double> coords;  // joint-major: (j * frames + t) * 3 + axis

  SkeletonSequence() = default;
  SkeletonSequence(std::string seq_id, std::size_t lbl, std::size_t j, std::size_t t)
      : id(std::move(seq_id)), label(lbl), joints(j), frames(t), coords(j * t * 3, 0.0) {}

  double& at(std::size_t j, std::size_t t, std::size_t axis) {
    return coords[(j * frames + t) * 3 + axis];
  }
  double at(std::size_t j, std::size_t t, std::size_t axis) const {
    return coords[(j * frames + t) * 3 + axis];
  }

  void validate(std::size_t num_classes = 0) const;
};

// Adds independent zero-mean Gaussian noise to every coordinate. sigma is in
// meters; sigma = 0 returns the input bit-identically.
SkeletonSequence add_gaussian_noise(const SkeletonSequence& seq, double sigma, RngStream& rng);

// Translates the sequence so the root joint's position in the first frame is
// the origin. Idempotent; no scaling or rotation.
SkeletonSequence normalize_sequence(const SkeletonSequence& seq, std::size_t root_joint = 0);

// Line-oriented text format: one sequence per line,
//   id label J T <J*T*3 coordinates in joint-major order>
// Coordinates are written with shortest round-trip formatting, so a
// save/load round trip is bit-exact. Parse failures name the line.
std::vector<SkeletonSequence> load_dataset(const std::string& path);
void save_dataset(const std::string& path, const std::vector<SkeletonSequence>& sequences);

// Stratified, disjoint, covering index split; deterministic given the rng.
struct DatasetSplit {
  std::vector<std::size_t> train;
  std::vector<std::size_t> validation;
  std::vector<std::size_t> test;
};

DatasetSplit split_dataset(const std::vector<SkeletonSequence>& sequences,
                           const std::array<double, 3>& fractions, RngStream& rng);

}  // namespace gcalstm
