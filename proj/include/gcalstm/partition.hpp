#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace gcalstm {

inline constexpr std::size_t kBodyPartCount = 5;

// Assignment of every joint to one of exactly five body parts
// (torso plus four limbs). Parts are never empty.
struct BodyPartition {
  std::vector<std::size_t> part_of_joint;            // size J, values in [0, 5)
  std::vector<std::vector<std::size_t>> joints_of_part;  // 5 lists, ascending joint ids

  std::size_t joints() const { return part_of_joint.size(); }
  void validate(std::size_t joints) const;

  // Five contiguous blocks of J/5 joints (J must be divisible by 5).
  static BodyPartition contiguous(std::size_t joints);
  static BodyPartition from_parts(std::vector<std::vector<std::size_t>> parts, std::size_t joints);

  // Plain text, one line per part listing joint indices.
  static BodyPartition load(const std::string& path, std::size_t joints);
  void save(const std::string& path) const;
};

}  // namespace gcalstm
