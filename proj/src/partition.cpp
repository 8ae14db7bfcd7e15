#include "gcalstm/partition.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "gcalstm/errors.hpp"

namespace gcalstm {

void BodyPartition::validate(std::size_t joints) const {
  if (part_of_joint.size() != joints) {
    throw ContractError("BodyPartition: covers " + std::to_string(part_of_joint.size()) +
                        " joints, expected " + std::to_string(joints));
  }
  if (joints_of_part.size() != kBodyPartCount) {
    throw ContractError("BodyPartition: has " + std::to_string(joints_of_part.size()) +
                        " parts, expected exactly " + std::to_string(kBodyPartCount));
  }
  std::vector<bool> seen(joints, false);
  for (std::size_t p = 0; p < kBodyPartCount; ++p) {
    if (joints_of_part[p].empty()) {
      throw ContractError("BodyPartition: part " + std::to_string(p) + " is empty");
    }
    for (std::size_t j : joints_of_part[p]) {
      if (j >= joints || seen[j] || part_of_joint[j] != p) {
        throw ContractError("BodyPartition: joint " + std::to_string(j) +
                            " is not assigned to exactly one part");
      }
      seen[j] = true;
    }
  }
  for (std::size_t j = 0; j < joints; ++j) {
    if (!seen[j]) throw ContractError("BodyPartition: joint " + std::to_string(j) + " unassigned");
  }
}

BodyPartition BodyPartition::contiguous(std::size_t joints) {
  if (joints < kBodyPartCount || joints % kBodyPartCount != 0) {
    throw ContractError("BodyPartition::contiguous: joint count " + std::to_string(joints) +
                        " is not divisible into " + std::to_string(kBodyPartCount) + " equal parts");
  }
  std::vector<std::vector<std::size_t>> parts(kBodyPartCount);
  const std::size_t per = joints / kBodyPartCount;
  for (std::size_t j = 0; j < joints; ++j) parts[j / per].push_back(j);
  return from_parts(std::move(parts), joints);
}

BodyPartition BodyPartition::from_parts(std::vector<std::vector<std::size_t>> parts, std::size_t joints) {
  BodyPartition partition;
  partition.joints_of_part = std::move(parts);
  partition.part_of_joint.assign(joints, kBodyPartCount);
  for (std::size_t p = 0; p < partition.joints_of_part.size(); ++p) {
    std::sort(partition.joints_of_part[p].begin(), partition.joints_of_part[p].end());
    for (std::size_t j : partition.joints_of_part[p]) {
      if (j >= joints) throw ContractError("BodyPartition: joint index " + std::to_string(j) + " out of range");
      partition.part_of_joint[j] = p;
    }
  }
  partition.validate(joints);
  return partition;
}

BodyPartition BodyPartition::load(const std::string& path, std::size_t joints) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open partition file: " + path);
  std::vector<std::vector<std::size_t>> parts;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ss(line);
    std::vector<std::size_t> joints_in_part;
    long long j = 0;
    while (ss >> j) {
      if (j < 0) throw ParseError(path + ":" + std::to_string(line_no) + ": negative joint index");
      joints_in_part.push_back(static_cast<std::size_t>(j));
    }
    if (!ss.eof()) throw ParseError(path + ":" + std::to_string(line_no) + ": malformed joint index");
    parts.push_back(std::move(joints_in_part));
  }
  return from_parts(std::move(parts), joints);
}

void BodyPartition::save(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write partition file: " + path);
  for (const auto& part : joints_of_part) {
    for (std::size_t i = 0; i < part.size(); ++i) {
      if (i) out << ' ';
      out << part[i];
    }
    out << '\n';
  }
}

}  // namespace gcalstm
