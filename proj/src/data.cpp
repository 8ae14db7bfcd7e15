#include "gcalstm/data.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include "gcalstm/errors.hpp"

namespace gcalstm {

void SkeletonSequence::validate(std::size_t num_classes) const {
  if (joints == 0 || frames == 0) throw ContractError("sequence '" + id + "': empty grid");
  if (coords.size() != joints * frames * 3) {
    throw ContractError("sequence '" + id + "': coordinate count mismatch");
  }
  for (double v : coords) {
    if (!std::isfinite(v)) throw ContractError("sequence '" + id + "': non-finite coordinate");
  }
  if (num_classes > 0 && label >= num_classes) {
    throw ContractError("sequence '" + id + "': label " + std::to_string(label) + " out of range");
  }
}

SkeletonSequence add_gaussian_noise(const SkeletonSequence& seq, double sigma, RngStream& rng) {
  if (sigma < 0.0) throw ContractError("add_gaussian_noise: negative sigma");
  SkeletonSequence noisy = seq;
  if (sigma == 0.0) return noisy;
  for (double& v : noisy.coords) v += sigma * rng.normal();
  return noisy;
}

SkeletonSequence normalize_sequence(const SkeletonSequence& seq, std::size_t root_joint) {
  if (root_joint >= seq.joints) throw ContractError("normalize_sequence: root joint out of range");
  SkeletonSequence out = seq;
  const double ox = seq.at(root_joint, 0, 0);
  const double oy = seq.at(root_joint, 0, 1);
  const double oz = seq.at(root_joint, 0, 2);
  for (std::size_t j = 0; j < out.joints; ++j) {
    for (std::size_t t = 0; t < out.frames; ++t) {
      out.at(j, t, 0) -= ox;
      out.at(j, t, 1) -= oy;
      out.at(j, t, 2) -= oz;
    }
  }
  return out;
}

namespace {

void append_double(std::string& buf, double v) {
  char tmp[32];
  auto res = std::to_chars(tmp, tmp + sizeof(tmp), v);
  buf.append(tmp, res.ptr);
}

double parse_double(const char*& cursor, const char* end, const std::string& where) {
  while (cursor < end && *cursor == ' ') ++cursor;
  double v = 0.0;
  auto res = std::from_chars(cursor, end, v);
  if (res.ec != std::errc()) throw ParseError(where + ": malformed number");
  cursor = res.ptr;
  if (!std::isfinite(v)) throw ParseError(where + ": non-finite coordinate");
  return v;
}

std::uint64_t parse_count(const char*& cursor, const char* end, const std::string& where) {
  while (cursor < end && *cursor == ' ') ++cursor;
  std::uint64_t v = 0;
  auto res = std::from_chars(cursor, end, v);
  if (res.ec != std::errc()) throw ParseError(where + ": malformed count");
  cursor = res.ptr;
  return v;
}

}  // namespace

std::vector<SkeletonSequence> load_dataset(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open dataset file: " + path);
  std::vector<SkeletonSequence> sequences;
  std::string line;
  std::size_t line_no = 0;
  std::size_t expected_joints = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    const std::string where = path + ":" + std::to_string(line_no);

    std::size_t sp = line.find(' ');
    if (sp == std::string::npos) throw ParseError(where + ": missing fields");
    SkeletonSequence seq;
    seq.id = line.substr(0, sp);

    const char* cursor = line.data() + sp;
    const char* end = line.data() + line.size();
    seq.label = parse_count(cursor, end, where);
    seq.joints = parse_count(cursor, end, where);
    seq.frames = parse_count(cursor, end, where);
    if (seq.joints == 0 || seq.frames == 0) throw ParseError(where + ": empty grid");
    if (expected_joints == 0) {
      expected_joints = seq.joints;
    } else if (seq.joints != expected_joints) {
      throw ParseError(where + ": record '" + seq.id + "' has " + std::to_string(seq.joints) +
                       " joints, file uses " + std::to_string(expected_joints));
    }
    seq.coords.resize(seq.joints * seq.frames * 3);
    try {
      for (double& v : seq.coords) v = parse_double(cursor, end, where + " record '" + seq.id + "'");
    } catch (const ParseError&) {
      throw;
    }
    while (cursor < end && *cursor == ' ') ++cursor;
    if (cursor != end) throw ParseError(where + ": trailing data after record '" + seq.id + "'");
    sequences.push_back(std::move(seq));
  }
  return sequences;
}

void save_dataset(const std::string& path, const std::vector<SkeletonSequence>& sequences) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write dataset file: " + path);
  std::string buf;
  for (const auto& seq : sequences) {
    seq.validate();
    buf.clear();
    buf += seq.id;
    buf += ' ';
    buf += std::to_string(seq.label);
    buf += ' ';
    buf += std::to_string(seq.joints);
    buf += ' ';
    buf += std::to_string(seq.frames);
    for (double v : seq.coords) {
      buf += ' ';
      append_double(buf, v);
    }
    buf += '\n';
    out << buf;
  }
  if (!out) throw IoError("failed writing dataset file: " + path);
}

DatasetSplit split_dataset(const std::vector<SkeletonSequence>& sequences,
                           const std::array<double, 3>& fractions, RngStream& rng) {
  const double total = fractions[0] + fractions[1] + fractions[2];
  if (std::abs(total - 1.0) > 1e-9) throw ContractError("split_dataset: fractions must sum to 1");

  std::map<std::size_t, std::vector<std::size_t>> by_class;
  for (std::size_t i = 0; i < sequences.size(); ++i) by_class[sequences[i].label].push_back(i);

  DatasetSplit split;
  for (auto& [label, indices] : by_class) {
    // Fisher-Yates with the shared stream keeps the split deterministic.
    for (std::size_t i = indices.size(); i > 1; --i) {
      const std::size_t k = rng.next_below(i);
      std::swap(indices[i - 1], indices[k]);
    }
    const std::size_t n = indices.size();
    std::size_t n_train = static_cast<std::size_t>(std::round(fractions[0] * static_cast<double>(n)));
    std::size_t n_val = static_cast<std::size_t>(std::round(fractions[1] * static_cast<double>(n)));
    if (n_train + n_val > n) n_val = n - n_train;
    const std::size_t n_test = n - n_train - n_val;
    if ((fractions[0] > 0 && n_train == 0) || (fractions[1] > 0 && n_val == 0) ||
        (fractions[2] > 0 && n_test == 0)) {
      throw ContractError("split_dataset: class " + std::to_string(label) +
                          " has too few samples for the requested split");
    }
    for (std::size_t i = 0; i < n_train; ++i) split.train.push_back(indices[i]);
    for (std::size_t i = n_train; i < n_train + n_val; ++i) split.validation.push_back(indices[i]);
    for (std::size_t i = n_train + n_val; i < n; ++i) split.test.push_back(indices[i]);
  }
  return split;
}

}  // namespace gcalstm
