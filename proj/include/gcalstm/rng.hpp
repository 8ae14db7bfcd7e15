#pragma once

#include <cstdint>

namespace gcalstm {

// Counter-based splitmix64 stream. Output is a pure function of (seed, position),
// so identical seeds and call sequences reproduce bit-identical values on any
// platform. Distributions are derived with explicit arithmetic; nothing from
// <random> is used because its distributions are implementation-defined.
struct RngStream {
  std::uint64_t seed = 0;
  std::uint64_t position = 0;

  RngStream() = default;
  explicit RngStream(std::uint64_t s) : seed(s) {}

  std::uint64_t next_u64();

  // Uniform in [0, 1), 53-bit resolution.
  double uniform();
  // Uniform in [lo, hi).
  double uniform(double lo, double hi);
  // Standard normal via Box-Muller; consumes exactly two draws.
  double normal();
  // Uniform integer in [0, n). n must be > 0.
  std::uint64_t next_below(std::uint64_t n);

  // Independent stream derived from this stream's seed and a label.
  RngStream fork(std::uint64_t label) const;
};

}  // namespace gcalstm
