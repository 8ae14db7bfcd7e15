#include "gcalstm/rng.hpp"

#include <cmath>

#include "gcalstm/errors.hpp"

namespace gcalstm {

namespace {

std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace

std::uint64_t RngStream::next_u64() {
  const std::uint64_t z = seed + (++position) * 0x9e3779b97f4a7c15ULL;
  return mix64(z);
}

double RngStream::uniform() {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double RngStream::uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

double RngStream::normal() {
  const double u1 = uniform();
  const double u2 = uniform();
  // 1 - u1 lies in (0, 1], keeping the log argument positive.
  return std::sqrt(-2.0 * std::log(1.0 - u1)) * std::cos(2.0 * 3.14159265358979323846 * u2);
}

std::uint64_t RngStream::next_below(std::uint64_t n) {
  if (n == 0) throw ContractError("RngStream::next_below: n must be positive");
  // Rejection sampling over the largest multiple of n.
  const std::uint64_t limit = ~0ULL - (~0ULL % n);
  std::uint64_t v = next_u64();
  while (v >= limit) v = next_u64();
  return v % n;
}

RngStream RngStream::fork(std::uint64_t label) const {
  return RngStream(mix64(seed ^ mix64(label + 0x517cc1b727220a95ULL)));
}

}  // namespace gcalstm
