#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "gcalstm/params.hpp"

namespace gcalstm {

struct GradCheckOptions {
  double eps = 1e-5;
  double tol = 1e-4;
  // Coordinates sampled per tensor; 0 checks every coordinate.
  std::size_t max_coords_per_tensor = 24;
  std::uint64_t seed = 0x9c0ffee;
};

struct GradCheckEntry {
  std::string name;
  double max_rel_err = 0.0;
  std::size_t coords_checked = 0;
};

struct GradCheckReport {
  std::vector<GradCheckEntry> per_tensor;
  double max_rel_err = 0.0;
  double tol = 0.0;
  bool pass = false;
};

// Central-difference verification of the gradients currently stored in
// `params` against the scalar `loss_fn`. The loss must be a deterministic
// function of the parameter values (dropout disabled); this is checked by
// evaluating it twice up front. Relative error per coordinate is
// |analytic - numeric| / max(|analytic|, |numeric|, 1e-6).
GradCheckReport finite_diff_check(const std::function<double(ParamStore&)>& loss_fn, ParamStore& params,
                                  const GradCheckOptions& opts = {});

}  // namespace gcalstm
