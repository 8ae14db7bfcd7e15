#include "gcalstm/gradcheck.hpp"

#include <algorithm>
#include <cmath>

#include "gcalstm/errors.hpp"
#include "gcalstm/rng.hpp"

namespace gcalstm {

GradCheckReport finite_diff_check(const std::function<double(ParamStore&)>& loss_fn, ParamStore& params,
                                  const GradCheckOptions& opts) {
  if (opts.eps <= 0.0) throw ContractError("finite_diff_check: eps must be positive");

  const double base_a = loss_fn(params);
  const double base_b = loss_fn(params);
  if (base_a != base_b) {
    throw ContractError("finite_diff_check: loss is not deterministic across probe evaluations");
  }

  RngStream rng(opts.seed);
  GradCheckReport report;
  report.tol = opts.tol;

  for (auto& tensor : params.tensors()) {
    const std::size_t total = tensor.value.size();
    std::vector<std::size_t> coords;
    if (opts.max_coords_per_tensor == 0 || total <= opts.max_coords_per_tensor) {
      coords.resize(total);
      for (std::size_t i = 0; i < total; ++i) coords[i] = i;
    } else {
      for (std::size_t i = 0; i < opts.max_coords_per_tensor; ++i) {
        coords.push_back(rng.next_below(total));
      }
      std::sort(coords.begin(), coords.end());
      coords.erase(std::unique(coords.begin(), coords.end()), coords.end());
    }

    GradCheckEntry entry;
    entry.name = tensor.name;
    entry.coords_checked = coords.size();
    for (std::size_t idx : coords) {
      const double saved = tensor.value.data[idx];
      tensor.value.data[idx] = saved + opts.eps;
      const double plus = loss_fn(params);
      tensor.value.data[idx] = saved - opts.eps;
      const double minus = loss_fn(params);
      tensor.value.data[idx] = saved;

      const double numeric = (plus - minus) / (2.0 * opts.eps);
      const double analytic = tensor.grad.data[idx];
      const double denom = std::max({std::abs(analytic), std::abs(numeric), 1e-6});
      entry.max_rel_err = std::max(entry.max_rel_err, std::abs(analytic - numeric) / denom);
    }
    report.max_rel_err = std::max(report.max_rel_err, entry.max_rel_err);
    report.per_tensor.push_back(std::move(entry));
  }

  report.pass = report.max_rel_err < opts.tol;
  return report;
}

}  // namespace gcalstm
