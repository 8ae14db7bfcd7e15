#include "gcalstm/stlstm.hpp"

#include <cmath>
#include <numeric>

#include "gcalstm/activations.hpp"
#include "gcalstm/errors.hpp"

namespace gcalstm {

Vec LatticeState::mean_hidden() const {
  Vec mean(hidden, 0.0);
  for (const Vec& v : h) {
    for (std::size_t k = 0; k < hidden; ++k) mean[k] += v[k];
  }
  const double scale = 1.0 / static_cast<double>(h.size());
  for (double& v : mean) v *= scale;
  return mean;
}

Vec LatticeState::concat_hidden() const {
  Vec flat;
  flat.reserve(h.size() * hidden);
  for (const Vec& v : h) flat.insert(flat.end(), v.begin(), v.end());
  return flat;
}

JointOrder JointOrder::identity(std::size_t joints) {
  JointOrder o;
  o.order.resize(joints);
  std::iota(o.order.begin(), o.order.end(), 0);
  return o;
}

void JointOrder::validate(std::size_t joints) const {
  if (order.size() != joints) {
    throw ContractError("JointOrder: has " + std::to_string(order.size()) + " entries for " +
                        std::to_string(joints) + " joints");
  }
  std::vector<bool> seen(joints, false);
  for (std::size_t j : order) {
    if (j >= joints || seen[j]) throw ContractError("JointOrder: not a permutation of the joints");
    seen[j] = true;
  }
}

void stlstm_cell_forward(const DenseMatrix& W, const Vec& b, const Vec& x, const Vec& h_left,
                         const Vec& h_prev, const Vec& c_left, const Vec& c_prev, std::optional<double> r,
                         Vec& c_out, Vec& h_out, StepCache* cache) {
  const std::size_t d = h_left.size();
  if (h_prev.size() != d || c_left.size() != d || c_prev.size() != d) {
    throw ShapeError("stlstm_cell_forward: context vectors disagree on the hidden size");
  }
  if (W.rows != 5 * d || W.cols != x.size() + 2 * d || b.size() != 5 * d) {
    throw ShapeError("stlstm_cell_forward: gate map is " + std::to_string(W.rows) + "x" +
                     std::to_string(W.cols) + " but expected " + std::to_string(5 * d) + "x" +
                     std::to_string(x.size() + 2 * d));
  }

  Vec concat;
  concat.reserve(W.cols);
  concat.insert(concat.end(), x.begin(), x.end());
  concat.insert(concat.end(), h_left.begin(), h_left.end());
  concat.insert(concat.end(), h_prev.begin(), h_prev.end());

  Vec a(b);
  const double* w = W.data.data();
  for (std::size_t row = 0; row < W.rows; ++row, w += W.cols) {
    double acc = 0.0;
    for (std::size_t col = 0; col < W.cols; ++col) acc += w[col] * concat[col];
    a[row] += acc;
  }

  Vec gates(5 * d);
  for (std::size_t k = 0; k < 4 * d; ++k) gates[k] = sigmoid(a[k]);
  for (std::size_t k = 4 * d; k < 5 * d; ++k) gates[k] = std::tanh(a[k]);

  const double* gi = gates.data() + kGateI * d;
  const double* gfs = gates.data() + kGateFS * d;
  const double* gft = gates.data() + kGateFT * d;
  const double* go = gates.data() + kGateO * d;
  const double* gu = gates.data() + kGateU * d;

  c_out.resize(d);
  h_out.resize(d);
  Vec tanh_c(d);
  for (std::size_t k = 0; k < d; ++k) {
    if (r) {
      c_out[k] = *r * (gi[k] * gu[k]) + (1.0 - *r) * (gfs[k] * c_left[k]) + (1.0 - *r) * (gft[k] * c_prev[k]);
    } else {
      c_out[k] = gi[k] * gu[k] + gfs[k] * c_left[k] + gft[k] * c_prev[k];
    }
    tanh_c[k] = std::tanh(c_out[k]);
    h_out[k] = go[k] * tanh_c[k];
  }

  if (cache) {
    cache->gates = std::move(gates);
    cache->concat = std::move(concat);
    cache->tanh_c = std::move(tanh_c);
  }
}

void stlstm_cell_backward(const DenseMatrix& W, const StepCache& cache, const Vec& c_left,
                          const Vec& c_prev, std::optional<double> r, const Vec& dh, const Vec& dc_in,
                          DenseMatrix& dW, Vec& db, StepGrads& out) {
  const std::size_t d = dh.size();
  const std::size_t d_in = cache.concat.size() - 2 * d;

  const double* gi = cache.gates.data() + kGateI * d;
  const double* gfs = cache.gates.data() + kGateFS * d;
  const double* gft = cache.gates.data() + kGateFT * d;
  const double* go = cache.gates.data() + kGateO * d;
  const double* gu = cache.gates.data() + kGateU * d;

  Vec da(5 * d);
  double* dai = da.data() + kGateI * d;
  double* dafs = da.data() + kGateFS * d;
  double* daft = da.data() + kGateFT * d;
  double* dao = da.data() + kGateO * d;
  double* dau = da.data() + kGateU * d;

  out.dc_left.assign(d, 0.0);
  out.dc_prev.assign(d, 0.0);
  out.dr = 0.0;

  const double rin = r ? *r : 1.0;
  const double rhist = r ? 1.0 - *r : 1.0;
  for (std::size_t k = 0; k < d; ++k) {
    const double tc = cache.tanh_c[k];
    const double dc = dc_in[k] + dh[k] * go[k] * (1.0 - tc * tc);
    const double d_o = dh[k] * tc;

    const double di = dc * gu[k] * rin;
    const double du = dc * gi[k] * rin;
    const double dfs = dc * c_left[k] * rhist;
    const double dft = dc * c_prev[k] * rhist;
    out.dc_left[k] = dc * gfs[k] * rhist;
    out.dc_prev[k] = dc * gft[k] * rhist;
    if (r) {
      out.dr += dc * (gi[k] * gu[k] - gfs[k] * c_left[k] - gft[k] * c_prev[k]);
    }

    dai[k] = di * gi[k] * (1.0 - gi[k]);
    dafs[k] = dfs * gfs[k] * (1.0 - gfs[k]);
    daft[k] = dft * gft[k] * (1.0 - gft[k]);
    dao[k] = d_o * go[k] * (1.0 - go[k]);
    dau[k] = du * (1.0 - gu[k] * gu[k]);
  }

  outer_add(dW, da.data(), cache.concat.data());
  for (std::size_t k = 0; k < 5 * d; ++k) db[k] += da[k];

  Vec dconcat(cache.concat.size(), 0.0);
  matvec_transpose_add(W, da.data(), dconcat.data());
  out.dx.assign(dconcat.begin(), dconcat.begin() + d_in);
  out.dh_left.assign(dconcat.begin() + d_in, dconcat.begin() + d_in + d);
  out.dh_prev.assign(dconcat.begin() + d_in + d, dconcat.end());
}

LatticeState lattice_forward(const DenseMatrix& W, const Vec& b, const std::vector<Vec>& inputs,
                             std::size_t joints, std::size_t frames, std::size_t hidden,
                             const GateGrid* gates, LatticeSchedule schedule) {
  if (joints == 0 || frames == 0) throw ContractError("lattice_forward: empty grid");
  if (inputs.size() != joints * frames) {
    throw ShapeError("lattice_forward: " + std::to_string(inputs.size()) + " inputs for a " +
                     std::to_string(joints) + "x" + std::to_string(frames) + " grid");
  }
  if (gates && (gates->rows != joints || gates->cols != frames)) {
    throw ShapeError("lattice_forward: gate grid is " + std::to_string(gates->rows) + "x" +
                     std::to_string(gates->cols) + " but the lattice is " + std::to_string(joints) + "x" +
                     std::to_string(frames));
  }

  LatticeState state;
  state.joints = joints;
  state.frames = frames;
  state.hidden = hidden;
  state.c.resize(joints * frames);
  state.h.resize(joints * frames);
  state.cache.resize(joints * frames);

  const Vec zero(hidden, 0.0);
  auto eval_step = [&](std::size_t j, std::size_t t) {
    const std::size_t idx = state.at(j, t);
    const Vec& h_left = j > 0 ? state.h[state.at(j - 1, t)] : zero;
    const Vec& c_left = j > 0 ? state.c[state.at(j - 1, t)] : zero;
    const Vec& h_prev = t > 0 ? state.h[state.at(j, t - 1)] : zero;
    const Vec& c_prev = t > 0 ? state.c[state.at(j, t - 1)] : zero;
    std::optional<double> r;
    if (gates) r = gates->at(j, t);
    stlstm_cell_forward(W, b, inputs[idx], h_left, h_prev, c_left, c_prev, r, state.c[idx], state.h[idx],
                        &state.cache[idx]);
  };

  if (schedule == LatticeSchedule::row_major) {
    for (std::size_t j = 0; j < joints; ++j) {
      for (std::size_t t = 0; t < frames; ++t) eval_step(j, t);
    }
  } else {
    // Anti-diagonal wavefront: all steps with j + t == w depend only on w - 1.
    for (std::size_t w = 0; w <= joints + frames - 2; ++w) {
      for (std::size_t j = 0; j < joints; ++j) {
        if (w < j || w - j >= frames) continue;
        eval_step(j, w - j);
      }
    }
  }
  return state;
}

LatticeGrads lattice_backward(ParamTensor& Wt, ParamTensor& bt, const LatticeState& state,
                              const std::vector<Vec>& dh_external, const GateGrid* gates) {
  const std::size_t J = state.joints;
  const std::size_t T = state.frames;
  const std::size_t d = state.hidden;
  if (state.cache.size() != J * T || (J * T > 0 && state.cache[0].gates.empty())) {
    throw ContractError("lattice_backward: forward cache missing");
  }
  if (dh_external.size() != J * T) {
    throw ShapeError("lattice_backward: gradient grid size " + std::to_string(dh_external.size()) +
                     " does not match the lattice");
  }

  LatticeGrads grads;
  grads.dinput.resize(J * T);
  if (gates) grads.dgates = GateGrid(J, T);

  std::vector<Vec> dh_pending(J * T, Vec(d, 0.0));
  std::vector<Vec> dc_pending(J * T, Vec(d, 0.0));
  const Vec zero(d, 0.0);

  for (std::size_t j = J; j-- > 0;) {
    for (std::size_t t = T; t-- > 0;) {
      const std::size_t idx = state.at(j, t);
      Vec dh = dh_pending[idx];
      for (std::size_t k = 0; k < d; ++k) dh[k] += dh_external[idx][k];

      const Vec& c_left = j > 0 ? state.c[state.at(j - 1, t)] : zero;
      const Vec& c_prev = t > 0 ? state.c[state.at(j, t - 1)] : zero;
      std::optional<double> r;
      if (gates) r = gates->at(j, t);

      StepGrads step;
      stlstm_cell_backward(Wt.value, state.cache[idx], c_left, c_prev, r, dh, dc_pending[idx], Wt.grad,
                           bt.grad.data, step);

      grads.dinput[idx] = std::move(step.dx);
      if (gates) grads.dgates.at(j, t) = step.dr;
      if (j > 0) {
        const std::size_t left = state.at(j - 1, t);
        for (std::size_t k = 0; k < d; ++k) {
          dh_pending[left][k] += step.dh_left[k];
          dc_pending[left][k] += step.dc_left[k];
        }
      }
      if (t > 0) {
        const std::size_t prev = state.at(j, t - 1);
        for (std::size_t k = 0; k < d; ++k) {
          dh_pending[prev][k] += step.dh_prev[k];
          dc_pending[prev][k] += step.dc_prev[k];
        }
      }
    }
  }
  return grads;
}

}  // namespace gcalstm
