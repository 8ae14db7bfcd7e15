#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "gcalstm/matrix.hpp"
#include "gcalstm/params.hpp"

namespace gcalstm {

// Gate blocks of the fused 5d preactivation, in fixed order.
// (input, spatial forget, temporal forget, output, modulated input)
enum GateBlock : std::size_t { kGateI = 0, kGateFS = 1, kGateFT = 2, kGateO = 3, kGateU = 4 };

// Per-step activations retained for the backward pass.
struct StepCache {
  Vec gates;    // 5d post-nonlinearity, blocks per GateBlock
  Vec concat;   // [x; h_left; h_prev], length d_in + 2d
  Vec tanh_c;   // tanh of the step's cell state
};

// Cell states and hidden representations of one ST-LSTM layer over the
// (joint, frame) grid, plus the caches needed for backprop. Grids are indexed
// by chain position j in [0, J) and frame t in [0, T); predecessors out of
// range stand for zero vectors.
struct LatticeState {
  std::size_t joints = 0;
  std::size_t frames = 0;
  std::size_t hidden = 0;
  std::vector<Vec> c;  // joints*frames entries of length hidden
  std::vector<Vec> h;
  std::vector<StepCache> cache;

  std::size_t at(std::size_t j, std::size_t t) const { return j * frames + t; }
  const Vec& hidden_at(std::size_t j, std::size_t t) const { return h[at(j, t)]; }
  const Vec& cell_at(std::size_t j, std::size_t t) const { return c[at(j, t)]; }

  // Mean of all hidden vectors; the average-pooled global summary.
  Vec mean_hidden() const;
  // All hidden vectors concatenated in (j, t) order, length J*T*d.
  Vec concat_hidden() const;
};

// Spatial chain over the joints: the lattice visits joint order[k] at chain
// position k. Must be a permutation of 0..J-1.
struct JointOrder {
  std::vector<std::size_t> order;

  static JointOrder identity(std::size_t joints);
  void validate(std::size_t joints) const;
};

// Grid of per-step informativeness gates r in [0, 1], row-major (j, t).
using GateGrid = DenseMatrix;

// One lattice step. Gates are sigmoid/tanh of W [x; h_left; h_prev] + b; the
// cell update is c = i.*u + fS.*c_left + fT.*c_prev, or the gated form
// c = r*(i.*u) + (1-r)*(fS.*c_left) + (1-r)*(fT.*c_prev) when r is present;
// h = o .* tanh(c). Throws ShapeError on length mismatches.
void stlstm_cell_forward(const DenseMatrix& W, const Vec& b, const Vec& x, const Vec& h_left,
                         const Vec& h_prev, const Vec& c_left, const Vec& c_prev, std::optional<double> r,
                         Vec& c_out, Vec& h_out, StepCache* cache);

// Gradients flowing out of one lattice step, mirrors of the forward inputs.
struct StepGrads {
  Vec dx;
  Vec dh_left;
  Vec dh_prev;
  Vec dc_left;
  Vec dc_prev;
  double dr = 0.0;
};

// Backward through one step. dh is the total gradient on h (external plus
// successors); dc_in carries the successors' cell-path gradient. Accumulates
// into dW/db.
void stlstm_cell_backward(const DenseMatrix& W, const StepCache& cache, const Vec& c_left,
                          const Vec& c_prev, std::optional<double> r, const Vec& dh, const Vec& dc_in,
                          DenseMatrix& dW, Vec& db, StepGrads& out);

enum class LatticeSchedule { row_major, wavefront };

// Evaluates the full grid in a dependency-respecting order; the result is
// schedule-invariant. `inputs` holds J*T vectors indexed j*T + t (already in
// chain order). `gates` enables the informativeness-gated cell update.
// Throws ContractError on an empty grid.
LatticeState lattice_forward(const DenseMatrix& W, const Vec& b, const std::vector<Vec>& inputs,
                             std::size_t joints, std::size_t frames, std::size_t hidden,
                             const GateGrid* gates = nullptr,
                             LatticeSchedule schedule = LatticeSchedule::row_major);

struct LatticeGrads {
  std::vector<Vec> dinput;  // J*T entries matching the forward inputs
  GateGrid dgates;          // populated when the forward pass was gated
};

// Reverse traversal of the lattice. dh_external supplies dL/dh per step;
// parameter gradients accumulate into Wt.grad / bt.grad. Throws ContractError
// if the forward cache is missing.
LatticeGrads lattice_backward(ParamTensor& Wt, ParamTensor& bt, const LatticeState& state,
                              const std::vector<Vec>& dh_external, const GateGrid* gates = nullptr);

}  // namespace gcalstm
