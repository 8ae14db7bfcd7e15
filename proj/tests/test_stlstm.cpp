#include <doctest.h>

#include <cmath>

#include "gcalstm/activations.hpp"
#include "gcalstm/errors.hpp"
#include "gcalstm/gradcheck.hpp"
#include "gcalstm/stlstm.hpp"

using namespace gcalstm;

namespace {

std::vector<Vec> random_inputs(std::size_t count, std::size_t dim, RngStream& rng) {
  std::vector<Vec> inputs(count, Vec(dim));
  for (auto& v : inputs) {
    for (double& x : v) x = rng.uniform(-1, 1);
  }
  return inputs;
}

void randomize(ParamStore& store, RngStream& rng, double scale = 0.5) {
  for (auto& t : store.tensors()) {
    for (double& v : t.value.data) v = rng.uniform(-scale, scale);
  }
}

// Scalar-by-scalar re-implementation of the lattice recurrence with explicit
// loops and no shared code with the library path.
struct NaiveLattice {
  std::size_t J, T, d, d_in;
  std::vector<std::vector<double>> h, c;  // index [j*T+t][k]

  void run(const DenseMatrix& W, const Vec& b, const std::vector<Vec>& inputs) {
    h.assign(J * T, std::vector<double>(d, 0.0));
    c.assign(J * T, std::vector<double>(d, 0.0));
    for (std::size_t j = 0; j < J; ++j) {
      for (std::size_t t = 0; t < T; ++t) {
        std::vector<double> concat(d_in + 2 * d, 0.0);
        for (std::size_t k = 0; k < d_in; ++k) concat[k] = inputs[j * T + t][k];
        if (j > 0) {
          for (std::size_t k = 0; k < d; ++k) concat[d_in + k] = h[(j - 1) * T + t][k];
        }
        if (t > 0) {
          for (std::size_t k = 0; k < d; ++k) concat[d_in + d + k] = h[j * T + t - 1][k];
        }
        std::vector<double> a(5 * d, 0.0);
        for (std::size_t r = 0; r < 5 * d; ++r) {
          a[r] = b[r];
          for (std::size_t cix = 0; cix < concat.size(); ++cix) a[r] += W.at(r, cix) * concat[cix];
        }
        for (std::size_t k = 0; k < d; ++k) {
          const double gi = 1.0 / (1.0 + std::exp(-a[k]));
          const double gfs = 1.0 / (1.0 + std::exp(-a[d + k]));
          const double gft = 1.0 / (1.0 + std::exp(-a[2 * d + k]));
          const double go = 1.0 / (1.0 + std::exp(-a[3 * d + k]));
          const double gu = std::tanh(a[4 * d + k]);
          const double cl = j > 0 ? c[(j - 1) * T + t][k] : 0.0;
          const double cp = t > 0 ? c[j * T + t - 1][k] : 0.0;
          c[j * T + t][k] = gi * gu + gfs * cl + gft * cp;
          h[j * T + t][k] = go * std::tanh(c[j * T + t][k]);
        }
      }
    }
  }
};

}  // namespace

TEST_CASE("zero parameters: gates are 0.5 and the cell halves its contexts") {
  const std::size_t d = 3;
  DenseMatrix W(5 * d, 2 + 2 * d);
  Vec b(5 * d, 0.0);
  Vec x = {0.4, -0.2};
  Vec c_left = {1.0, 2.0, -4.0};
  Vec c_prev = {0.5, -1.0, 2.0};
  Vec zero(d, 0.0);
  Vec c_out, h_out;
  stlstm_cell_forward(W, b, x, zero, zero, c_left, c_prev, std::nullopt, c_out, h_out, nullptr);
  for (std::size_t k = 0; k < d; ++k) {
    CHECK(c_out[k] == doctest::Approx(0.5 * (c_left[k] + c_prev[k])));
  }
  // u = tanh(0) = 0, so with zero contexts h is exactly zero.
  Vec c0, h0;
  stlstm_cell_forward(W, b, x, zero, zero, zero, zero, std::nullopt, c0, h0, nullptr);
  CHECK(h0 == zero);
}

TEST_CASE("hand-computed 1x1 toy with d = 2") {
  // Weights chosen so every preactivation is easy to trace by hand.
  const std::size_t d = 2;
  DenseMatrix W(5 * d, 1 + 2 * d);
  Vec b(5 * d, 0.0);
  // Row layout: [x, h_left(2), h_prev(2)]; contexts are zero at (0,0), so only
  // the x column matters here.
  for (std::size_t r = 0; r < 5 * d; ++r) W.at(r, 0) = 0.1 * static_cast<double>(r + 1);
  b[0] = 0.05;
  const double x = 0.7;

  Vec c_out, h_out;
  Vec zero(d, 0.0);
  stlstm_cell_forward(W, b, {x}, zero, zero, zero, zero, std::nullopt, c_out, h_out, nullptr);

  auto sig = [](double v) { return 1.0 / (1.0 + std::exp(-v)); };
  for (std::size_t k = 0; k < d; ++k) {
    const double ai = 0.1 * static_cast<double>(k + 1) * x + (k == 0 ? 0.05 : 0.0);
    const double au = 0.1 * static_cast<double>(4 * d + k + 1) * x;
    const double want_c = sig(ai) * std::tanh(au);
    CHECK(c_out[k] == doctest::Approx(want_c).epsilon(1e-14));
    const double ao = 0.1 * static_cast<double>(3 * d + k + 1) * x;
    CHECK(h_out[k] == doctest::Approx(sig(ao) * std::tanh(want_c)).epsilon(1e-14));
  }
}

TEST_CASE("cell update is linear in c_left") {
  const std::size_t d = 2;
  RngStream rng(7);
  DenseMatrix W(5 * d, 2 + 2 * d);
  for (double& v : W.data) v = rng.uniform(-1, 1);
  Vec b(5 * d);
  for (double& v : b) v = rng.uniform(-1, 1);
  Vec x = {0.3, 0.9};
  Vec h_left = {0.1, -0.2}, h_prev = {0.0, 0.4};
  Vec c_left = {0.5, -1.5}, c_prev = {0.0, 0.0};

  Vec c1, h1, c2, h2, c0, h0;
  stlstm_cell_forward(W, b, x, h_left, h_prev, c_left, c_prev, std::nullopt, c1, h1, nullptr);
  Vec doubled = {1.0, -3.0};
  stlstm_cell_forward(W, b, x, h_left, h_prev, doubled, c_prev, std::nullopt, c2, h2, nullptr);
  Vec none = {0.0, 0.0};
  stlstm_cell_forward(W, b, x, h_left, h_prev, none, c_prev, std::nullopt, c0, h0, nullptr);
  // Gates depend on h, not c, so the c_left term scales linearly.
  for (std::size_t k = 0; k < d; ++k) {
    CHECK(c2[k] - c0[k] == doctest::Approx(2.0 * (c1[k] - c0[k])).epsilon(1e-12));
  }
}

TEST_CASE("1x1 lattice reduces to a single cell with zero contexts") {
  const std::size_t d = 4, d_in = 3;
  RngStream rng(9);
  DenseMatrix W(5 * d, d_in + 2 * d);
  for (double& v : W.data) v = rng.uniform(-1, 1);
  Vec b(5 * d);
  for (double& v : b) v = rng.uniform(-0.5, 0.5);
  const std::vector<Vec> inputs = random_inputs(1, d_in, rng);

  const LatticeState state = lattice_forward(W, b, inputs, 1, 1, d);
  Vec c_out, h_out, zero(d, 0.0);
  stlstm_cell_forward(W, b, inputs[0], zero, zero, zero, zero, std::nullopt, c_out, h_out, nullptr);
  CHECK(state.h[0] == h_out);
  CHECK(state.c[0] == c_out);
}

TEST_CASE("row-major and wavefront schedules are bit-identical") {
  const std::size_t J = 4, T = 5, d = 3, d_in = 3;
  RngStream rng(13);
  DenseMatrix W(5 * d, d_in + 2 * d);
  for (double& v : W.data) v = rng.uniform(-1, 1);
  Vec b(5 * d);
  for (double& v : b) v = rng.uniform(-0.5, 0.5);
  const std::vector<Vec> inputs = random_inputs(J * T, d_in, rng);

  const LatticeState a = lattice_forward(W, b, inputs, J, T, d, nullptr, LatticeSchedule::row_major);
  const LatticeState w = lattice_forward(W, b, inputs, J, T, d, nullptr, LatticeSchedule::wavefront);
  for (std::size_t i = 0; i < J * T; ++i) {
    CHECK(a.h[i] == w.h[i]);
    CHECK(a.c[i] == w.c[i]);
  }
}

TEST_CASE("3x4 lattice matches the naive scalar re-implementation") {
  const std::size_t J = 3, T = 4, d = 5, d_in = 3;
  RngStream rng(21);
  DenseMatrix W(5 * d, d_in + 2 * d);
  for (double& v : W.data) v = rng.uniform(-0.8, 0.8);
  Vec b(5 * d);
  for (double& v : b) v = rng.uniform(-0.3, 0.3);
  const std::vector<Vec> inputs = random_inputs(J * T, d_in, rng);

  const LatticeState state = lattice_forward(W, b, inputs, J, T, d);
  NaiveLattice naive{J, T, d, d_in, {}, {}};
  naive.run(W, b, inputs);
  for (std::size_t i = 0; i < J * T; ++i) {
    for (std::size_t k = 0; k < d; ++k) {
      CHECK(state.h[i][k] == doctest::Approx(naive.h[i][k]).epsilon(1e-13));
      CHECK(state.c[i][k] == doctest::Approx(naive.c[i][k]).epsilon(1e-13));
    }
  }
}

TEST_CASE("causality: perturbing x(j,t) only changes h(j',t') with j' >= j, t' >= t") {
  const std::size_t J = 3, T = 4, d = 3, d_in = 3;
  RngStream rng(27);
  DenseMatrix W(5 * d, d_in + 2 * d);
  for (double& v : W.data) v = rng.uniform(-1, 1);
  Vec b(5 * d, 0.1);
  std::vector<Vec> inputs = random_inputs(J * T, d_in, rng);

  const LatticeState base = lattice_forward(W, b, inputs, J, T, d);
  const std::size_t pj = 1, pt = 2;
  inputs[pj * T + pt][0] += 0.5;
  const LatticeState bumped = lattice_forward(W, b, inputs, J, T, d);

  for (std::size_t j = 0; j < J; ++j) {
    for (std::size_t t = 0; t < T; ++t) {
      const bool downstream = j >= pj && t >= pt;
      if (!downstream) CHECK(base.h[j * T + t] == bumped.h[j * T + t]);
    }
  }
  CHECK(base.h[pj * T + pt] != bumped.h[pj * T + pt]);
}

TEST_CASE("empty and mismatched lattice inputs are rejected") {
  DenseMatrix W(5, 5);
  Vec b(5);
  CHECK_THROWS_AS(lattice_forward(W, b, {}, 0, 0, 1), ContractError);
  CHECK_THROWS_AS(lattice_forward(W, b, std::vector<Vec>(3), 2, 2, 1), ShapeError);
}

TEST_CASE("zero grad_h produces zero parameter gradients") {
  const std::size_t J = 2, T = 2, d = 3, d_in = 3;
  RngStream rng(31);
  ParamStore store;
  auto& Wt = store.add("W", 5 * d, d_in + 2 * d);
  auto& bt = store.add("b", 5 * d, 1);
  randomize(store, rng);

  const std::vector<Vec> inputs = random_inputs(J * T, d_in, rng);
  const LatticeState state = lattice_forward(Wt.value, bt.value.data, inputs, J, T, d);
  const std::vector<Vec> dh(J * T, Vec(d, 0.0));
  lattice_backward(Wt, bt, state, dh);
  for (double g : Wt.grad.data) CHECK(g == 0.0);
  for (double g : bt.grad.data) CHECK(g == 0.0);
}

TEST_CASE("lattice gradients match central finite differences") {
  const std::size_t J = 2, T = 3, d = 4, d_in = 3;
  RngStream rng(37);
  ParamStore store;
  auto& Wt = store.add("W", 5 * d, d_in + 2 * d);
  auto& bt = store.add("b", 5 * d, 1);
  randomize(store, rng);
  const std::vector<Vec> inputs = random_inputs(J * T, d_in, rng);

  // Scalar objective: weighted sum of all hidden entries.
  std::vector<Vec> weights(J * T, Vec(d));
  for (auto& v : weights) {
    for (double& x : v) x = rng.uniform(-1, 1);
  }
  auto loss_fn = [&](ParamStore& s) {
    const LatticeState st =
        lattice_forward(s.get("W").value, s.get("b").value.data, inputs, J, T, d);
    double loss = 0.0;
    for (std::size_t i = 0; i < J * T; ++i) {
      for (std::size_t k = 0; k < d; ++k) loss += weights[i][k] * st.h[i][k];
    }
    return loss;
  };

  store.zero_grads();
  const LatticeState state = lattice_forward(Wt.value, bt.value.data, inputs, J, T, d);
  lattice_backward(Wt, bt, state, weights);

  GradCheckOptions opts;
  opts.max_coords_per_tensor = 40;
  const GradCheckReport report = finite_diff_check(loss_fn, store, opts);
  CHECK(report.pass);
  CHECK(report.max_rel_err < 1e-4);
}

TEST_CASE("gated lattice gradients, including d/dr, match finite differences") {
  const std::size_t J = 2, T = 2, d = 3, d_in = 3;
  RngStream rng(41);
  ParamStore store;
  auto& Wt = store.add("W", 5 * d, d_in + 2 * d);
  auto& bt = store.add("b", 5 * d, 1);
  // Gate values packed as a tensor so the same finite-difference harness
  // can probe them.
  auto& rt = store.add("r", J, T);
  randomize(store, rng);
  for (double& v : rt.value.data) v = rng.uniform(0.1, 0.9);
  const std::vector<Vec> inputs = random_inputs(J * T, d_in, rng);
  std::vector<Vec> weights(J * T, Vec(d));
  for (auto& v : weights) {
    for (double& x : v) x = rng.uniform(-1, 1);
  }

  auto loss_fn = [&](ParamStore& s) {
    const GateGrid gates = s.get("r").value;
    const LatticeState st =
        lattice_forward(s.get("W").value, s.get("b").value.data, inputs, J, T, d, &gates);
    double loss = 0.0;
    for (std::size_t i = 0; i < J * T; ++i) {
      for (std::size_t k = 0; k < d; ++k) loss += weights[i][k] * st.h[i][k];
    }
    return loss;
  };

  store.zero_grads();
  const GateGrid gates = rt.value;
  const LatticeState state = lattice_forward(Wt.value, bt.value.data, inputs, J, T, d, &gates);
  const LatticeGrads lg = lattice_backward(Wt, bt, state, weights, &gates);
  rt.grad = lg.dgates;

  GradCheckOptions opts;
  opts.max_coords_per_tensor = 0;  // every coordinate, including every r
  const GradCheckReport report = finite_diff_check(loss_fn, store, opts);
  CHECK(report.pass);
  CHECK(report.max_rel_err < 1e-4);
}

TEST_CASE("informativeness gate boundaries: r = 1 keeps only input, r = 0 only history") {
  const std::size_t d = 3;
  RngStream rng(47);
  DenseMatrix W(5 * d, 3 + 2 * d);
  for (double& v : W.data) v = rng.uniform(-1, 1);
  Vec b(5 * d);
  for (double& v : b) v = rng.uniform(-1, 1);
  Vec x = {0.2, -0.4, 0.6};
  Vec h_left = {0.3, 0.1, -0.2}, h_prev = {-0.1, 0.5, 0.2};
  Vec c_left = {1.2, -0.7, 0.4}, c_prev = {0.3, 0.9, -1.1};

  StepCache cache;
  Vec c1, h1;
  stlstm_cell_forward(W, b, x, h_left, h_prev, c_left, c_prev, 1.0, c1, h1, &cache);
  const double* gi = cache.gates.data() + kGateI * d;
  const double* gu = cache.gates.data() + kGateU * d;
  for (std::size_t k = 0; k < d; ++k) CHECK(c1[k] == gi[k] * gu[k]);

  Vec c0, h0;
  StepCache cache0;
  stlstm_cell_forward(W, b, x, h_left, h_prev, c_left, c_prev, 0.0, c0, h0, &cache0);
  const double* gfs = cache0.gates.data() + kGateFS * d;
  const double* gft = cache0.gates.data() + kGateFT * d;
  for (std::size_t k = 0; k < d; ++k) {
    CHECK(c0[k] == gfs[k] * c_left[k] + gft[k] * c_prev[k]);
  }
}

TEST_CASE("joint order validation") {
  JointOrder ok = JointOrder::identity(4);
  ok.validate(4);
  JointOrder bad;
  bad.order = {0, 1, 1, 3};
  CHECK_THROWS_AS(bad.validate(4), ContractError);
  JointOrder wrong_size;
  wrong_size.order = {0, 1};
  CHECK_THROWS_AS(wrong_size.validate(3), ContractError);
}
