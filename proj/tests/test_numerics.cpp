#include <doctest.h>

#include <cmath>

#include "gcalstm/activations.hpp"
#include "gcalstm/errors.hpp"
#include "gcalstm/gradcheck.hpp"
#include "gcalstm/matrix.hpp"
#include "gcalstm/params.hpp"
#include "gcalstm/rng.hpp"

using namespace gcalstm;

namespace {

// Independent naive matvec: per-row dot product over explicit indices.
Vec naive_affine(const DenseMatrix& W, const Vec& b, const Vec& x) {
  Vec y(W.rows);
  for (std::size_t r = 0; r < W.rows; ++r) {
    double acc = b[r];
    for (std::size_t c = 0; c < W.cols; ++c) acc += W.at(r, c) * x[c];
    y[r] = acc;
  }
  return y;
}

// Two-pass exponent-sum softmax without max subtraction.
Vec naive_softmax(const Vec& scores) {
  double denom = 0.0;
  for (double s : scores) denom += std::exp(s);
  Vec out(scores.size());
  for (std::size_t i = 0; i < scores.size(); ++i) out[i] = std::exp(scores[i]) / denom;
  return out;
}

}  // namespace

TEST_CASE("affine identity and zero maps") {
  DenseMatrix I(2, 2);
  I.at(0, 0) = 1.0;
  I.at(1, 1) = 1.0;
  CHECK(affine(I, {0, 0}, {3, 4}, "t") == Vec{3, 4});

  DenseMatrix Z(2, 3);
  CHECK(affine(Z, {1, 1}, {5, -2, 9}, "t") == Vec{1, 1});
}

TEST_CASE("affine matches the naive dot-product oracle") {
  RngStream rng(11);
  DenseMatrix W(3, 2);
  for (double& v : W.data) v = rng.uniform(-2, 2);
  Vec b = {rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1)};
  Vec x = {rng.uniform(-3, 3), rng.uniform(-3, 3)};
  const Vec got = affine(W, b, x, "t");
  const Vec want = naive_affine(W, b, x);
  for (std::size_t i = 0; i < 3; ++i) CHECK(got[i] == doctest::Approx(want[i]).epsilon(1e-14));
}

TEST_CASE("affine rejects mismatched shapes naming the operand") {
  DenseMatrix W(3, 2);
  CHECK_THROWS_WITH_AS(affine(W, {0, 0, 0}, {1, 2, 3}, "score.We2"),
                       doctest::Contains("score.We2"), ShapeError);
  CHECK_THROWS_AS(affine(W, {0, 0}, {1, 2}, "t"), ShapeError);
}

TEST_CASE("elementwise nonlinearities") {
  CHECK(sigmoid(Vec{0})[0] == 0.5);
  CHECK(tanh_act(Vec{0})[0] == 0.0);
  CHECK(relu(Vec{-2})[0] == 0.0);
  CHECK(relu(Vec{3})[0] == 3.0);

  RngStream rng(5);
  for (int i = 0; i < 100; ++i) {
    const double x = rng.uniform(-20, 20);
    CHECK(sigmoid(Vec{x})[0] + sigmoid(Vec{-x})[0] == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(sigmoid(Vec{x})[0] > 0.0);
    CHECK(sigmoid(Vec{x})[0] < 1.0);
    // tanh rounds to exactly +-1 in double beyond |x| ~ 19; the open-interval
    // property holds on the representable range.
    const double y = rng.uniform(-15, 15);
    CHECK(tanh_act(Vec{y})[0] > -1.0);
    CHECK(tanh_act(Vec{y})[0] < 1.0);
  }
}

TEST_CASE("softmax uniform, saturation and empty input") {
  const Vec r = softmax_flat(Vec(12, 3.7));
  for (double v : r) CHECK(v == doctest::Approx(1.0 / 12).epsilon(1e-12));

  const Vec s = softmax_flat({50, 0, 0});
  CHECK(s[0] > 1.0 - 1e-9);

  CHECK_THROWS_AS(softmax_flat({}), ContractError);
}

TEST_CASE("softmax matches the naive two-pass oracle") {
  RngStream rng(17);
  Vec scores(8);
  for (double& s : scores) s = rng.uniform(-5, 5);
  const Vec got = softmax_flat(scores);
  const Vec want = naive_softmax(scores);
  for (std::size_t i = 0; i < scores.size(); ++i) {
    CHECK(std::abs(got[i] - want[i]) / want[i] < 1e-12);
  }
}

TEST_CASE("softmax normalization and argmax preservation over random inputs") {
  RngStream rng(23);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 1 + rng.next_below(20);
    Vec scores(n);
    for (double& s : scores) s = rng.uniform(-30, 30);
    const Vec r = softmax_flat(scores);
    double sum = 0.0;
    for (double v : r) sum += v;
    CHECK(std::abs(sum - 1.0) < 1e-9);
    const auto argmax_in = std::max_element(scores.begin(), scores.end()) - scores.begin();
    const auto argmax_out = std::max_element(r.begin(), r.end()) - r.begin();
    CHECK(argmax_in == argmax_out);
  }
}

TEST_CASE("softmax shift invariance") {
  RngStream rng(29);
  Vec scores(10);
  for (double& s : scores) s = rng.uniform(-4, 4);
  Vec shifted = scores;
  for (double& s : shifted) s += 7.25;
  const Vec a = softmax_flat(scores);
  const Vec b = softmax_flat(shifted);
  for (std::size_t i = 0; i < a.size(); ++i) CHECK(std::abs(a[i] - b[i]) < 1e-12);
}

TEST_CASE("dropout mask: degenerate, large-sample mean, determinism, contract") {
  RngStream rng(31);
  const Vec ones = dropout_mask(16, 0.0, rng);
  for (double v : ones) CHECK(v == 1.0);

  RngStream rng2(33);
  const Vec mask = dropout_mask(100000, 0.5, rng2);
  double mean = 0.0;
  for (double v : mask) mean += v;
  mean /= static_cast<double>(mask.size());
  CHECK(mean == doctest::Approx(1.0).epsilon(0.02));

  RngStream a(99), b(99);
  CHECK(dropout_mask(64, 0.3, a) == dropout_mask(64, 0.3, b));

  CHECK_THROWS_AS(dropout_mask(4, 1.0, rng), ContractError);
}

TEST_CASE("sgd_step basics") {
  ParamStore store;
  auto& p = store.add("w", 1, 2);
  p.value.data = {0.0, 0.0};

  SUBCASE("single step without momentum") {
    p.grad.data = {1.0, 1.0};
    store.sgd_step(0.1, 0.0);
    CHECK(p.value.data[0] == doctest::Approx(-0.1));
  }

  SUBCASE("zero gradient leaves values unchanged") {
    p.value.data = {1.5, -2.5};
    p.grad.data = {0.0, 0.0};
    store.sgd_step(0.1, 0.0);
    CHECK(p.value.data == Vec{1.5, -2.5});
  }

  SUBCASE("lr = 0 is bit-identical") {
    p.value.data = {0.25, -0.75};
    p.grad.data = {3.0, -4.0};
    store.sgd_step(0.0, 0.9);
    CHECK(p.value.data == Vec{0.25, -0.75});
  }

  SUBCASE("non-finite gradient names the tensor") {
    p.grad.data = {std::nan(""), 0.0};
    CHECK_THROWS_WITH_AS(store.sgd_step(0.1, 0.0), doctest::Contains("'w'"), DivergenceError);
  }
}

TEST_CASE("sgd_step with momentum matches a hand-unrolled scalar recurrence") {
  ParamStore store;
  auto& p = store.add("theta", 1, 1);
  p.value.data = {1.0};

  // Hand recurrence: m1 = g1, v1 = v0 - lr*m1; m2 = mu*m1 + g2, v2 = v1 - lr*m2.
  const double lr = 0.1, mu = 0.9, g1 = 2.0, g2 = -1.0;
  const double m1 = g1;
  const double v1 = 1.0 - lr * m1;
  const double m2 = mu * m1 + g2;
  const double v2 = v1 - lr * m2;

  p.grad.data = {g1};
  store.sgd_step(lr, mu);
  CHECK(p.value.data[0] == doctest::Approx(v1).epsilon(1e-15));
  p.grad.data = {g2};
  store.sgd_step(lr, mu);
  CHECK(p.value.data[0] == doctest::Approx(v2).epsilon(1e-15));
}

TEST_CASE("frozen tensors are untouched by sgd_step") {
  ParamStore store;
  auto& a = store.add("a", 1, 1, 0);
  auto& b = store.add("b", 1, 1, 2);
  a.value.data = {1.0};
  b.value.data = {1.0};
  a.grad.data = {1.0};
  b.grad.data = {1.0};
  a.momentum.data = {0.5};
  b.momentum.data = {0.5};
  store.set_trainable_up_to_iteration(1);
  store.sgd_step(0.1, 0.9);
  CHECK(a.value.data[0] != 1.0);
  CHECK(b.value.data[0] == 1.0);
  CHECK(b.momentum.data[0] == 0.5);
}

TEST_CASE("finite_diff_check on a quadratic loss") {
  ParamStore store;
  auto& p = store.add("theta", 1, 1);
  p.value.data = {3.0};

  auto loss = [](ParamStore& s) {
    const double t = s.get("theta").value.data[0];
    return 0.5 * t * t;
  };
  p.grad.data = {3.0};  // analytic d/dt of t^2/2 at t = 3

  const GradCheckReport ok = finite_diff_check(loss, store);
  CHECK(ok.pass);
  CHECK(ok.max_rel_err < 1e-6);

  p.grad.data = {6.0};  // deliberately corrupted (x2)
  const GradCheckReport bad = finite_diff_check(loss, store);
  CHECK_FALSE(bad.pass);
}

TEST_CASE("finite_diff_check rejects a non-deterministic loss") {
  ParamStore store;
  store.add("theta", 1, 1);
  int calls = 0;
  auto loss = [&calls](ParamStore&) { return static_cast<double>(calls++); };
  CHECK_THROWS_AS(finite_diff_check(loss, store), ContractError);
}

TEST_CASE("rng streams are reproducible and forkable") {
  RngStream a(42), b(42);
  for (int i = 0; i < 10; ++i) CHECK(a.next_u64() == b.next_u64());

  RngStream c(42);
  RngStream f1 = c.fork(7), f2 = c.fork(7), f3 = c.fork(8);
  CHECK(f1.next_u64() == f2.next_u64());
  CHECK(f1.next_u64() != f3.next_u64());

  // Normal draws are standard-normal-ish: mean ~ 0, variance ~ 1.
  RngStream n(4242);
  double sum = 0.0, sq = 0.0;
  const int count = 20000;
  for (int i = 0; i < count; ++i) {
    const double v = n.normal();
    sum += v;
    sq += v * v;
  }
  CHECK(sum / count == doctest::Approx(0.0).epsilon(0.05));
  CHECK(std::abs(sum / count) < 0.05);
  CHECK(sq / count == doctest::Approx(1.0).epsilon(0.05));
}

TEST_CASE("uniform-scaled init stays within the fan-in bound and zeroes biases") {
  ParamStore store;
  store.add("W", 4, 16);
  store.add("b", 4, 1);
  RngStream rng(3);
  store.init_uniform_scaled(rng);
  const double bound = 1.0 / 4.0;
  for (double v : store.get("W").value.data) {
    CHECK(v >= -bound);
    CHECK(v <= bound);
  }
  for (double v : store.get("b").value.data) CHECK(v == 0.0);
}
