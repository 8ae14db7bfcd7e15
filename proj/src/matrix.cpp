#include "gcalstm/matrix.hpp"

#include <cmath>

#include "gcalstm/errors.hpp"

namespace gcalstm {

Vec affine(const DenseMatrix& W, const Vec& b, const Vec& x, const std::string& who) {
  if (W.cols != x.size()) {
    throw ShapeError(who + ": matrix is " + std::to_string(W.rows) + "x" + std::to_string(W.cols) +
                     " but input has length " + std::to_string(x.size()));
  }
  if (b.size() != W.rows) {
    throw ShapeError(who + ": bias has length " + std::to_string(b.size()) + " but matrix has " +
                     std::to_string(W.rows) + " rows");
  }
  Vec y(b);
  const double* w = W.data.data();
  for (std::size_t r = 0; r < W.rows; ++r, w += W.cols) {
    double acc = 0.0;
    for (std::size_t c = 0; c < W.cols; ++c) acc += w[c] * x[c];
    y[r] += acc;
  }
  return y;
}

void matvec(const DenseMatrix& W, const double* x, double* y) {
  const double* w = W.data.data();
  for (std::size_t r = 0; r < W.rows; ++r, w += W.cols) {
    double acc = 0.0;
    for (std::size_t c = 0; c < W.cols; ++c) acc += w[c] * x[c];
    y[r] = acc;
  }
}

void matvec_transpose_add(const DenseMatrix& W, const double* g, double* x) {
  const double* w = W.data.data();
  for (std::size_t r = 0; r < W.rows; ++r, w += W.cols) {
    const double gr = g[r];
    if (gr == 0.0) continue;
    for (std::size_t c = 0; c < W.cols; ++c) x[c] += w[c] * gr;
  }
}

void outer_add(DenseMatrix& W, const double* g, const double* x) {
  double* w = W.data.data();
  for (std::size_t r = 0; r < W.rows; ++r, w += W.cols) {
    const double gr = g[r];
    if (gr == 0.0) continue;
    for (std::size_t c = 0; c < W.cols; ++c) w[c] += gr * x[c];
  }
}

bool all_finite(const double* v, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    if (!std::isfinite(v[i])) return false;
  }
  return true;
}

bool all_finite(const Vec& v) { return all_finite(v.data(), v.size()); }
bool all_finite(const DenseMatrix& m) { return all_finite(m.data.data(), m.data.size()); }

}  // namespace gcalstm
