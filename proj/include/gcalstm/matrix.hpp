#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace gcalstm {

using Vec = std::vector<double>;

// Dense row-major matrix of doubles. The only tensor type in the project;
// vectors are matrices with cols == 1 where a shape matters, plain Vec otherwise.
struct DenseMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  Vec data;  // rows * cols, row-major

  DenseMatrix() = default;
  DenseMatrix(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c, 0.0) {}

  double& at(std::size_t r, std::size_t c) { return data[r * cols + c]; }
  double at(std::size_t r, std::size_t c) const { return data[r * cols + c]; }

  std::size_t size() const { return rows * cols; }
  bool same_shape(const DenseMatrix& o) const { return rows == o.rows && cols == o.cols; }
  void set_zero() { data.assign(data.size(), 0.0); }
};

// y = W x + b. Throws ShapeError naming `who` on dimension mismatch.
Vec affine(const DenseMatrix& W, const Vec& b, const Vec& x, const std::string& who);

// y = W x, y preallocated to W.rows. No shape checks; internal hot path.
void matvec(const DenseMatrix& W, const double* x, double* y);

// x += W^T g, x preallocated to W.cols.
void matvec_transpose_add(const DenseMatrix& W, const double* g, double* x);

// W += g x^T with g of length W.rows, x of length W.cols.
void outer_add(DenseMatrix& W, const double* g, const double* x);

bool all_finite(const double* v, std::size_t n);
bool all_finite(const Vec& v);
bool all_finite(const DenseMatrix& m);

}  // namespace gcalstm
