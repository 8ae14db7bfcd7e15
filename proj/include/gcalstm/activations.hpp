#pragma once

#include "gcalstm/matrix.hpp"
#include "gcalstm/rng.hpp"

namespace gcalstm {

double sigmoid(double x);

Vec sigmoid(const Vec& x);
Vec tanh_act(const Vec& x);
Vec relu(const Vec& x);

// Max-subtracted softmax over a flat score list. Output sums to 1 within 1e-9
// and preserves the argmax. Throws ContractError on empty input.
Vec softmax_flat(const Vec& scores);

// Given y = softmax(z) and dL/dy, returns dL/dz = y .* (dy - <dy, y>).
Vec softmax_backward(const Vec& y, const Vec& dy);

// Inverted-dropout mask: entries are 0 with probability p_drop, else
// 1/(1 - p_drop). Evaluation uses an all-ones mask instead of calling this.
// Throws ContractError unless 0 <= p_drop < 1.
Vec dropout_mask(std::size_t len, double p_drop, RngStream& rng);

}  // namespace gcalstm
