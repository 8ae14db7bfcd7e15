#include "gcalstm/activations.hpp"

#include <algorithm>
#include <cmath>

#include "gcalstm/errors.hpp"

namespace gcalstm {

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

Vec sigmoid(const Vec& x) {
  Vec y(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) y[i] = sigmoid(x[i]);
  return y;
}

Vec tanh_act(const Vec& x) {
  Vec y(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) y[i] = std::tanh(x[i]);
  return y;
}

Vec relu(const Vec& x) {
  Vec y(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) y[i] = std::max(0.0, x[i]);
  return y;
}

Vec softmax_flat(const Vec& scores) {
  if (scores.empty()) throw ContractError("softmax_flat: empty score list");
  const double m = *std::max_element(scores.begin(), scores.end());
  Vec y(scores.size());
  double denom = 0.0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    y[i] = std::exp(scores[i] - m);
    denom += y[i];
  }
  for (double& v : y) v /= denom;
  return y;
}

Vec softmax_backward(const Vec& y, const Vec& dy) {
  double dot = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) dot += y[i] * dy[i];
  Vec dz(y.size());
  for (std::size_t i = 0; i < y.size(); ++i) dz[i] = y[i] * (dy[i] - dot);
  return dz;
}

Vec dropout_mask(std::size_t len, double p_drop, RngStream& rng) {
  if (p_drop < 0.0 || p_drop >= 1.0) {
    throw ContractError("dropout_mask: p_drop must lie in [0, 1), got " + std::to_string(p_drop));
  }
  Vec mask(len, 1.0);
  if (p_drop == 0.0) return mask;
  const double keep_scale = 1.0 / (1.0 - p_drop);
  for (std::size_t i = 0; i < len; ++i) {
    mask[i] = rng.uniform() < p_drop ? 0.0 : keep_scale;
  }
  return mask;
}

}  // namespace gcalstm
