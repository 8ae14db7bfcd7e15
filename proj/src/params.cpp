#include "gcalstm/params.hpp"

#include <cmath>

#include "gcalstm/errors.hpp"

namespace gcalstm {

ParamTensor& ParamStore::add(const std::string& name, std::size_t rows, std::size_t cols, int iteration) {
  if (has(name)) throw ContractError("ParamStore: duplicate tensor name '" + name + "'");
  index_[name] = tensors_.size();
  tensors_.emplace_back(name, rows, cols, iteration);
  return tensors_.back();
}

ParamTensor& ParamStore::get(const std::string& name) {
  auto it = index_.find(name);
  if (it == index_.end()) throw ContractError("ParamStore: unknown tensor '" + name + "'");
  return tensors_[it->second];
}

const ParamTensor& ParamStore::get(const std::string& name) const {
  auto it = index_.find(name);
  if (it == index_.end()) throw ContractError("ParamStore: unknown tensor '" + name + "'");
  return tensors_[it->second];
}

std::size_t ParamStore::scalar_count() const {
  std::size_t n = 0;
  for (const auto& t : tensors_) n += t.value.size();
  return n;
}

void ParamStore::zero_grads() {
  for (auto& t : tensors_) t.grad.set_zero();
}

void ParamStore::set_all_trainable(bool trainable) {
  for (auto& t : tensors_) t.trainable = trainable;
}

void ParamStore::set_trainable_up_to_iteration(int n) {
  for (auto& t : tensors_) t.trainable = t.iteration <= n;
}

void ParamStore::sgd_step(double lr, double momentum) {
  for (auto& t : tensors_) {
    if (!t.trainable) continue;
    if (!all_finite(t.grad)) {
      throw DivergenceError("sgd_step: non-finite gradient in tensor '" + t.name + "'");
    }
    for (std::size_t i = 0; i < t.value.size(); ++i) {
      t.momentum.data[i] = momentum * t.momentum.data[i] + t.grad.data[i];
      t.value.data[i] -= lr * t.momentum.data[i];
    }
  }
}

void ParamStore::clip_grad_norm(double max_norm) {
  if (max_norm <= 0.0) return;
  double sq = 0.0;
  for (const auto& t : tensors_) {
    if (!t.trainable) continue;
    for (double g : t.grad.data) sq += g * g;
  }
  const double norm = std::sqrt(sq);
  if (norm > max_norm) scale_grads(max_norm / norm);
}

void ParamStore::scale_grads(double factor) {
  for (auto& t : tensors_) {
    if (!t.trainable) continue;
    for (double& g : t.grad.data) g *= factor;
  }
}

void ParamStore::init_uniform_scaled(RngStream& rng) {
  for (auto& t : tensors_) {
    if (t.value.cols == 1) {
      t.value.set_zero();
      continue;
    }
    const double bound = 1.0 / std::sqrt(static_cast<double>(t.value.cols));
    for (double& v : t.value.data) v = rng.uniform(-bound, bound);
  }
}

void ParamStore::init_gaussian(double stddev, RngStream& rng) {
  for (auto& t : tensors_) {
    if (t.value.cols == 1) {
      t.value.set_zero();
      continue;
    }
    for (double& v : t.value.data) v = stddev * rng.normal();
  }
}

void ParamStore::init(InitFamily family, double gaussian_stddev, RngStream& rng) {
  if (family == InitFamily::uniform_scaled) {
    init_uniform_scaled(rng);
  } else {
    init_gaussian(gaussian_stddev, rng);
  }
}

}  // namespace gcalstm
