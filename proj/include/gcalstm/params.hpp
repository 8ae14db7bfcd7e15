#pragma once

#include <cstdint>
#include <deque>
#include <map>
#include <string>
#include <vector>

#include "gcalstm/matrix.hpp"
#include "gcalstm/rng.hpp"

namespace gcalstm {

// One learnable weight group: value, gradient accumulator, and momentum buffer,
// all the same shape. `iteration` records the first attention iteration that
// uses the tensor (0 = initialization subnetwork) and drives stepwise freezing.
struct ParamTensor {
  std::string name;
  DenseMatrix value;
  DenseMatrix grad;
  DenseMatrix momentum;
  bool trainable = true;
  int iteration = 0;

  ParamTensor() = default;
  ParamTensor(std::string n, std::size_t rows, std::size_t cols, int iter)
      : name(std::move(n)), value(rows, cols), grad(rows, cols), momentum(rows, cols), iteration(iter) {}
};

enum class InitFamily { uniform_scaled, gaussian };

// All learnable tensors of a model, addressable by name and filterable by
// attention-iteration index. Registration order is stable and defines the
// serialization and update order.
class ParamStore {
 public:
  ParamTensor& add(const std::string& name, std::size_t rows, std::size_t cols, int iteration = 0);

  bool has(const std::string& name) const { return index_.count(name) != 0; }
  ParamTensor& get(const std::string& name);
  const ParamTensor& get(const std::string& name) const;

  std::deque<ParamTensor>& tensors() { return tensors_; }
  const std::deque<ParamTensor>& tensors() const { return tensors_; }

  std::size_t scalar_count() const;

  void zero_grads();
  void set_all_trainable(bool trainable);
  // Marks tensors with iteration <= n trainable, the rest frozen.
  void set_trainable_up_to_iteration(int n);

  // m <- momentum * m + grad; value <- value - lr * m, for trainable tensors.
  // Throws DivergenceError naming the tensor on a non-finite gradient.
  void sgd_step(double lr, double momentum);

  // Scales gradients of trainable tensors so their global L2 norm is at most
  // max_norm. No-op when max_norm <= 0.
  void clip_grad_norm(double max_norm);
  void scale_grads(double factor);

  // Weights uniform in [-1/sqrt(fan_in), +1/sqrt(fan_in)] with fan_in = cols;
  // single-column tensors (biases) are zeroed.
  void init_uniform_scaled(RngStream& rng);
  // Weights from N(0, stddev^2); biases zeroed.
  void init_gaussian(double stddev, RngStream& rng);
  void init(InitFamily family, double gaussian_stddev, RngStream& rng);

 private:
  std::deque<ParamTensor> tensors_;  // deque keeps references stable across add()
  std::map<std::string, std::size_t> index_;
};

}  // namespace gcalstm
