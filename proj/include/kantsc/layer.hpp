#pragma once

#include <string>
#include <vector>

#include "kantsc/tensor.hpp"

namespace kantsc {

// Learnable value with a same-shaped gradient accumulator.
struct Param {
  std::string name;
  Tensor value;
  Tensor grad;

  Param() = default;
  Param(std::string n, Tensor v) : name(std::move(n)), value(std::move(v)) {
    grad = Tensor(value.shape);
  }

  void zero_grad() { grad.fill(0.0); }
  std::size_t numel() const { return value.numel(); }
};

// Differentiable-layer contract. forward caches whatever backward needs;
// backward returns dLoss/dInput and accumulates (+=) into Param::grad.
class Layer {
 public:
  virtual ~Layer() = default;

  virtual Tensor forward(const Tensor& x) = 0;
  virtual Tensor backward(const Tensor& upstream) = 0;

  virtual std::vector<Param*> params() { return {}; }
  virtual void set_train(bool train) { train_mode_ = train; }
  bool train_mode() const { return train_mode_; }

  virtual std::string kind() const = 0;

  void zero_grads() {
    for (Param* p : params()) p->zero_grad();
  }

 protected:
  bool train_mode_ = false;
};

}  // namespace kantsc
