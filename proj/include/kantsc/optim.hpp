#pragma once

#include <vector>

#include "kantsc/layer.hpp"

namespace kantsc {

// AdamW with decoupled weight decay:
//   theta <- theta - lr*wd*theta - lr * mhat / (sqrt(vhat) + eps)
// Moment state is kept per parameter in registration order.
class AdamW {
 public:
  AdamW(std::vector<Param*> params, double weight_decay, double beta1 = 0.9,
        double beta2 = 0.999, double eps = 1e-8);

  void step(double lr);

  std::size_t steps_taken() const { return t_; }
  double weight_decay() const { return weight_decay_; }

 private:
  std::vector<Param*> params_;
  std::vector<Tensor> m_;
  std::vector<Tensor> v_;
  double weight_decay_;
  double beta1_;
  double beta2_;
  double eps_;
  std::size_t t_ = 0;
};

}  // namespace kantsc
