#pragma once

#include <utility>
#include <vector>

#include "kantsc/tensor.hpp"

namespace kantsc {

struct LossResult {
  double loss = 0.0;
  Tensor grad;  // dLoss/dLogits, [batch, m]
};

// Mean softmax cross-entropy with max-subtraction; grad = (softmax - onehot)/batch.
LossResult cross_entropy_loss(const Tensor& logits, const std::vector<int>& labels);

std::vector<int> argmax_rows(const Tensor& logits);

}  // namespace kantsc
