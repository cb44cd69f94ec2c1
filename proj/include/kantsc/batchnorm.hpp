#pragma once

#include "kantsc/layer.hpp"

namespace kantsc {

// 1-D batch normalization over the feature dimension of [batch, features].
// Train mode normalizes by batch statistics (variance with 1/batch) and
// updates running statistics; eval mode is a per-sample affine map using the
// running statistics.
class BatchNorm1d : public Layer {
 public:
  explicit BatchNorm1d(std::size_t features, std::string name_prefix = "bn");

  Tensor forward(const Tensor& x) override;
  Tensor backward(const Tensor& upstream) override;
  std::vector<Param*> params() override { return {&gamma, &beta}; }
  std::string kind() const override { return "batchnorm"; }

  Param gamma;
  Param beta;
  Tensor running_mean;
  Tensor running_var;
  double momentum = 0.1;
  double eps = 1e-5;

  std::size_t features() const { return features_; }

 private:
  std::size_t features_;
  // forward caches
  bool have_cache_ = false;
  bool cached_train_ = false;
  Tensor xhat_;     // normalized pre-affine values
  Tensor inv_std_;  // per-feature 1/sqrt(var + eps) used in forward
};

}  // namespace kantsc
