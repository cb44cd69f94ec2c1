#pragma once

#include "kantsc/layer.hpp"
#include "kantsc/rng.hpp"

namespace kantsc {

// y = x W^T + b
class LinearLayer : public Layer {
 public:
  LinearLayer(std::size_t in_dim, std::size_t out_dim,
              std::string name_prefix = "linear");

  void init(Rng& rng);

  Tensor forward(const Tensor& x) override;
  Tensor backward(const Tensor& upstream) override;
  std::vector<Param*> params() override { return {&W, &b}; }
  std::string kind() const override { return "linear"; }

  std::size_t in_dim() const { return in_dim_; }
  std::size_t out_dim() const { return out_dim_; }

  Param W;  // [out, in]
  Param b;  // [out]

 private:
  std::size_t in_dim_;
  std::size_t out_dim_;
  Tensor x_cache_;
  bool have_cache_ = false;
};

class ReluLayer : public Layer {
 public:
  Tensor forward(const Tensor& x) override;
  Tensor backward(const Tensor& upstream) override;
  std::string kind() const override { return "relu"; }

 private:
  Tensor x_cache_;
  bool have_cache_ = false;
};

// Inverted dropout: train mode zeroes each element with probability `rate`
// and scales survivors by 1/(1-rate); eval mode is the identity.
class DropoutLayer : public Layer {
 public:
  DropoutLayer(double rate, Rng* rng);

  Tensor forward(const Tensor& x) override;
  Tensor backward(const Tensor& upstream) override;
  std::string kind() const override { return "dropout"; }

  double rate() const { return rate_; }

 private:
  double rate_;
  Rng* rng_;  // owned by the model; shared stream keeps runs reproducible
  Tensor mask_;
  bool have_cache_ = false;
};

}  // namespace kantsc
