#include "kantsc/mlp_layers.hpp"

#include <cmath>

namespace kantsc {

LinearLayer::LinearLayer(std::size_t in_dim, std::size_t out_dim,
                         std::string name_prefix)
    : in_dim_(in_dim), out_dim_(out_dim) {
  W = Param(name_prefix + ".W", Tensor::zeros({out_dim, in_dim}));
  b = Param(name_prefix + ".b", Tensor::zeros({out_dim}));
}

void LinearLayer::init(Rng& rng) {
  const double bound = std::sqrt(6.0 / static_cast<double>(in_dim_));
  for (double& w : W.value.data) w = rng.uniform(-bound, bound);
  b.value.fill(0.0);
}

Tensor LinearLayer::forward(const Tensor& x) {
  if (x.shape.size() != 2 || x.shape[1] != in_dim_)
    throw ConfigError("linear: expected [batch, " + std::to_string(in_dim_) +
                      "] input, got cols=" +
                      std::to_string(x.shape.size() == 2 ? x.shape[1] : 0));
  const std::size_t batch = x.shape[0];
  Tensor y({batch, out_dim_});
  for (std::size_t i = 0; i < batch; ++i) {
    const double* xr = &x.data[i * in_dim_];
    for (std::size_t q = 0; q < out_dim_; ++q) {
      const double* wr = &W.value.data[q * in_dim_];
      double acc = b.value.data[q];
      for (std::size_t p = 0; p < in_dim_; ++p) acc += wr[p] * xr[p];
      y.data[i * out_dim_ + q] = acc;
    }
  }
  x_cache_ = x;
  have_cache_ = true;
  return y;
}

Tensor LinearLayer::backward(const Tensor& upstream) {
  if (!have_cache_) throw StateError("linear: backward before forward");
  const std::size_t batch = x_cache_.shape[0];
  if (upstream.shape.size() != 2 || upstream.shape[0] != batch ||
      upstream.shape[1] != out_dim_)
    throw ConfigError("linear: upstream shape mismatch");

  Tensor dx({batch, in_dim_});
  for (std::size_t i = 0; i < batch; ++i) {
    const double* ur = &upstream.data[i * out_dim_];
    const double* xr = &x_cache_.data[i * in_dim_];
    double* dxr = &dx.data[i * in_dim_];
    for (std::size_t q = 0; q < out_dim_; ++q) {
      const double u = ur[q];
      b.grad.data[q] += u;
      const double* wr = &W.value.data[q * in_dim_];
      double* gwr = &W.grad.data[q * in_dim_];
      for (std::size_t p = 0; p < in_dim_; ++p) {
        gwr[p] += u * xr[p];
        dxr[p] += u * wr[p];
      }
    }
  }
  return dx;
}

Tensor ReluLayer::forward(const Tensor& x) {
  Tensor y(x.shape);
  for (std::size_t i = 0; i < x.data.size(); ++i)
    y.data[i] = x.data[i] > 0.0 ? x.data[i] : 0.0;
  x_cache_ = x;
  have_cache_ = true;
  return y;
}

Tensor ReluLayer::backward(const Tensor& upstream) {
  if (!have_cache_) throw StateError("relu: backward before forward");
  if (upstream.shape != x_cache_.shape)
    throw ConfigError("relu: upstream shape mismatch");
  Tensor dx(upstream.shape);
  // subgradient 0 at exactly x == 0
  for (std::size_t i = 0; i < dx.data.size(); ++i)
    dx.data[i] = x_cache_.data[i] > 0.0 ? upstream.data[i] : 0.0;
  return dx;
}

DropoutLayer::DropoutLayer(double rate, Rng* rng) : rate_(rate), rng_(rng) {
  if (rate < 0.0 || rate >= 1.0)
    throw ConfigError("dropout: rate must be in [0, 1)");
}

Tensor DropoutLayer::forward(const Tensor& x) {
  if (!train_mode_ || rate_ == 0.0) {
    mask_ = Tensor::full(x.shape, 1.0);
    have_cache_ = true;
    return x;
  }
  const double scale = 1.0 / (1.0 - rate_);
  mask_ = Tensor(x.shape);
  Tensor y(x.shape);
  for (std::size_t i = 0; i < x.data.size(); ++i) {
    const double keep = rng_->uniform() >= rate_ ? scale : 0.0;
    mask_.data[i] = keep;
    y.data[i] = keep * x.data[i];
  }
  have_cache_ = true;
  return y;
}

Tensor DropoutLayer::backward(const Tensor& upstream) {
  if (!have_cache_) throw StateError("dropout: backward before forward");
  if (upstream.shape != mask_.shape)
    throw ConfigError("dropout: upstream shape mismatch");
  Tensor dx(upstream.shape);
  for (std::size_t i = 0; i < dx.data.size(); ++i)
    dx.data[i] = upstream.data[i] * mask_.data[i];
  return dx;
}

}  // namespace kantsc
