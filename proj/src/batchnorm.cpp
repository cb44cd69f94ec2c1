#include "kantsc/batchnorm.hpp"

#include <cmath>

namespace kantsc {

BatchNorm1d::BatchNorm1d(std::size_t features, std::string name_prefix)
    : features_(features) {
  gamma = Param(name_prefix + ".gamma", Tensor::full({features}, 1.0));
  beta = Param(name_prefix + ".beta", Tensor::zeros({features}));
  running_mean = Tensor::zeros({features});
  running_var = Tensor::full({features}, 1.0);
}

Tensor BatchNorm1d::forward(const Tensor& x) {
  if (x.shape.size() != 2 || x.shape[1] != features_)
    throw ConfigError("batchnorm: expected [batch, " + std::to_string(features_) +
                      "] input");
  const std::size_t batch = x.shape[0];
  Tensor y(x.shape);
  inv_std_ = Tensor::zeros({features_});
  xhat_ = Tensor(x.shape);
  cached_train_ = train_mode_;
  have_cache_ = true;

  if (train_mode_) {
    if (batch < 2)
      throw ConfigError("batchnorm: train mode requires batch >= 2");
    for (std::size_t f = 0; f < features_; ++f) {
      double mean = 0.0;
      for (std::size_t b = 0; b < batch; ++b) mean += x.at(b, f);
      mean /= static_cast<double>(batch);
      double var = 0.0;
      for (std::size_t b = 0; b < batch; ++b) {
        const double d = x.at(b, f) - mean;
        var += d * d;
      }
      var /= static_cast<double>(batch);
      const double istd = 1.0 / std::sqrt(var + eps);
      inv_std_.data[f] = istd;
      for (std::size_t b = 0; b < batch; ++b) {
        const double xh = (x.at(b, f) - mean) * istd;
        xhat_.at(b, f) = xh;
        y.at(b, f) = gamma.value.data[f] * xh + beta.value.data[f];
      }
      running_mean.data[f] = (1.0 - momentum) * running_mean.data[f] + momentum * mean;
      running_var.data[f] = (1.0 - momentum) * running_var.data[f] + momentum * var;
    }
  } else {
    for (std::size_t f = 0; f < features_; ++f) {
      const double istd = 1.0 / std::sqrt(running_var.data[f] + eps);
      inv_std_.data[f] = istd;
      const double mean = running_mean.data[f];
      for (std::size_t b = 0; b < batch; ++b) {
        const double xh = (x.at(b, f) - mean) * istd;
        xhat_.at(b, f) = xh;
        y.at(b, f) = gamma.value.data[f] * xh + beta.value.data[f];
      }
    }
  }
  return y;
}

Tensor BatchNorm1d::backward(const Tensor& upstream) {
  if (!have_cache_) throw StateError("batchnorm: backward before forward");
  if (upstream.shape != xhat_.shape)
    throw ConfigError("batchnorm: upstream shape mismatch");
  const std::size_t batch = upstream.shape[0];
  Tensor dx(upstream.shape);

  for (std::size_t f = 0; f < features_; ++f) {
    double sum_du = 0.0;
    double sum_du_xhat = 0.0;
    for (std::size_t b = 0; b < batch; ++b) {
      const double du = upstream.at(b, f);
      sum_du += du;
      sum_du_xhat += du * xhat_.at(b, f);
    }
    gamma.grad.data[f] += sum_du_xhat;
    beta.grad.data[f] += sum_du;

    const double g = gamma.value.data[f];
    const double istd = inv_std_.data[f];
    if (cached_train_) {
      const double n = static_cast<double>(batch);
      for (std::size_t b = 0; b < batch; ++b) {
        const double du = upstream.at(b, f);
        dx.at(b, f) =
            g * istd * (du - sum_du / n - xhat_.at(b, f) * sum_du_xhat / n);
      }
    } else {
      for (std::size_t b = 0; b < batch; ++b)
        dx.at(b, f) = upstream.at(b, f) * g * istd;
    }
  }
  return dx;
}

}  // namespace kantsc
