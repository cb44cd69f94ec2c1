#include "kantsc/optim.hpp"

#include <cmath>

namespace kantsc {

AdamW::AdamW(std::vector<Param*> params, double weight_decay, double beta1,
             double beta2, double eps)
    : params_(std::move(params)),
      weight_decay_(weight_decay),
      beta1_(beta1),
      beta2_(beta2),
      eps_(eps) {
  m_.reserve(params_.size());
  v_.reserve(params_.size());
  for (Param* p : params_) {
    m_.push_back(Tensor::zeros(p->value.shape));
    v_.push_back(Tensor::zeros(p->value.shape));
  }
}

void AdamW::step(double lr) {
  ++t_;
  const double bc1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
  const double bc2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
  for (std::size_t pi = 0; pi < params_.size(); ++pi) {
    Param* p = params_[pi];
    double* theta = p->value.data.data();
    const double* g = p->grad.data.data();
    double* m = m_[pi].data.data();
    double* v = v_[pi].data.data();
    const std::size_t n = p->value.numel();
    for (std::size_t i = 0; i < n; ++i) {
      m[i] = beta1_ * m[i] + (1.0 - beta1_) * g[i];
      v[i] = beta2_ * v[i] + (1.0 - beta2_) * g[i] * g[i];
      const double mhat = m[i] / bc1;
      const double vhat = v[i] / bc2;
      theta[i] -= lr * weight_decay_ * theta[i];
      theta[i] -= lr * mhat / (std::sqrt(vhat) + eps_);
    }
  }
}

}  // namespace kantsc
