#pragma once

#include <memory>
#include <utility>

#include "kantsc/batchnorm.hpp"
#include "kantsc/bspline.hpp"
#include "kantsc/layer.hpp"
#include "kantsc/rng.hpp"

namespace kantsc {

// KAN layer: input batch normalization, then per-edge learnable activations
//   y_q = sum_p w_base[q,p] * silu(xh_p)
//       + sum_p scaler[q,p] * sum_i coef[q,p,i] * B_i(xh_p)
// with either path removable through the ablation flags. The spline weight
// of each edge is kept as a per-edge coefficient vector plus a standalone
// scalar multiplier, so each edge carries (G + k) + 1 spline parameters and
// 1 base parameter.
class KanLayer : public Layer {
 public:
  KanLayer(std::size_t in_dim, std::size_t out_dim, SplineSpec spec,
           bool use_base = true, bool use_spline = true,
           std::string name_prefix = "kan");

  void init(Rng& rng);

  Tensor forward(const Tensor& x) override;
  Tensor backward(const Tensor& upstream) override;
  std::vector<Param*> params() override;
  void set_train(bool train) override;
  std::string kind() const override { return "kan"; }

  // The two addends of the layer output, evaluated without disturbing the
  // backward cache. base + spline == forward(x) bitwise.
  std::pair<Tensor, Tensor> component_outputs(const Tensor& x);

  std::size_t in_dim() const { return in_dim_; }
  std::size_t out_dim() const { return out_dim_; }
  const SplineSpec& spec() const { return spec_; }
  bool use_base() const { return use_base_; }
  bool use_spline() const { return use_spline_; }

  // Effective spline weight of basis i on edge (q, p): scaler * coef.
  double effective_spline_weight(std::size_t q, std::size_t p, std::size_t i) const;
  void set_effective_spline_weight(std::size_t q, std::size_t p, std::size_t i,
                                   double w);

  Param w_base;        // [out, in]
  Param spline_coef;   // [out, in, G + k]
  Param spline_scaler; // [out, in]
  BatchNorm1d bn;      // over in_dim, applied to the layer input

 private:
  struct BasisCache {
    std::vector<int> span;      // [batch * in]
    std::vector<double> vals;   // [batch * in * (k+1)]
    std::vector<double> grads;  // [batch * in * (k+1)]
  };

  // Shared core of forward/component_outputs; fills caches when `cache` set.
  void eval_paths(const Tensor& x, Tensor* base_out, Tensor* spline_out,
                  bool cache);

  // Folds the per-edge scaler into the coefficients so the forward inner
  // loops touch one weight array.
  void build_scaled_coef();

  std::size_t in_dim_;
  std::size_t out_dim_;
  SplineSpec spec_;
  bool use_base_;
  bool use_spline_;

  // forward caches
  bool have_cache_ = false;
  Tensor xhat_;           // batch-normalized input
  Tensor silu_vals_;      // silu(xhat)
  Tensor silu_grads_;     // silu'(xhat)
  BasisCache basis_;
  std::vector<double> scaled_coef_;  // scratch, never serialized
};

}  // namespace kantsc
