#include "kantsc/kan_layer.hpp"

#include <cmath>
#include <cstring>

#include "kantsc/activations.hpp"

namespace kantsc {

namespace {

// Samples per block: weight rows stream once per block instead of once per
// sample, and the per-sample basis windows stay cache-resident.
constexpr std::size_t kBlock = 16;
// Input-feature tile; one block x tile of basis windows fits in L1.
constexpr std::size_t kTile = 32;

}  // namespace

KanLayer::KanLayer(std::size_t in_dim, std::size_t out_dim, SplineSpec spec,
                   bool use_base, bool use_spline, std::string name_prefix)
    : bn(in_dim, name_prefix + ".bn"),
      in_dim_(in_dim),
      out_dim_(out_dim),
      spec_(std::move(spec)),
      use_base_(use_base),
      use_spline_(use_spline) {
  if (!use_base_ && !use_spline_)
    throw ConfigError("kan: at least one of base and spline paths must be enabled");
  const std::size_t nb = static_cast<std::size_t>(spec_.num_basis());
  w_base = Param(name_prefix + ".w_base", Tensor::zeros({out_dim, in_dim}));
  spline_coef = Param(name_prefix + ".spline_coef", Tensor::zeros({out_dim, in_dim, nb}));
  spline_scaler = Param(name_prefix + ".spline_scaler", Tensor::zeros({out_dim, in_dim}));
}

void KanLayer::init(Rng& rng) {
  if (use_base_) {
    const double bound = std::sqrt(6.0 / static_cast<double>(in_dim_));
    for (double& w : w_base.value.data) w = rng.uniform(-bound, bound);
  }
  if (use_spline_) {
    const double s =
        0.1 / std::sqrt(static_cast<double>(in_dim_ * spec_.num_basis()));
    for (double& w : spline_coef.value.data) w = rng.uniform(-s, s);
    spline_scaler.value.fill(1.0);
  }
  // Unit-variance BN would push ~32% of the layer inputs outside the spline
  // grid interval where the basis only extrapolates; starting the BN scale at
  // 1/3 keeps ~99.7% of the mass inside [-1, 1]. The scale stays learnable.
  bn.gamma.value.fill(1.0 / 3.0);
  bn.beta.value.fill(0.0);
}

std::vector<Param*> KanLayer::params() {
  std::vector<Param*> out;
  if (use_base_) out.push_back(&w_base);
  if (use_spline_) {
    out.push_back(&spline_coef);
    out.push_back(&spline_scaler);
  }
  out.push_back(&bn.gamma);
  out.push_back(&bn.beta);
  return out;
}

void KanLayer::set_train(bool train) {
  train_mode_ = train;
  bn.set_train(train);
}

double KanLayer::effective_spline_weight(std::size_t q, std::size_t p,
                                         std::size_t i) const {
  return spline_scaler.value.at(q, p) * spline_coef.value.at(q, p, i);
}

void KanLayer::set_effective_spline_weight(std::size_t q, std::size_t p,
                                           std::size_t i, double w) {
  spline_scaler.value.at(q, p) = 1.0;
  spline_coef.value.at(q, p, i) = w;
}

void KanLayer::build_scaled_coef() {
  const std::size_t nb = static_cast<std::size_t>(spec_.num_basis());
  scaled_coef_.resize(out_dim_ * in_dim_ * nb);
  const double* sc = spline_scaler.value.data.data();
  const double* cf = spline_coef.value.data.data();
  for (std::size_t e = 0; e < out_dim_ * in_dim_; ++e) {
    const double s = sc[e];
    for (std::size_t r = 0; r < nb; ++r)
      scaled_coef_[e * nb + r] = s * cf[e * nb + r];
  }
}

void KanLayer::eval_paths(const Tensor& x, Tensor* base_out, Tensor* spline_out,
                          bool cache) {
  if (x.shape.size() != 2 || x.shape[1] != in_dim_)
    throw ConfigError("kan: expected [batch, " + std::to_string(in_dim_) +
                      "] input");
  const std::size_t batch = x.shape[0];
  const int k = spec_.order;
  const std::size_t kk = static_cast<std::size_t>(k + 1);
  const std::size_t nb = static_cast<std::size_t>(spec_.num_basis());

  Tensor xhat = bn.forward(x);

  // Hot path writes into the member caches (no reallocation across calls of
  // the same batch size); the uncached variant keeps its own buffers so it
  // cannot clobber a pending backward.
  Tensor local_sv;
  Tensor local_sg;
  BasisCache local_basis;
  Tensor& silu_vals = cache ? silu_vals_ : local_sv;
  Tensor& silu_grads = cache ? silu_grads_ : local_sg;
  BasisCache& basis = cache ? basis_ : local_basis;
  silu_vals.shape = {batch, in_dim_};
  silu_grads.shape = {batch, in_dim_};
  silu_vals.data.resize(batch * in_dim_);
  silu_grads.data.resize(batch * in_dim_);
  basis.span.resize(batch * in_dim_);
  basis.vals.resize(batch * in_dim_ * kk);
  basis.grads.resize(batch * in_dim_ * kk);

  if (use_base_) {
    for (std::size_t e = 0; e < batch * in_dim_; ++e) {
      const double v = xhat.data[e];
      const double s = 1.0 / (1.0 + std::exp(-v));
      silu_vals.data[e] = v * s;
      silu_grads.data[e] = s * (1.0 + v * (1.0 - s));
    }
  }
  if (use_spline_) {
    for (std::size_t e = 0; e < batch * in_dim_; ++e)
      basis.span[e] = bspline_basis_and_grad_local(
          spec_, xhat.data[e], &basis.vals[e * kk], &basis.grads[e * kk]);
  }

  if (base_out) {
    base_out->shape = {batch, out_dim_};
    base_out->data.resize(batch * out_dim_);
    if (!use_base_) base_out->fill(0.0);
  }
  if (spline_out) {
    spline_out->shape = {batch, out_dim_};
    spline_out->data.resize(batch * out_dim_);
    if (!use_spline_) spline_out->fill(0.0);
  }

  if (use_spline_ && spline_out) build_scaled_coef();

  double acc[kBlock];
  for (std::size_t b0 = 0; b0 < batch; b0 += kBlock) {
    const std::size_t bl = std::min(kBlock, batch - b0);

    if (use_base_ && base_out) {
      const double* sv0 = &silu_vals.data[b0 * in_dim_];
      for (std::size_t p0 = 0; p0 < in_dim_; p0 += kTile) {
        const std::size_t pl = std::min(kTile, in_dim_ - p0);
        for (std::size_t q = 0; q < out_dim_; ++q) {
          const double* wb = &w_base.value.data[q * in_dim_ + p0];
          for (std::size_t bb = 0; bb < bl; ++bb) acc[bb] = 0.0;
          for (std::size_t p = 0; p < pl; ++p) {
            const double w = wb[p];
            for (std::size_t bb = 0; bb < bl; ++bb)
              acc[bb] += w * sv0[bb * in_dim_ + p0 + p];
          }
          if (p0 == 0)
            for (std::size_t bb = 0; bb < bl; ++bb)
              base_out->at(b0 + bb, q) = acc[bb];
          else
            for (std::size_t bb = 0; bb < bl; ++bb)
              base_out->at(b0 + bb, q) += acc[bb];
        }
      }
    }

    if (use_spline_ && spline_out) {
      const double* bv0 = &basis.vals[b0 * in_dim_ * kk];
      const int* span0 = &basis.span[b0 * in_dim_];
      // p tiles keep the block's basis windows L1-resident across the q sweep
      for (std::size_t p0 = 0; p0 < in_dim_; p0 += kTile) {
        const std::size_t pl = std::min(kTile, in_dim_ - p0);
        for (std::size_t q = 0; q < out_dim_; ++q) {
          const double* crowq = &scaled_coef_[(q * in_dim_ + p0) * nb];
          for (std::size_t bb = 0; bb < bl; ++bb) acc[bb] = 0.0;
          for (std::size_t p = 0; p < pl; ++p) {
            const double* crow = crowq + p * nb;
            if (kk == 4) {
              for (std::size_t bb = 0; bb < bl; ++bb) {
                const std::size_t e = bb * in_dim_ + p0 + p;
                const double* cw = crow + (span0[e] - k);
                const double* v = bv0 + e * 4;
                acc[bb] +=
                    cw[0] * v[0] + cw[1] * v[1] + cw[2] * v[2] + cw[3] * v[3];
              }
            } else {
              for (std::size_t bb = 0; bb < bl; ++bb) {
                const std::size_t e = bb * in_dim_ + p0 + p;
                const double* cw = crow + (span0[e] - k);
                const double* v = bv0 + e * kk;
                double edge = 0.0;
                for (std::size_t r = 0; r < kk; ++r) edge += cw[r] * v[r];
                acc[bb] += edge;
              }
            }
          }
          if (p0 == 0)
            for (std::size_t bb = 0; bb < bl; ++bb)
              spline_out->at(b0 + bb, q) = acc[bb];
          else
            for (std::size_t bb = 0; bb < bl; ++bb)
              spline_out->at(b0 + bb, q) += acc[bb];
        }
      }
    }
  }

  if (cache) {
    xhat_ = std::move(xhat);
    have_cache_ = true;
  }
}

Tensor KanLayer::forward(const Tensor& x) {
  Tensor base_out;
  Tensor spline_out;
  eval_paths(x, use_base_ ? &base_out : nullptr,
             use_spline_ ? &spline_out : nullptr, /*cache=*/true);
  const std::size_t batch = x.shape[0];
  Tensor y({batch, out_dim_});
  if (use_base_ && use_spline_) {
    for (std::size_t i = 0; i < y.data.size(); ++i)
      y.data[i] = base_out.data[i] + spline_out.data[i];
  } else if (use_base_) {
    y = std::move(base_out);
  } else {
    y = std::move(spline_out);
  }
  return y;
}

std::pair<Tensor, Tensor> KanLayer::component_outputs(const Tensor& x) {
  // Evaluates exactly like forward would in the current mode, so the two
  // addends sum bitwise to the forward output.
  Tensor base_out;
  Tensor spline_out;
  eval_paths(x, &base_out, &spline_out, /*cache=*/false);
  return {std::move(base_out), std::move(spline_out)};
}

Tensor KanLayer::backward(const Tensor& upstream) {
  if (!have_cache_) throw StateError("kan: backward before forward");
  const std::size_t batch = xhat_.shape[0];
  if (upstream.shape.size() != 2 || upstream.shape[0] != batch ||
      upstream.shape[1] != out_dim_)
    throw ConfigError("kan: upstream shape mismatch");
  const int k = spec_.order;
  const std::size_t kk = static_cast<std::size_t>(k + 1);
  const std::size_t nb = static_cast<std::size_t>(spec_.num_basis());

  Tensor dxhat({batch, in_dim_});
  double ub[kBlock];

  for (std::size_t b0 = 0; b0 < batch; b0 += kBlock) {
    const std::size_t bl = std::min(kBlock, batch - b0);

    if (use_base_) {
      const double* sv0 = &silu_vals_.data[b0 * in_dim_];
      const double* sg0 = &silu_grads_.data[b0 * in_dim_];
      for (std::size_t q = 0; q < out_dim_; ++q) {
        bool any = false;
        for (std::size_t bb = 0; bb < bl; ++bb) {
          ub[bb] = upstream.at(b0 + bb, q);
          any = any || ub[bb] != 0.0;
        }
        if (!any) continue;
        const double* wb = &w_base.value.data[q * in_dim_];
        double* gwb = &w_base.grad.data[q * in_dim_];
        for (std::size_t p = 0; p < in_dim_; ++p) {
          const double w = wb[p];
          double gw = 0.0;
          for (std::size_t bb = 0; bb < bl; ++bb) {
            const std::size_t e = bb * in_dim_ + p;
            gw += ub[bb] * sv0[e];
            dxhat.at(b0 + bb, p) += ub[bb] * w * sg0[e];
          }
          gwb[p] += gw;
        }
      }
    }

    if (use_spline_) {
      const double* bv0 = &basis_.vals[b0 * in_dim_ * kk];
      const double* bg0 = &basis_.grads[b0 * in_dim_ * kk];
      const int* span0 = &basis_.span[b0 * in_dim_];
      for (std::size_t q = 0; q < out_dim_; ++q) {
        bool any = false;
        for (std::size_t bb = 0; bb < bl; ++bb) {
          ub[bb] = upstream.at(b0 + bb, q);
          any = any || ub[bb] != 0.0;
        }
        if (!any) continue;
        const double* sc = &spline_scaler.value.data[q * in_dim_];
        double* gsc = &spline_scaler.grad.data[q * in_dim_];
        const double* coefq = &spline_coef.value.data[q * in_dim_ * nb];
        double* gcoefq = &spline_coef.grad.data[q * in_dim_ * nb];
        for (std::size_t p = 0; p < in_dim_; ++p) {
          const double* crow = coefq + p * nb;
          double* growp = gcoefq + p * nb;
          const double s = sc[p];
          double gs = 0.0;
          for (std::size_t bb = 0; bb < bl; ++bb) {
            const double u = ub[bb];
            if (u == 0.0) continue;
            const std::size_t e = bb * in_dim_ + p;
            const std::size_t off = static_cast<std::size_t>(span0[e] - k);
            const double* cw = crow + off;
            double* gw = growp + off;
            const double* v = bv0 + e * kk;
            const double* g = bg0 + e * kk;
            const double us = u * s;
            double edge_val = 0.0;
            double edge_grad = 0.0;
            for (std::size_t r = 0; r < kk; ++r) {
              edge_val += cw[r] * v[r];
              edge_grad += cw[r] * g[r];
              gw[r] += us * v[r];
            }
            gs += u * edge_val;
            dxhat.at(b0 + bb, p) += us * edge_grad;
          }
          gsc[p] += gs;
        }
      }
    }
  }

  return bn.backward(dxhat);
}

}  // namespace kantsc
