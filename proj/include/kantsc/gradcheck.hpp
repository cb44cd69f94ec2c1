#pragma once

#include <functional>
#include <string>
#include <vector>

#include "kantsc/layer.hpp"
#include "kantsc/model.hpp"
#include "kantsc/rng.hpp"

namespace kantsc {

// Outcome of one analytic-vs-finite-difference comparison sweep. Coordinates
// whose analytic and numeric magnitudes both sit below the finite-difference
// noise floor are excluded from the relative statistic (counted in
// `skipped`) after an absolute sanity bound.
struct CheckReport {
  double max_rel_err = 0.0;
  std::string worst_item;  // "input[3]" or "L0.kan.w_base[17]"
  bool pass = false;
  double tolerance = 0.0;
  std::size_t compared = 0;
  std::size_t skipped = 0;
};

// Central finite differences of sum(forward(x)) against the analytic input
// and parameter gradients. The callable under test must be deterministic
// (dropout off, batch norm in eval or frozen-stat mode). Relative error uses
// denominator max(|a|, |b|, 1e-8).
CheckReport grad_check_fn(const std::function<Tensor(const Tensor&)>& fwd,
                          const std::function<Tensor(const Tensor&)>& bwd,
                          const std::vector<Param*>& params,
                          std::function<void()> zero_grads, const Tensor& x,
                          double epsilon, double tolerance);

CheckReport grad_check(Layer& layer, const Tensor& x, double epsilon,
                       double tolerance);

CheckReport grad_check(Model& model, const Tensor& x, double epsilon,
                       double tolerance);

// Uniform draw from (lo, hi) resampled until at least `margin` away from
// every point in `avoid`; used to keep finite differences off ReLU kinks and
// spline knots.
double sample_away_from(Rng& rng, double lo, double hi,
                        const std::vector<double>& avoid, double margin);

}  // namespace kantsc
