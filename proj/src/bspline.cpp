#include "kantsc/bspline.hpp"

#include <algorithm>
#include <cmath>

namespace kantsc {

SplineSpec SplineSpec::make(int grid_size, int order, double lo, double hi) {
  if (grid_size < 1) throw ConfigError("spline: grid_size must be >= 1");
  if (order < 0) throw ConfigError("spline: order must be >= 0");
  if (order + 1 > 16)
    throw ConfigError("spline: order too large for local evaluation buffers");
  if (!(hi > lo)) throw ConfigError("spline: interval must be non-degenerate");
  SplineSpec spec;
  spec.order = order;
  spec.grid_size = grid_size;
  spec.lo = lo;
  spec.hi = hi;
  const double h = (hi - lo) / grid_size;
  spec.knots.resize(grid_size + 2 * order + 1);
  for (int j = 0; j < static_cast<int>(spec.knots.size()); ++j)
    spec.knots[j] = lo + (j - order) * h;
  spec.inv_step = 1.0 / h;
  spec.inv_ph.resize(order + 1, 0.0);
  for (int p = 1; p <= order; ++p) spec.inv_ph[p] = 1.0 / (p * h);
  return spec;
}

namespace {

// Knot span for x, clamped into [k, G+k-1] so out-of-range x extrapolates
// the first/last in-range polynomial piece.
inline int find_span(const SplineSpec& spec, double x) {
  const int k = spec.order;
  const int hi_span = spec.grid_size + k - 1;
  const int span =
      k + static_cast<int>(std::floor((x - spec.lo) * spec.inv_step));
  return std::clamp(span, k, hi_span);
}

// Triangular evaluation of all nonzero basis functions at a fixed span.
// Uniform knots make every level-p denominator equal p*h. When `lower` is
// non-null it receives the order k-1 row (feeds the derivative recurrence).
inline void triangle(const SplineSpec& spec, int span, double x, int up_to_order,
                     double* N, double* lower) {
  const double* t = spec.knots.data();
  double left[16];
  double right[16];
  N[0] = 1.0;
  for (int p = 1; p <= up_to_order; ++p) {
    if (lower && p == up_to_order)
      for (int r = 0; r < p; ++r) lower[r] = N[r];
    left[p] = x - t[span + 1 - p];
    right[p] = t[span + p] - x;
    const double inv = spec.inv_ph[p];
    double saved = 0.0;
    for (int r = 0; r < p; ++r) {
      const double temp = N[r] * inv;
      N[r] = saved + right[r + 1] * temp;
      saved = left[p - r] * temp;
    }
    N[p] = saved;
  }
}

}  // namespace

int bspline_basis_local(const SplineSpec& spec, double x, double* out_values) {
  const int span = find_span(spec, x);
  triangle(spec, span, x, spec.order, out_values, nullptr);
  return span;
}

int bspline_basis_and_grad_local(const SplineSpec& spec, double x,
                                 double* out_values, double* out_grads) {
  const int k = spec.order;
  const int span = find_span(spec, x);
  if (k == 0) {
    out_values[0] = 1.0;
    out_grads[0] = 0.0;
    return span;
  }
  // With uniform knots the standard derivative recurrence collapses to
  //   B'_{i,k}(x) = (B_{i,k-1} - B_{i+1,k-1}) / h.
  double lower[16];
  triangle(spec, span, x, k, out_values, lower);
  for (int r = 0; r <= k; ++r) {
    const double a = r > 0 ? lower[r - 1] : 0.0;
    const double b = r < k ? lower[r] : 0.0;
    out_grads[r] = (a - b) * spec.inv_step;
  }
  return span;
}

std::vector<double> bspline_basis(double x, const SplineSpec& spec) {
  std::vector<double> dense(spec.num_basis(), 0.0);
  double local[16];
  const int span = bspline_basis_local(spec, x, local);
  for (int r = 0; r <= spec.order; ++r) dense[span - spec.order + r] = local[r];
  return dense;
}

std::vector<double> bspline_basis_grad(double x, const SplineSpec& spec) {
  std::vector<double> dense(spec.num_basis(), 0.0);
  double vals[16];
  double grads[16];
  const int span = bspline_basis_and_grad_local(spec, x, vals, grads);
  for (int r = 0; r <= spec.order; ++r) dense[span - spec.order + r] = grads[r];
  return dense;
}

}  // namespace kantsc
