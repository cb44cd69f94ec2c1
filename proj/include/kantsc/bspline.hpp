#pragma once

#include <vector>

#include "kantsc/errors.hpp"

namespace kantsc {

// Uniform B-spline basis configuration on a fixed interval.
// order k is the polynomial degree (cubic by default); grid_size G is the
// number of subintervals, giving G + k basis functions over
// G + 2k + 1 knots at knot_j = lo + (j - k) * h, h = (hi - lo) / G.
struct SplineSpec {
  int order = 3;
  int grid_size = 5;
  double lo = -1.0;
  double hi = 1.0;
  std::vector<double> knots;
  // uniform-spacing reciprocals: inv_step = 1/h, inv_ph[p] = 1/(p*h)
  double inv_step = 0.0;
  std::vector<double> inv_ph;

  static SplineSpec make(int grid_size, int order = 3, double lo = -1.0,
                         double hi = 1.0);

  int num_basis() const { return grid_size + order; }
  double step() const { return (hi - lo) / grid_size; }
};

// Nonzero basis values at x: out_values[r] = B_{span-k+r}(x), r = 0..k.
// The span is clamped into the in-range interval set, so evaluation outside
// [lo, hi] extrapolates the edge polynomial pieces (stays differentiable).
int bspline_basis_local(const SplineSpec& spec, double x, double* out_values);

// Same, plus d/dx of each nonzero basis function.
int bspline_basis_and_grad_local(const SplineSpec& spec, double x,
                                 double* out_values, double* out_grads);

// Dense variants over all G + k basis functions.
std::vector<double> bspline_basis(double x, const SplineSpec& spec);
std::vector<double> bspline_basis_grad(double x, const SplineSpec& spec);

}  // namespace kantsc
