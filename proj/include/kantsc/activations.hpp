#pragma once

#include <cmath>

namespace kantsc {

inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

// silu(x) = x * sigmoid(x). Safe across the double range: exp(-x) saturates
// to inf/0 without producing NaN for finite x.
inline double silu(double x) { return x / (1.0 + std::exp(-x)); }

inline double silu_grad(double x) {
  const double s = sigmoid(x);
  return s * (1.0 + x * (1.0 - s));
}

}  // namespace kantsc
