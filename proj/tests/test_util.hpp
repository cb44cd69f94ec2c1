#pragma once

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <string>
#include <vector>

#include "kantsc/batchnorm.hpp"
#include "kantsc/bspline.hpp"
#include "kantsc/tensor.hpp"

namespace kantsc::testutil {

// Sets eval-mode BN to an exact identity map: running_var is chosen so that
// var + eps == 1 bitwise.
inline void freeze_bn_identity(BatchNorm1d& bn) {
  bn.running_mean.fill(0.0);
  bn.running_var.fill(1.0 - bn.eps);
  bn.gamma.value.fill(1.0);
  bn.beta.value.fill(0.0);
  bn.set_train(false);
}

// Naive Cox-de Boor recursion over the full knot vector; the independent
// oracle for basis values strictly inside the grid interval.
inline double naive_bspline(const SplineSpec& spec, int i, int k, double x) {
  const std::vector<double>& t = spec.knots;
  if (k == 0) return (t[i] <= x && x < t[i + 1]) ? 1.0 : 0.0;
  double left = 0.0;
  double right = 0.0;
  const double ld = t[i + k] - t[i];
  const double rd = t[i + k + 1] - t[i + 1];
  if (ld > 0.0) left = (x - t[i]) / ld * naive_bspline(spec, i, k - 1, x);
  if (rd > 0.0) right = (t[i + k + 1] - x) / rd * naive_bspline(spec, i + 1, k - 1, x);
  return left + right;
}

inline std::vector<double> naive_basis_row(const SplineSpec& spec, double x) {
  std::vector<double> out(spec.num_basis());
  for (int i = 0; i < spec.num_basis(); ++i)
    out[i] = naive_bspline(spec, i, spec.order, x);
  return out;
}

// Scratch directory under the build tree, fresh per call site tag.
inline std::string scratch_dir(const std::string& tag) {
  namespace fs = std::filesystem;
  fs::path dir = fs::temp_directory_path() / ("kantsc_test_" + tag);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir.string();
}

inline bool near(double a, double b, double tol) { return std::fabs(a - b) <= tol; }

}  // namespace kantsc::testutil
