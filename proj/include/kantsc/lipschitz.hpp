#pragma once

#include <cstdint>
#include <vector>

#include "kantsc/model.hpp"

namespace kantsc {

struct LipschitzConfig {
  double radius = 0.5;
  int n_starts = 8;
  int ascent_steps = 10;
  double ascent_lr = 0.0;  // <= 0 -> radius / 10
  std::uint64_t seed = 0;

  double effective_lr() const { return ascent_lr > 0.0 ? ascent_lr : radius / 10.0; }
};

struct LipschitzSummary {
  std::vector<double> estimates;  // one per evaluated sample
  double median = 0.0;
};

// Empirical lower bound of the local Lipschitz constant at x0: random pairs
// in the inf-ball of the given radius, refined by projected gradient ascent
// on |f(x1) - f(x2)|_2 / |x1 - x2|_2; returns the best quotient observed.
double lipschitz_estimate(Model& model, const std::vector<double>& x0,
                          const LipschitzConfig& cfg);

// Per-sample estimates over (a seeded subsample of at most max_samples of)
// the rows of x, plus their median.
LipschitzSummary lipschitz_dataset_summary(Model& model, const Tensor& x,
                                           const LipschitzConfig& cfg,
                                           std::size_t max_samples = 256);

}  // namespace kantsc
