#pragma once

#include <cstddef>
#include <map>
#include <string>
#include <vector>

namespace kantsc {

double accuracy(const std::vector<int>& preds, const std::vector<int>& labels);

// Unweighted mean of per-class F1 over all m classes; a class absent from
// both predictions and labels contributes 0.
double macro_f1(const std::vector<int>& preds, const std::vector<int>& labels,
                int m);

// Linear-interpolation quantile of a sample; sorts its input in place.
double quantile(std::vector<double>& values, double q);

std::vector<double> quantiles(const std::vector<double>& values,
                              const std::vector<double>& qs = {0.25, 0.5, 0.75});

struct Histogram {
  std::vector<double> edges;       // n_bins + 1
  std::vector<std::size_t> counts; // n_bins; out-of-range clipped to edge bins
};

Histogram histogram(const std::vector<double>& values, std::size_t n_bins,
                    double lo, double hi);

// M[r][c] = number of positions where row config's accuracy >= column
// config's, over aligned per-dataset accuracy vectors. Diagonal = N.
std::vector<std::vector<std::size_t>> pairwise_geq_counts(
    const std::vector<std::vector<double>>& accuracies);

}  // namespace kantsc
