#include "kantsc/metrics.hpp"

#include <algorithm>
#include <cmath>

#include "kantsc/errors.hpp"

namespace kantsc {

double accuracy(const std::vector<int>& preds, const std::vector<int>& labels) {
  if (preds.size() != labels.size())
    throw ConfigError("accuracy: length mismatch");
  if (preds.empty()) throw ConfigError("accuracy: empty input");
  std::size_t correct = 0;
  for (std::size_t i = 0; i < preds.size(); ++i)
    if (preds[i] == labels[i]) ++correct;
  return static_cast<double>(correct) / static_cast<double>(preds.size());
}

double macro_f1(const std::vector<int>& preds, const std::vector<int>& labels,
                int m) {
  if (preds.size() != labels.size())
    throw ConfigError("macro_f1: length mismatch");
  if (preds.empty()) throw ConfigError("macro_f1: empty input");
  if (m < 1) throw ConfigError("macro_f1: m must be >= 1");

  double f1_sum = 0.0;
  for (int c = 0; c < m; ++c) {
    std::size_t tp = 0;
    std::size_t fp = 0;
    std::size_t fn = 0;
    for (std::size_t i = 0; i < preds.size(); ++i) {
      const bool pred_c = preds[i] == c;
      const bool true_c = labels[i] == c;
      if (pred_c && true_c) ++tp;
      else if (pred_c) ++fp;
      else if (true_c) ++fn;
    }
    const double precision = tp + fp ? static_cast<double>(tp) / (tp + fp) : 0.0;
    const double recall = tp + fn ? static_cast<double>(tp) / (tp + fn) : 0.0;
    const double f1 =
        precision + recall > 0.0 ? 2.0 * precision * recall / (precision + recall)
                                 : 0.0;
    f1_sum += f1;
  }
  return f1_sum / static_cast<double>(m);
}

double quantile(std::vector<double>& values, double q) {
  if (values.empty()) throw ConfigError("quantile: empty input");
  std::sort(values.begin(), values.end());
  const double pos = q * static_cast<double>(values.size() - 1);
  const std::size_t lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, values.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return values[lo] + frac * (values[hi] - values[lo]);
}

std::vector<double> quantiles(const std::vector<double>& values,
                              const std::vector<double>& qs) {
  std::vector<double> sorted = values;
  std::vector<double> out;
  out.reserve(qs.size());
  for (double q : qs) out.push_back(quantile(sorted, q));
  return out;
}

Histogram histogram(const std::vector<double>& values, std::size_t n_bins,
                    double lo, double hi) {
  if (n_bins < 1) throw ConfigError("histogram: need at least one bin");
  if (values.empty()) throw ConfigError("histogram: empty input");
  if (!(hi > lo)) throw ConfigError("histogram: bad range");
  Histogram h;
  h.edges.resize(n_bins + 1);
  const double w = (hi - lo) / static_cast<double>(n_bins);
  for (std::size_t i = 0; i <= n_bins; ++i)
    h.edges[i] = lo + w * static_cast<double>(i);
  h.counts.assign(n_bins, 0);
  for (double v : values) {
    long bin = static_cast<long>(std::floor((v - lo) / w));
    bin = std::clamp(bin, 0L, static_cast<long>(n_bins) - 1L);
    ++h.counts[static_cast<std::size_t>(bin)];
  }
  return h;
}

std::vector<std::vector<std::size_t>> pairwise_geq_counts(
    const std::vector<std::vector<double>>& accuracies) {
  const std::size_t k = accuracies.size();
  if (k == 0) throw ConfigError("pairwise_geq_counts: no configurations");
  const std::size_t n = accuracies[0].size();
  for (const auto& row : accuracies)
    if (row.size() != n)
      throw ConfigError("pairwise_geq_counts: mismatched dataset coverage");

  std::vector<std::vector<std::size_t>> mat(k, std::vector<std::size_t>(k, 0));
  for (std::size_t r = 0; r < k; ++r)
    for (std::size_t c = 0; c < k; ++c)
      for (std::size_t i = 0; i < n; ++i)
        if (accuracies[r][i] >= accuracies[c][i]) ++mat[r][c];
  return mat;
}

}  // namespace kantsc
