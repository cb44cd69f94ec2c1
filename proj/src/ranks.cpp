#include "kantsc/ranks.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "kantsc/errors.hpp"

namespace kantsc {

double nemenyi_q05(std::size_t k) {
  static const double table[] = {
      0.0,      0.0,      1.959964, 2.343701, 2.569032, 2.727774,
      2.849705, 2.948319, 3.030879, 3.101730, 3.163684,
  };
  if (k < 2 || k > 10)
    throw ConfigError("nemenyi: bundled q table covers k in 2..10");
  return table[k];
}

double nemenyi_cd(std::size_t k, std::size_t n_datasets) {
  return nemenyi_q05(k) * std::sqrt(static_cast<double>(k * (k + 1)) /
                                    (6.0 * static_cast<double>(n_datasets)));
}

RankSummary friedman_ranks(const std::vector<std::vector<double>>& acc,
                           bool higher_is_better) {
  const std::size_t n = acc.size();
  if (n < 2) throw ConfigError("friedman: need at least 2 datasets");
  const std::size_t k = acc[0].size();
  if (k < 2) throw ConfigError("friedman: need at least 2 models");
  for (const auto& row : acc)
    if (row.size() != k) throw ConfigError("friedman: ragged accuracy matrix");

  RankSummary out;
  out.n_datasets = n;
  out.k_models = k;
  out.mean_ranks.assign(k, 0.0);

  std::vector<std::size_t> order(k);
  for (const auto& row : acc) {
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return higher_is_better ? row[a] > row[b] : row[a] < row[b];
    });
    // average ranks across tie groups
    std::size_t i = 0;
    while (i < k) {
      std::size_t j = i;
      while (j + 1 < k && row[order[j + 1]] == row[order[i]]) ++j;
      const double avg_rank = (static_cast<double>(i + 1) + static_cast<double>(j + 1)) / 2.0;
      for (std::size_t t = i; t <= j; ++t) out.mean_ranks[order[t]] += avg_rank;
      i = j + 1;
    }
  }
  for (double& r : out.mean_ranks) r /= static_cast<double>(n);

  out.mean_ranks_flipped.resize(k);
  for (std::size_t j = 0; j < k; ++j)
    out.mean_ranks_flipped[j] = static_cast<double>(k + 1) - out.mean_ranks[j];

  double sum_sq = 0.0;
  for (double r : out.mean_ranks) sum_sq += r * r;
  const double kd = static_cast<double>(k);
  const double nd = static_cast<double>(n);
  out.friedman_stat =
      12.0 * nd / (kd * (kd + 1.0)) * (sum_sq - kd * (kd + 1.0) * (kd + 1.0) / 4.0);
  out.critical_difference = nemenyi_cd(k, n);
  return out;
}

}  // namespace kantsc
