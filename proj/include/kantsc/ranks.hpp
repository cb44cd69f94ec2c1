#pragma once

#include <string>
#include <vector>

namespace kantsc {

struct RankSummary {
  std::size_t n_datasets = 0;
  std::size_t k_models = 0;
  std::vector<double> mean_ranks;          // rank 1 = best
  std::vector<double> mean_ranks_flipped;  // k + 1 - rank ("higher is better")
  double friedman_stat = 0.0;
  double critical_difference = 0.0;
  double alpha = 0.05;
};

// Two-tailed Nemenyi critical value at alpha = 0.05 (studentized range with
// infinite degrees of freedom divided by sqrt(2)), k in 2..10.
double nemenyi_q05(std::size_t k);

double nemenyi_cd(std::size_t k, std::size_t n_datasets);

// Per-dataset ranks with average ranks for ties; rank 1 goes to the best
// score per `higher_is_better`. acc is [datasets][models].
RankSummary friedman_ranks(const std::vector<std::vector<double>>& acc,
                           bool higher_is_better = true);

}  // namespace kantsc
