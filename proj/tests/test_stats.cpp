#include <doctest.h>

#include <cmath>

#include "kantsc/metrics.hpp"
#include "kantsc/ranks.hpp"
#include "kantsc/rng.hpp"
#include "test_util.hpp"

using namespace kantsc;

TEST_CASE("accuracy basics") {
  CHECK(accuracy({1, 2, 3}, {1, 2, 3}) == 1.0);
  CHECK(accuracy({0, 1}, {1, 1}) == 0.5);
  CHECK_THROWS_AS(accuracy({}, {}), ConfigError);
  // invariant under consistent relabeling
  CHECK(accuracy({0, 1, 0}, {0, 1, 1}) == accuracy({5, 7, 5}, {5, 7, 7}));
}

TEST_CASE("macro f1 hand cases") {
  CHECK(macro_f1({0, 1, 2}, {0, 1, 2}, 3) == 1.0);
  CHECK(macro_f1({0, 0, 1, 1}, {0, 1, 0, 1}, 2) == doctest::Approx(0.5));
  // all predictions one class on balanced binary labels
  CHECK(macro_f1({0, 0, 0, 0}, {0, 0, 1, 1}, 2) ==
        doctest::Approx((2.0 / 3.0 + 0.0) / 2.0));
  // absent class contributes zero
  CHECK(macro_f1({0, 0}, {0, 0}, 2) == doctest::Approx(0.5));
  CHECK(macro_f1({0, 0}, {0, 0}, 1) == doctest::Approx(1.0));
}

TEST_CASE("macro f1 equals accuracy on balanced symmetric binary cases") {
  const std::vector<int> labels = {0, 0, 1, 1};
  const std::vector<int> preds = {0, 1, 0, 1};  // symmetric errors
  CHECK(macro_f1(preds, labels, 2) == doctest::Approx(accuracy(preds, labels)));
}

TEST_CASE("quantiles with linear interpolation") {
  CHECK(quantiles({1, 2, 3, 4, 5}, {0.5})[0] == 3.0);
  CHECK(quantiles({1, 2, 3, 4}, {0.5})[0] == 2.5);
  CHECK(quantiles({0, 10}, {0.25})[0] == 2.5);
  const std::vector<double> q = quantiles({5, 1, 3, 2, 4});
  CHECK(q[0] == 2.0);
  CHECK(q[1] == 3.0);
  CHECK(q[2] == 4.0);
  std::vector<double> empty;
  CHECK_THROWS_AS(quantile(empty, 0.5), ConfigError);
}

TEST_CASE("histogram conservation and edge clipping") {
  const Histogram h = histogram({0.5}, 1, 0.0, 1.0);
  CHECK(h.counts == std::vector<std::size_t>{1});

  const Histogram clipped = histogram({-5.0, 0.5, 9.0}, 4, 0.0, 1.0);
  std::size_t total = 0;
  for (std::size_t c : clipped.counts) total += c;
  CHECK(total == 3);
  CHECK(clipped.counts.front() >= 1);
  CHECK(clipped.counts.back() >= 1);

  Rng rng(5);
  std::vector<double> uniform(10000);
  for (double& v : uniform) v = rng.uniform();
  const Histogram u = histogram(uniform, 10, 0.0, 1.0);
  total = 0;
  for (std::size_t c : u.counts) {
    total += c;
    // binomial 3-sigma bound around 1000
    CHECK(std::fabs(static_cast<double>(c) - 1000.0) <= 90.0);
  }
  CHECK(total == 10000);
}

TEST_CASE("pairwise >= counts") {
  // identical vectors: every entry N
  const auto same = pairwise_geq_counts({{0.5, 0.6}, {0.5, 0.6}});
  for (const auto& row : same)
    for (std::size_t v : row) CHECK(v == 2);

  // strict dominance
  const auto dom = pairwise_geq_counts({{0.9, 0.9}, {0.1, 0.2}});
  CHECK(dom[0][1] == 2);
  CHECK(dom[1][0] == 0);
  CHECK(dom[0][0] == 2);
  CHECK(dom[1][1] == 2);

  // 3 configs x 2 datasets hand table
  const auto m = pairwise_geq_counts({{0.5, 0.8}, {0.5, 0.2}, {0.6, 0.2}});
  CHECK(m[0][1] == 2);  // 0.5>=0.5, 0.8>=0.2
  CHECK(m[1][0] == 1);  // ties count, second entry loses
  CHECK(m[2][1] == 2);
  CHECK(m[1][2] == 1);
  CHECK(m[0][2] == 1);
  CHECK(m[2][0] == 1);

  // M[r][c] + M[c][r] >= N, equality iff no ties
  for (std::size_t r = 0; r < 3; ++r)
    for (std::size_t c = 0; c < 3; ++c) CHECK(m[r][c] + m[c][r] >= 2);

  CHECK_THROWS_AS(pairwise_geq_counts({{0.5}, {0.5, 0.6}}), ConfigError);
}

TEST_CASE("friedman ranks: unanimity, ties, and the rank-sum identity") {
  // model 0 strictly best everywhere
  const RankSummary best =
      friedman_ranks({{0.9, 0.5, 0.4}, {0.8, 0.2, 0.3}, {0.99, 0.1, 0.9}});
  CHECK(best.mean_ranks[0] == 1.0);

  // identical columns tie at (k+1)/2
  const RankSummary tied = friedman_ranks({{0.5, 0.5}, {0.7, 0.7}});
  CHECK(tied.mean_ranks[0] == doctest::Approx(1.5));
  CHECK(tied.mean_ranks[1] == doctest::Approx(1.5));

  // rank sums per dataset equal k(k+1)/2
  Rng rng(3);
  std::vector<std::vector<double>> acc(7, std::vector<double>(5));
  for (auto& row : acc)
    for (double& v : row) v = rng.uniform();
  const RankSummary summary = friedman_ranks(acc);
  double total = 0.0;
  for (double r : summary.mean_ranks) total += r;
  CHECK(total == doctest::Approx(5.0 * 6.0 / 2.0).epsilon(1e-12));

  // flipped presentation: higher is better
  for (std::size_t j = 0; j < 5; ++j)
    CHECK(summary.mean_ranks_flipped[j] ==
          doctest::Approx(6.0 - summary.mean_ranks[j]));

  CHECK_THROWS_AS(friedman_ranks({{0.5, 0.6}}), ConfigError);
  CHECK_THROWS_AS(friedman_ranks({{0.5}, {0.6}}), ConfigError);
}

TEST_CASE("nemenyi critical difference for k=5, N=128") {
  const double expected = nemenyi_q05(5) * std::sqrt(30.0 / 768.0);
  CHECK(std::fabs(nemenyi_cd(5, 128) - expected) <= 1e-12);
  CHECK(nemenyi_q05(5) == doctest::Approx(2.727774).epsilon(1e-9));
  CHECK_THROWS_AS(nemenyi_q05(11), ConfigError);
}

TEST_CASE("friedman statistic on a hand-checked fixture") {
  // two datasets, three models, no ties:
  // ranks dataset 1: model order (0.9,0.5,0.1) -> ranks 1,2,3
  // ranks dataset 2: model order (0.8,0.6,0.2) -> ranks 1,2,3
  const RankSummary s = friedman_ranks({{0.9, 0.5, 0.1}, {0.8, 0.6, 0.2}});
  CHECK(s.mean_ranks[0] == 1.0);
  CHECK(s.mean_ranks[1] == 2.0);
  CHECK(s.mean_ranks[2] == 3.0);
  // chi2 = 12*2/(3*4) * (1+4+9 - 3*16/4) = 2 * (14 - 12) = 4
  CHECK(s.friedman_stat == doctest::Approx(4.0).epsilon(1e-12));
}
