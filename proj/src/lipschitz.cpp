#include "kantsc/lipschitz.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "kantsc/metrics.hpp"

namespace kantsc {

namespace {

double l2_norm(const double* a, const double* b, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return std::sqrt(s);
}

}  // namespace

double lipschitz_estimate(Model& model, const std::vector<double>& x0,
                          const LipschitzConfig& cfg) {
  if (cfg.radius <= 0.0) throw ConfigError("lipschitz: radius must be > 0");
  if (cfg.n_starts < 1) throw ConfigError("lipschitz: n_starts must be >= 1");
  model.set_train(false);

  const std::size_t d = x0.size();
  const double r = cfg.radius;
  const double lr = cfg.effective_lr();
  Rng rng(cfg.seed);
  double best = 0.0;

  Tensor pair({2, d});
  auto resample = [&] {
    do {
      for (std::size_t j = 0; j < d; ++j) {
        pair.data[j] = x0[j] + rng.uniform(-r, r);
        pair.data[d + j] = x0[j] + rng.uniform(-r, r);
      }
    } while (l2_norm(&pair.data[0], &pair.data[d], d) < 1e-9);
  };

  for (int s = 0; s < cfg.n_starts; ++s) {
    resample();
    for (int step = 0; step <= cfg.ascent_steps; ++step) {
      const Tensor logits = model.forward(pair, /*train=*/false);
      const std::size_t m = logits.cols();
      double n2 = 0.0;
      for (std::size_t j = 0; j < m; ++j) {
        const double diff = logits.at(0, j) - logits.at(1, j);
        n2 += diff * diff;
      }
      const double numer = std::sqrt(n2);
      const double denom = l2_norm(&pair.data[0], &pair.data[d], d);
      const double q = numer / denom;
      best = std::max(best, q);
      if (step == cfg.ascent_steps) break;
      if (numer < 1e-15) break;  // flat pair: gradient undefined, next start

      // d q / d x1 = J1^T u / denom - q * (x1 - x2) / denom^2, u = df/|df|;
      // symmetric with opposite signs for x2.
      Tensor upstream({2, m});
      for (std::size_t j = 0; j < m; ++j) {
        const double u = (logits.at(0, j) - logits.at(1, j)) / numer;
        upstream.at(0, j) = u;
        upstream.at(1, j) = -u;
      }
      const Tensor jac = model.backward(upstream);
      for (std::size_t j = 0; j < d; ++j) {
        const double diff = pair.data[j] - pair.data[d + j];
        const double g1 = jac.data[j] / denom - q * diff / (denom * denom);
        const double g2 = jac.data[d + j] / denom + q * diff / (denom * denom);
        pair.data[j] = std::clamp(pair.data[j] + lr * g1, x0[j] - r, x0[j] + r);
        pair.data[d + j] =
            std::clamp(pair.data[d + j] + lr * g2, x0[j] - r, x0[j] + r);
      }
      if (l2_norm(&pair.data[0], &pair.data[d], d) < 1e-9) break;
    }
  }
  model.zero_grads();
  return best;
}

LipschitzSummary lipschitz_dataset_summary(Model& model, const Tensor& x,
                                           const LipschitzConfig& cfg,
                                           std::size_t max_samples) {
  const std::size_t n = x.rows();
  if (n == 0) throw DataError("lipschitz: empty evaluation set");
  const std::size_t d = x.cols();

  std::vector<std::size_t> index(n);
  std::iota(index.begin(), index.end(), 0);
  if (n > max_samples) {
    Rng rng(cfg.seed ^ 0x5AB5ull);
    shuffle(index, rng);
    index.resize(max_samples);
    std::sort(index.begin(), index.end());
  }

  LipschitzSummary out;
  out.estimates.reserve(index.size());
  for (std::size_t rank = 0; rank < index.size(); ++rank) {
    const std::size_t i = index[rank];
    std::vector<double> x0(&x.data[i * d], &x.data[(i + 1) * d]);
    LipschitzConfig per_sample = cfg;
    per_sample.seed = Rng(cfg.seed).fork(i).state();
    out.estimates.push_back(lipschitz_estimate(model, x0, per_sample));
  }
  std::vector<double> sorted = out.estimates;
  out.median = quantile(sorted, 0.5);
  return out;
}

}  // namespace kantsc
