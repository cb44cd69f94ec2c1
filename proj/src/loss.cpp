#include "kantsc/loss.hpp"

#include <cmath>

#include "kantsc/errors.hpp"

namespace kantsc {

LossResult cross_entropy_loss(const Tensor& logits,
                              const std::vector<int>& labels) {
  if (logits.shape.size() != 2)
    throw ConfigError("cross_entropy: logits must be [batch, m]");
  const std::size_t batch = logits.shape[0];
  const std::size_t m = logits.shape[1];
  if (batch == 0) throw ConfigError("cross_entropy: empty batch");
  if (labels.size() != batch)
    throw ConfigError("cross_entropy: labels length mismatch");

  LossResult out;
  out.grad = Tensor({batch, m});
  double total = 0.0;
  const double inv_batch = 1.0 / static_cast<double>(batch);

  for (std::size_t b = 0; b < batch; ++b) {
    const int label = labels[b];
    if (label < 0 || static_cast<std::size_t>(label) >= m)
      throw ConfigError("cross_entropy: label out of range");
    const double* row = &logits.data[b * m];
    double mx = row[0];
    for (std::size_t j = 1; j < m; ++j) mx = std::max(mx, row[j]);
    double sum = 0.0;
    for (std::size_t j = 0; j < m; ++j) sum += std::exp(row[j] - mx);
    const double logz = mx + std::log(sum);
    total += logz - row[label];
    for (std::size_t j = 0; j < m; ++j) {
      const double soft = std::exp(row[j] - mx) / sum;
      out.grad.at(b, j) =
          (soft - (static_cast<std::size_t>(label) == j ? 1.0 : 0.0)) * inv_batch;
    }
  }
  out.loss = total * inv_batch;
  return out;
}

std::vector<int> argmax_rows(const Tensor& logits) {
  const std::size_t batch = logits.rows();
  const std::size_t m = logits.cols();
  std::vector<int> preds(batch, 0);
  for (std::size_t b = 0; b < batch; ++b) {
    const double* row = &logits.data[b * m];
    int best = 0;
    for (std::size_t j = 1; j < m; ++j)
      if (row[j] > row[best]) best = static_cast<int>(j);
    preds[b] = best;
  }
  return preds;
}

}  // namespace kantsc
