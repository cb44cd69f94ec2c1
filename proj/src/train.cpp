#include "kantsc/train.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "kantsc/loss.hpp"
#include "kantsc/optim.hpp"

namespace kantsc {

double lr_at(int epoch, const TrainConfig& cfg) {
  if (epoch < 0) throw ConfigError("lr_at: epoch must be >= 0");
  return cfg.lr0 * std::pow(cfg.lr_decay, epoch / cfg.decay_every);
}

int default_batch_size(std::size_t n_train, const TrainConfig& cfg) {
  // Full-batch for small training splits; tiny batches make the per-layer
  // batch-norm statistics too noisy to train the spline grids well.
  if (cfg.batch_size > 0) return cfg.batch_size;
  return static_cast<int>(std::min<std::size_t>(32, std::max<std::size_t>(1, n_train)));
}

double kan_regularization(Model& model, double l1_coeff, double entropy_coeff) {
  if (l1_coeff == 0.0 && entropy_coeff == 0.0) return 0.0;
  double penalty = 0.0;
  for (auto& layer : model.layers()) {
    auto* kan = dynamic_cast<KanLayer*>(layer.get());
    if (!kan || !kan->use_spline()) continue;

    const std::size_t edges = kan->out_dim() * kan->in_dim();
    const std::size_t nb = static_cast<std::size_t>(kan->spec().num_basis());
    const double* sc = kan->spline_scaler.value.data.data();
    const double* cf = kan->spline_coef.value.data.data();

    std::vector<double> a(edges, 0.0);
    double total = 0.0;
    for (std::size_t e = 0; e < edges; ++e) {
      double mean_abs = 0.0;
      for (std::size_t i = 0; i < nb; ++i) mean_abs += std::fabs(cf[e * nb + i]);
      mean_abs /= static_cast<double>(nb);
      a[e] = std::fabs(sc[e]) * mean_abs;
      total += a[e];
    }

    double l1 = total;
    double entropy = 0.0;
    if (total > 0.0) {
      for (std::size_t e = 0; e < edges; ++e) {
        if (a[e] <= 0.0) continue;
        const double p = a[e] / total;
        entropy -= p * std::log(p);
      }
    }
    penalty += l1_coeff * l1 + entropy_coeff * entropy;

    // dPenalty/da_e = l1_coeff + entropy_coeff * (-log p_e - H)/total,
    // then chain into scaler and coefficient magnitudes.
    double* gsc = kan->spline_scaler.grad.data.data();
    double* gcf = kan->spline_coef.grad.data.data();
    for (std::size_t e = 0; e < edges; ++e) {
      double da = l1_coeff;
      if (entropy_coeff != 0.0 && total > 0.0 && a[e] > 0.0) {
        const double p = a[e] / total;
        da += entropy_coeff * (-std::log(p) - entropy) / total;
      }
      if (da == 0.0) continue;

      double mean_abs = a[e] == 0.0 ? 0.0 : a[e] / std::fabs(sc[e]);
      const double sign_s = sc[e] > 0.0 ? 1.0 : (sc[e] < 0.0 ? -1.0 : 0.0);
      if (sc[e] != 0.0) {
        for (std::size_t i = 0; i < nb; ++i) {
          const double c = cf[e * nb + i];
          const double sign_c = c > 0.0 ? 1.0 : (c < 0.0 ? -1.0 : 0.0);
          gcf[e * nb + i] +=
              da * std::fabs(sc[e]) * sign_c / static_cast<double>(nb);
        }
      }
      gsc[e] += da * sign_s * mean_abs;
    }
  }
  return penalty;
}

double evaluate_accuracy(Model& model, const Tensor& x, const std::vector<int>& y) {
  if (x.rows() == 0) return std::nan("");
  const Tensor logits = model.forward(x, /*train=*/false);
  const std::vector<int> preds = argmax_rows(logits);
  std::size_t correct = 0;
  for (std::size_t i = 0; i < preds.size(); ++i)
    if (preds[i] == y[i]) ++correct;
  return static_cast<double>(correct) / static_cast<double>(preds.size());
}

TrainHistory train(Model& model, const Dataset& dataset, const TrainConfig& cfg) {
  if (cfg.epochs < 0) throw ConfigError("train: epochs must be >= 0");
  Tensor train_x;
  std::vector<int> train_y;
  Dataset::split_matrix(dataset.train, train_x, train_y);
  Tensor test_x;
  std::vector<int> test_y;
  Dataset::split_matrix(dataset.test, test_x, test_y);

  const std::size_t n = train_x.rows();
  if (n == 0) throw DataError("train: empty training split");
  const std::size_t bs = static_cast<std::size_t>(default_batch_size(n, cfg));

  AdamW optimizer(model.params(), cfg.weight_decay);
  Rng shuffle_rng(cfg.seed ^ 0x5F0F1E5ull);

  TrainHistory history;
  history.epochs.reserve(static_cast<std::size_t>(cfg.epochs));

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    const double lr = lr_at(epoch, cfg);
    shuffle(order, shuffle_rng);

    double loss_sum = 0.0;
    std::size_t loss_count = 0;
    std::size_t correct = 0;
    std::size_t seen = 0;

    for (std::size_t start = 0; start < n; start += bs) {
      const std::size_t stop = std::min(n, start + bs);
      const std::size_t batch = stop - start;
      if (batch < 2 && n >= 2) continue;  // trailing singleton: BN needs >= 2

      Tensor xb({batch, dataset.d});
      std::vector<int> yb(batch);
      for (std::size_t i = 0; i < batch; ++i) {
        const std::size_t src = order[start + i];
        std::copy(&train_x.data[src * dataset.d],
                  &train_x.data[(src + 1) * dataset.d], &xb.data[i * dataset.d]);
        yb[i] = train_y[src];
      }

      model.zero_grads();
      const Tensor logits = model.forward(xb, /*train=*/true);
      const LossResult loss = cross_entropy_loss(logits, yb);
      if (!std::isfinite(loss.loss))
        throw NumericError("train: non-finite loss at epoch " +
                           std::to_string(epoch));
      model.backward(loss.grad);
      kan_regularization(model, cfg.l1_coeff, cfg.entropy_coeff);
      optimizer.step(lr);

      loss_sum += loss.loss * static_cast<double>(batch);
      loss_count += batch;
      const std::vector<int> preds = argmax_rows(logits);
      for (std::size_t i = 0; i < batch; ++i)
        if (preds[i] == yb[i]) ++correct;
      seen += batch;
    }

    EpochRecord rec;
    rec.epoch = epoch;
    rec.lr = lr;
    rec.train_loss = loss_count ? loss_sum / static_cast<double>(loss_count) : 0.0;
    rec.train_accuracy =
        seen ? static_cast<double>(correct) / static_cast<double>(seen) : 0.0;
    rec.test_accuracy = evaluate_accuracy(model, test_x, test_y);
    history.epochs.push_back(rec);
  }
  return history;
}

}  // namespace kantsc
