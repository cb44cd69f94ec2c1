#pragma once

#include <cstdint>
#include <vector>

#include "kantsc/data.hpp"
#include "kantsc/model.hpp"

namespace kantsc {

struct TrainConfig {
  int epochs = 1000;
  double lr0 = 1e-2;
  double lr_decay = 0.9;
  int decay_every = 25;
  double weight_decay = 1e-2;
  double l1_coeff = 0.0;
  double entropy_coeff = 1e-5;
  int batch_size = 0;  // 0 -> min(32, n_train)
  std::uint64_t seed = 0;
};

struct EpochRecord {
  int epoch = 0;
  double lr = 0.0;
  double train_loss = 0.0;
  double train_accuracy = 0.0;
  double test_accuracy = 0.0;
};

struct TrainHistory {
  std::vector<EpochRecord> epochs;
};

// lr0 * decay^floor(epoch / decay_every)
double lr_at(int epoch, const TrainConfig& cfg);

int default_batch_size(std::size_t n_train, const TrainConfig& cfg);

// Spline-weight sparsity penalty over all KAN layers: with
// a_pq = mean_i |scaler_pq * coef_pq,i|, adds
// l1_coeff * sum a_pq + entropy_coeff * H(a / sum a) and accumulates the
// analytic gradients. All-zero spline weights contribute zero by convention.
double kan_regularization(Model& model, double l1_coeff, double entropy_coeff);

// Seeded-minibatch AdamW training per the experiment protocol; records one
// entry per epoch and evaluates test accuracy in eval mode each epoch.
TrainHistory train(Model& model, const Dataset& dataset, const TrainConfig& cfg);

// Eval-mode accuracy of the model on one split.
double evaluate_accuracy(Model& model, const Tensor& x, const std::vector<int>& y);

}  // namespace kantsc
