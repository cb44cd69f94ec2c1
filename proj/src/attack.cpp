#include "kantsc/attack.hpp"

#include <algorithm>
#include <cmath>

#include "kantsc/loss.hpp"

namespace kantsc {

Tensor pgd_attack(Model& model, const Tensor& x, const std::vector<int>& y,
                  const AttackConfig& cfg,
                  const std::function<void(const Tensor&, int)>& observer) {
  if (cfg.iters < 1) throw ConfigError("pgd: iters must be >= 1");
  if (cfg.eps < 0.0) throw ConfigError("pgd: eps must be >= 0");
  model.set_train(false);

  Tensor x_adv = x;
  if (cfg.eps == 0.0) return x_adv;
  const double alpha = cfg.effective_alpha();
  if (alpha <= 0.0) throw ConfigError("pgd: alpha must be > 0 when eps > 0");

  if (cfg.random_start) {
    Rng rng(cfg.seed ^ 0xADu);
    for (std::size_t i = 0; i < x_adv.data.size(); ++i)
      x_adv.data[i] = x.data[i] + rng.uniform(-cfg.eps, cfg.eps);
  }

  for (int t = 0; t < cfg.iters; ++t) {
    const Tensor logits = model.forward(x_adv, /*train=*/false);
    const LossResult loss = cross_entropy_loss(logits, y);
    const Tensor grad = model.backward(loss.grad);
    for (std::size_t i = 0; i < x_adv.data.size(); ++i) {
      const double g = grad.data[i];
      const double step = g > 0.0 ? alpha : (g < 0.0 ? -alpha : 0.0);
      const double lo = x.data[i] - cfg.eps;
      const double hi = x.data[i] + cfg.eps;
      x_adv.data[i] = std::clamp(x_adv.data[i] + step, lo, hi);
    }
    if (observer) observer(x_adv, t);
  }
  model.zero_grads();  // attack gradients are not training state
  return x_adv;
}

AttackReport attack_success_rate(Model& model, const Tensor& x,
                                 const std::vector<int>& y,
                                 const AttackConfig& cfg, AsrDenominator denom) {
  if (x.rows() == 0) throw DataError("attack: empty evaluation set");
  AttackReport report;
  report.n_eval = x.rows();

  const std::vector<int> before = argmax_rows(model.forward(x, /*train=*/false));
  const Tensor x_adv = pgd_attack(model, x, y, cfg);
  const std::vector<int> after = argmax_rows(model.forward(x_adv, /*train=*/false));

  const std::size_t d = x.cols();
  report.samples.resize(x.rows());
  std::size_t denominator = 0;
  for (std::size_t i = 0; i < x.rows(); ++i) {
    SampleOutcome& s = report.samples[i];
    s.pred_before = before[i];
    s.pred_after = after[i];
    double inf_norm = 0.0;
    for (std::size_t j = 0; j < d; ++j)
      inf_norm = std::max(inf_norm, std::fabs(x_adv.data[i * d + j] - x.data[i * d + j]));
    s.perturbation_inf_norm = inf_norm;

    const bool correct_before = before[i] == y[i];
    if (correct_before) ++report.n_correct_before;
    if (denom == AsrDenominator::CorrectBefore) {
      s.success = correct_before && after[i] != y[i];
      if (correct_before) ++denominator;
    } else {
      s.success = after[i] != before[i];
      ++denominator;
    }
    if (s.success) ++report.n_success;
  }

  if (denominator == 0) {
    report.asr = std::nan("");
    report.asr_defined = false;
  } else {
    report.asr = static_cast<double>(report.n_success) /
                 static_cast<double>(denominator);
  }
  return report;
}

}  // namespace kantsc
