#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "kantsc/model.hpp"

namespace kantsc {

struct AttackConfig {
  double eps = 0.0;
  double alpha = 0.0;  // <= 0 -> 0.01 * eps
  int iters = 100;
  bool random_start = false;
  std::uint64_t seed = 0;

  double effective_alpha() const { return alpha > 0.0 ? alpha : 0.01 * eps; }
};

enum class AsrDenominator { CorrectBefore, All };

struct SampleOutcome {
  int pred_before = 0;
  int pred_after = 0;
  bool success = false;
  double perturbation_inf_norm = 0.0;
};

struct AttackReport {
  std::vector<SampleOutcome> samples;
  std::size_t n_eval = 0;
  std::size_t n_correct_before = 0;
  std::size_t n_success = 0;
  double asr = 0.0;
  bool asr_defined = true;
};

// L-inf PGD ascent on the true-label cross-entropy:
//   x <- clip_{x0,eps}( x + alpha * sign(grad_x L) ), sign(0) = 0.
// Runs in eval mode; parameters are left untouched (gradient accumulations
// are zeroed afterwards). The optional observer sees every iterate.
Tensor pgd_attack(Model& model, const Tensor& x, const std::vector<int>& y,
                  const AttackConfig& cfg,
                  const std::function<void(const Tensor&, int)>& observer = {});

// ASR over a test matrix. Default denominator: samples the clean model gets
// right; success then means the attacked prediction leaves the true label.
AttackReport attack_success_rate(Model& model, const Tensor& x,
                                 const std::vector<int>& y,
                                 const AttackConfig& cfg,
                                 AsrDenominator denom = AsrDenominator::CorrectBefore);

}  // namespace kantsc
