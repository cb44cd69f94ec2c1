#include "kantsc/gradcheck.hpp"

#include <cfloat>
#include <cmath>

namespace kantsc {

namespace {

double sum_of(const Tensor& t) {
  double s = 0.0;
  for (double v : t.data) s += v;
  return s;
}

struct Comparer {
  CheckReport* report;
  double skip_floor;  // below this magnitude the FD carries no signal
  double atol;

  void compare(double analytic, double numeric, const std::string& item) {
    const double mag = std::max(std::fabs(analytic), std::fabs(numeric));
    const double diff = std::fabs(analytic - numeric);
    if (mag < skip_floor) {
      // no relative information at this coordinate; keep an absolute bound
      ++report->skipped;
      if (diff > skip_floor) {
        report->max_rel_err = std::max(report->max_rel_err, 1.0);
        report->worst_item = item + " (sub-noise sanity)";
      }
      return;
    }
    ++report->compared;
    const double rel = diff / std::max(mag, 1e-8);
    if (rel > report->max_rel_err) {
      report->max_rel_err = rel;
      report->worst_item = item;
    }
  }
};

}  // namespace

CheckReport grad_check_fn(const std::function<Tensor(const Tensor&)>& fwd,
                          const std::function<Tensor(const Tensor&)>& bwd,
                          const std::vector<Param*>& params,
                          std::function<void()> zero_grads, const Tensor& x,
                          double epsilon, double tolerance) {
  if (!(epsilon > 0.0 && epsilon <= 1e-2))
    throw ConfigError("grad_check: epsilon must be in (0, 1e-2]");
  CheckReport report;
  report.tolerance = tolerance;

  zero_grads();
  Tensor y = fwd(x);
  Tensor analytic_dx = bwd(Tensor::full(y.shape, 1.0));

  // capture analytic parameter grads before the FD sweeps disturb them
  std::vector<Tensor> param_grads;
  param_grads.reserve(params.size());
  for (Param* p : params) param_grads.push_back(p->grad);

  // Central differences of S = sum(fwd(.)) carry rounding noise of order
  // eps_mach * |S| / epsilon; coordinates whose gradient magnitude stays
  // below noise/tolerance cannot be checked relatively and are excluded
  // (they still must agree to within the floor itself).
  const double s_scale = 1.0 + std::fabs(sum_of(y));
  const double noise = 8.0 * DBL_EPSILON * s_scale / (2.0 * epsilon);
  Comparer cmp{&report, noise / tolerance, noise};

  Tensor xp = x;
  for (std::size_t i = 0; i < x.data.size(); ++i) {
    const double orig = xp.data[i];
    xp.data[i] = orig + epsilon;
    const double splus = sum_of(fwd(xp));
    xp.data[i] = orig - epsilon;
    const double sminus = sum_of(fwd(xp));
    xp.data[i] = orig;
    const double numeric = (splus - sminus) / (2.0 * epsilon);
    cmp.compare(analytic_dx.data[i], numeric, "input[" + std::to_string(i) + "]");
  }

  for (std::size_t pi = 0; pi < params.size(); ++pi) {
    Param* p = params[pi];
    for (std::size_t i = 0; i < p->value.data.size(); ++i) {
      const double orig = p->value.data[i];
      p->value.data[i] = orig + epsilon;
      const double splus = sum_of(fwd(x));
      p->value.data[i] = orig - epsilon;
      const double sminus = sum_of(fwd(x));
      p->value.data[i] = orig;
      const double numeric = (splus - sminus) / (2.0 * epsilon);
      cmp.compare(param_grads[pi].data[i], numeric,
                  p->name + "[" + std::to_string(i) + "]");
    }
  }

  zero_grads();
  report.pass = report.max_rel_err <= tolerance;
  return report;
}

CheckReport grad_check(Layer& layer, const Tensor& x, double epsilon,
                       double tolerance) {
  return grad_check_fn([&](const Tensor& in) { return layer.forward(in); },
                       [&](const Tensor& up) { return layer.backward(up); },
                       layer.params(), [&] { layer.zero_grads(); }, x, epsilon,
                       tolerance);
}

CheckReport grad_check(Model& model, const Tensor& x, double epsilon,
                       double tolerance) {
  model.set_train(false);
  return grad_check_fn(
      [&](const Tensor& in) { return model.forward(in, /*train=*/false); },
      [&](const Tensor& up) { return model.backward(up); }, model.params(),
      [&] { model.zero_grads(); }, x, epsilon, tolerance);
}

double sample_away_from(Rng& rng, double lo, double hi,
                        const std::vector<double>& avoid, double margin) {
  for (int attempt = 0; attempt < 10000; ++attempt) {
    const double v = rng.uniform(lo, hi);
    bool ok = true;
    for (double a : avoid) {
      if (std::fabs(v - a) < margin) {
        ok = false;
        break;
      }
    }
    if (ok) return v;
  }
  throw ConfigError("sample_away_from: avoid set too dense for interval");
}

}  // namespace kantsc
