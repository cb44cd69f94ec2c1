#include <doctest.h>

#include <cmath>

#include "kantsc/gradcheck.hpp"
#include "kantsc/model.hpp"
#include "test_util.hpp"

using namespace kantsc;

namespace {

ModelConfig make_cfg(Arch arch, int d, int m, std::uint64_t seed = 7) {
  ModelConfig cfg;
  cfg.arch = arch;
  cfg.d = d;
  cfg.m = m;
  cfg.seed = seed;
  return cfg;
}

// Independent hand accounting, G=5/k=3: a KAN edge carries G+k coefficients,
// one spline scaler and one base weight; KAN layers add 2*in batch-norm
// affine terms; linear layers add out*in weights and out biases.
std::size_t kan_layer_count(std::size_t in, std::size_t out) {
  return out * in * (8 + 1 + 1) + 2 * in;
}
std::size_t linear_count(std::size_t in, std::size_t out) { return out * in + out; }

std::size_t expected_count(Arch arch, std::size_t d, std::size_t m) {
  switch (arch) {
    case Arch::Kan:
      return kan_layer_count(d, d) + kan_layer_count(d, 128) +
             kan_layer_count(128, m);
    case Arch::Mlp1:
      return linear_count(d, d) + linear_count(d, 128) + linear_count(128, m);
    case Arch::Mlp2:
      return linear_count(d, 10 * d) + linear_count(10 * d, 128) +
             linear_count(128, m);
    case Arch::KanMlp:
      return kan_layer_count(d, d) + kan_layer_count(d, 128) +
             linear_count(128, m);
    case Arch::MlpKan:
      return linear_count(d, d) + linear_count(d, 128) + kan_layer_count(128, m);
  }
  return 0;
}

}  // namespace

TEST_CASE("architectures realize the Table-style layer widths") {
  Tensor x({2, 4});
  for (Arch arch : {Arch::Kan, Arch::Mlp1, Arch::Mlp2, Arch::KanMlp, Arch::MlpKan}) {
    Model model = build_model(make_cfg(arch, 4, 2));
    const Tensor logits = model.forward(x, /*train=*/false);
    CHECK(logits.rows() == 2);
    CHECK(logits.cols() == 2);
  }
  // hidden widths: mlp2 uses 10d
  Model mlp2 = build_model(make_cfg(Arch::Mlp2, 4, 2));
  auto* first = dynamic_cast<LinearLayer*>(mlp2.layers()[0].get());
  REQUIRE(first != nullptr);
  CHECK(first->out_dim() == 40);

  Model kan = build_model(make_cfg(Arch::Kan, 4, 2));
  auto* l0 = dynamic_cast<KanLayer*>(kan.layers()[0].get());
  REQUIRE(l0 != nullptr);
  CHECK(l0->in_dim() == 4);
  CHECK(l0->out_dim() == 4);
  CHECK(kan.final_kan_layer()->in_dim() == 128);
  CHECK(kan.final_kan_layer()->out_dim() == 2);
}

TEST_CASE("hybrids replace exactly the last layer") {
  Model kan_mlp = build_model(make_cfg(Arch::KanMlp, 4, 2));
  CHECK(dynamic_cast<KanLayer*>(kan_mlp.layers().front().get()) != nullptr);
  CHECK(dynamic_cast<LinearLayer*>(kan_mlp.layers().back().get()) != nullptr);

  Model mlp_kan = build_model(make_cfg(Arch::MlpKan, 4, 2));
  CHECK(dynamic_cast<LinearLayer*>(mlp_kan.layers().front().get()) != nullptr);
  CHECK(dynamic_cast<KanLayer*>(mlp_kan.layers().back().get()) != nullptr);
}

TEST_CASE("invalid configurations are rejected") {
  CHECK_THROWS_AS(build_model(make_cfg(Arch::Kan, 4, 1)), ConfigError);
  CHECK_THROWS_AS(build_model(make_cfg(Arch::Kan, 0, 2)), ConfigError);
  CHECK_THROWS_AS(arch_from_string("resnet"), ConfigError);
  CHECK(arch_from_string("mlp_l") == Arch::Mlp2);
  CHECK(arch_from_string("MLP2") == Arch::Mlp2);
}

TEST_CASE("count_params equals the sum over parameter records") {
  for (Arch arch : {Arch::Kan, Arch::Mlp1, Arch::Mlp2, Arch::KanMlp, Arch::MlpKan}) {
    Model model = build_model(make_cfg(arch, 10, 3));
    std::size_t total = 0;
    for (Param* p : model.params()) total += p->numel();
    CHECK(model.count_params() == total);
  }
}

TEST_CASE("count_params matches the independent hand accounting") {
  for (Arch arch : {Arch::Kan, Arch::Mlp1, Arch::Mlp2, Arch::KanMlp, Arch::MlpKan}) {
    for (auto [d, m] : {std::pair{16, 2}, std::pair{50, 3}, std::pair{128, 10}}) {
      Model model = build_model(make_cfg(arch, d, m));
      CHECK(model.count_params() ==
            expected_count(arch, static_cast<std::size_t>(d),
                           static_cast<std::size_t>(m)));
    }
  }
}

TEST_CASE("mlp1 hand count at d=100, m=2") {
  Model model = build_model(make_cfg(Arch::Mlp1, 100, 2));
  CHECK(model.count_params() == 23286u);  // (100*100+100)+(100*128+128)+(128*2+2)
}

TEST_CASE("kan count at d=100, m=2 lies within 2% of the (2+G+k) formula") {
  Model model = build_model(make_cfg(Arch::Kan, 100, 2));
  const double formula = 10.0 * 100 * 100 + 1282.0 * 100;  // 228,200
  const double exact = static_cast<double>(model.count_params());
  CHECK(std::fabs(exact - formula) / formula <= 0.02);
}

TEST_CASE("same seed builds bitwise-identical parameters") {
  for (Arch arch : {Arch::Kan, Arch::MlpKan}) {
    Model a = build_model(make_cfg(arch, 6, 3, 1234));
    Model b = build_model(make_cfg(arch, 6, 3, 1234));
    auto pa = a.params();
    auto pb = b.params();
    REQUIRE(pa.size() == pb.size());
    for (std::size_t i = 0; i < pa.size(); ++i)
      CHECK(tensors_bitwise_equal(pa[i]->value, pb[i]->value));
  }
}

TEST_CASE("all-zero mlp1 yields zero logits") {
  ModelConfig cfg = make_cfg(Arch::Mlp1, 5, 2);
  cfg.seed = 9;
  Model model = build_model(cfg);
  for (Param* p : model.params()) p->value.fill(0.0);
  const Tensor logits = model.forward(Tensor::full({3, 5}, 0.7), false);
  for (double v : logits.data) CHECK(v == 0.0);
}

TEST_CASE("forward is batch permutation equivariant in eval mode") {
  Model model = build_model(make_cfg(Arch::Kan, 6, 3, 77));
  Rng rng(3);
  Tensor x({5, 6});
  for (double& v : x.data) v = rng.uniform(-1.5, 1.5);
  const Tensor y = model.forward(x, false);

  const std::vector<std::size_t> perm = {3, 0, 4, 1, 2};
  Tensor xp({5, 6});
  for (std::size_t i = 0; i < perm.size(); ++i)
    std::copy(&x.data[perm[i] * 6], &x.data[(perm[i] + 1) * 6], &xp.data[i * 6]);
  const Tensor yp = model.forward(xp, false);
  for (std::size_t i = 0; i < perm.size(); ++i)
    for (std::size_t j = 0; j < 3; ++j)
      CHECK(yp.at(i, j) == y.at(perm[i], j));
}

TEST_CASE("model-level gradient check") {
  for (Arch arch : {Arch::Kan, Arch::Mlp1, Arch::KanMlp, Arch::MlpKan}) {
    Model model = build_model(make_cfg(arch, 4, 2, 5));
    // keep finite differences away from relu kinks and spline knots
    std::vector<double> avoid = SplineSpec::make(5, 3).knots;
    avoid.push_back(0.0);
    Rng rng(6);
    Tensor x({2, 4});
    for (double& v : x.data) v = sample_away_from(rng, -0.9, 0.9, avoid, 2e-3);
    const CheckReport report = grad_check(model, x, 1e-6, 1e-4);
    INFO("arch=" << arch_to_string(arch) << " worst=" << report.worst_item
                 << " err=" << report.max_rel_err);
    CHECK(report.pass);
  }
}

TEST_CASE("single-layer model equals the layer forward") {
  KanLayer layer(4, 2, SplineSpec::make(5, 3));
  Rng rng(12);
  layer.init(rng);
  layer.set_train(false);

  ModelConfig cfg = make_cfg(Arch::Kan, 4, 2);
  Model model(cfg);
  // compose manually: a model with exactly this layer
  auto clone = std::make_unique<KanLayer>(4, 2, SplineSpec::make(5, 3));
  for (std::size_t i = 0; i < layer.params().size(); ++i)
    clone->params()[i]->value = layer.params()[i]->value;
  clone->bn.running_mean = layer.bn.running_mean;
  clone->bn.running_var = layer.bn.running_var;
  model.layers().push_back(std::move(clone));

  Tensor x({3, 4});
  for (double& v : x.data) v = rng.uniform(-1.0, 1.0);
  const Tensor via_model = model.forward(x, false);
  const Tensor via_layer = layer.forward(x);
  CHECK(tensors_bitwise_equal(via_model, via_layer));
}

TEST_CASE("last_layer_components contract") {
  Model mlp = build_model(make_cfg(Arch::Mlp1, 4, 2));
  Tensor x({2, 4});
  CHECK_THROWS_AS(mlp.last_layer_components(x), CapabilityError);

  for (Arch arch : {Arch::Kan, Arch::MlpKan}) {
    Model model = build_model(make_cfg(arch, 4, 3, 21));
    model.set_train(false);
    Rng rng(8);
    for (double& v : x.data) v = rng.uniform(-1.0, 1.0);
    const Tensor logits = model.forward(x, false);
    const auto [base, spline] = model.last_layer_components(x);
    REQUIRE(base.shape == logits.shape);
    for (std::size_t i = 0; i < logits.data.size(); ++i)
      CHECK(base.data[i] + spline.data[i] == logits.data[i]);
  }

  ModelConfig no_base = make_cfg(Arch::Kan, 4, 3, 22);
  no_base.use_base = false;
  Model model = build_model(no_base);
  model.set_train(false);
  const auto [base, spline] = model.last_layer_components(x);
  for (double v : base.data) CHECK(v == 0.0);
}

TEST_CASE("length mismatch raises a data-shaped error") {
  Model model = build_model(make_cfg(Arch::Mlp1, 6, 2));
  CHECK_THROWS_AS(model.forward(Tensor({2, 5}), false), ConfigError);
}
