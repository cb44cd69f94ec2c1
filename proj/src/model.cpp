#include "kantsc/model.hpp"

#include <algorithm>
#include <cctype>

namespace kantsc {

Arch arch_from_string(const std::string& name) {
  std::string s = name;
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) {
    return static_cast<char>(std::tolower(c));
  });
  if (s == "kan") return Arch::Kan;
  if (s == "mlp1" || s == "mlp_i") return Arch::Mlp1;
  if (s == "mlp2" || s == "mlp_l" || s == "mlp_ii") return Arch::Mlp2;
  if (s == "kan_mlp") return Arch::KanMlp;
  if (s == "mlp_kan") return Arch::MlpKan;
  throw ConfigError("unknown architecture '" + name +
                    "' (expected kan|mlp1|mlp2|kan_mlp|mlp_kan)");
}

std::string arch_to_string(Arch arch) {
  switch (arch) {
    case Arch::Kan: return "kan";
    case Arch::Mlp1: return "mlp1";
    case Arch::Mlp2: return "mlp2";
    case Arch::KanMlp: return "kan_mlp";
    case Arch::MlpKan: return "mlp_kan";
  }
  return "?";
}

Model::Model(ModelConfig cfg)
    : config_(cfg), dropout_rng_(std::make_unique<Rng>(cfg.seed ^ 0xD00Dull)) {}

Tensor Model::forward(const Tensor& x, bool train) {
  set_train(train);
  Tensor cur = x;
  for (auto& layer : layers_) cur = layer->forward(cur);
  return cur;
}

Tensor Model::backward(const Tensor& upstream) {
  Tensor cur = upstream;
  for (auto it = layers_.rbegin(); it != layers_.rend(); ++it)
    cur = (*it)->backward(cur);
  return cur;
}

std::vector<Param*> Model::params() {
  std::vector<Param*> out;
  for (auto& layer : layers_)
    for (Param* p : layer->params()) out.push_back(p);
  return out;
}

void Model::zero_grads() {
  for (Param* p : params()) p->zero_grad();
}

void Model::set_train(bool train) {
  for (auto& layer : layers_) layer->set_train(train);
}

std::size_t Model::count_params() {
  std::size_t n = 0;
  for (Param* p : params()) n += p->numel();
  return n;
}

KanLayer* Model::final_kan_layer() {
  if (layers_.empty()) return nullptr;
  return dynamic_cast<KanLayer*>(layers_.back().get());
}

std::pair<Tensor, Tensor> Model::last_layer_components(const Tensor& x) {
  KanLayer* last = final_kan_layer();
  if (!last)
    throw CapabilityError(
        "last_layer_components: final layer is not a KAN layer (arch " +
        arch_to_string(config_.arch) + ")");
  Tensor cur = x;
  for (std::size_t i = 0; i + 1 < layers_.size(); ++i)
    cur = layers_[i]->forward(cur);
  return last->component_outputs(cur);
}

namespace {

std::string layer_name(std::size_t idx, const char* base) {
  return "L" + std::to_string(idx) + "." + base;
}

}  // namespace

Model build_model(const ModelConfig& cfg) {
  if (cfg.d < 1) throw ConfigError("build_model: d must be >= 1");
  if (cfg.m < 2) throw ConfigError("build_model: m must be >= 2");
  if (cfg.grid_size < 1) throw ConfigError("build_model: grid size must be >= 1");
  if (!cfg.use_base && !cfg.use_spline)
    throw ConfigError("build_model: cannot disable both base and spline paths");

  Model model(cfg);
  Rng init_rng(cfg.seed);
  const std::size_t d = static_cast<std::size_t>(cfg.d);
  const std::size_t m = static_cast<std::size_t>(cfg.m);
  const SplineSpec spec = SplineSpec::make(cfg.grid_size, cfg.spline_order);

  std::size_t li = 0;
  auto add_kan = [&](std::size_t in, std::size_t out) {
    auto layer = std::make_unique<KanLayer>(in, out, spec, cfg.use_base,
                                            cfg.use_spline, layer_name(li, "kan"));
    layer->init(init_rng);
    model.layers_.push_back(std::move(layer));
    ++li;
  };
  auto add_linear = [&](std::size_t in, std::size_t out) {
    auto layer = std::make_unique<LinearLayer>(in, out, layer_name(li, "linear"));
    layer->init(init_rng);
    model.layers_.push_back(std::move(layer));
    ++li;
  };
  auto add_relu = [&] {
    model.layers_.push_back(std::make_unique<ReluLayer>());
    ++li;
  };
  auto add_dropout = [&] {
    if (cfg.dropout > 0.0) {
      model.layers_.push_back(
          std::make_unique<DropoutLayer>(cfg.dropout, &model.dropout_rng()));
      ++li;
    }
  };

  switch (cfg.arch) {
    case Arch::Kan:
      add_kan(d, d);
      add_dropout();
      add_kan(d, 128);
      add_dropout();
      add_kan(128, m);
      break;
    case Arch::Mlp1:
      add_linear(d, d);
      add_relu();
      add_dropout();
      add_linear(d, 128);
      add_relu();
      add_dropout();
      add_linear(128, m);
      break;
    case Arch::Mlp2:
      add_linear(d, 10 * d);
      add_relu();
      add_dropout();
      add_linear(10 * d, 128);
      add_relu();
      add_dropout();
      add_linear(128, m);
      break;
    case Arch::KanMlp:
      add_kan(d, d);
      add_dropout();
      add_kan(d, 128);
      add_dropout();
      add_linear(128, m);
      break;
    case Arch::MlpKan:
      add_linear(d, d);
      add_relu();
      add_dropout();
      add_linear(d, 128);
      add_relu();
      add_dropout();
      add_kan(128, m);
      break;
  }
  return model;
}

}  // namespace kantsc
