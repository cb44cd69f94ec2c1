#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "kantsc/kan_layer.hpp"
#include "kantsc/layer.hpp"
#include "kantsc/mlp_layers.hpp"
#include "kantsc/rng.hpp"

namespace kantsc {

enum class Arch { Kan, Mlp1, Mlp2, KanMlp, MlpKan };

Arch arch_from_string(const std::string& name);   // kan|mlp1|mlp2|mlp_l|kan_mlp|mlp_kan
std::string arch_to_string(Arch arch);

struct ModelConfig {
  Arch arch = Arch::Kan;
  int d = 0;            // input series length
  int m = 0;            // class count
  int grid_size = 5;
  int spline_order = 3;
  bool use_base = true;    // KAN layers only
  bool use_spline = true;  // KAN layers only
  double dropout = 0.1;
  std::uint64_t seed = 0;
};

// An ordered layer stack realizing one Table-style architecture, with owned
// parameters and a private dropout RNG stream.
class Model {
 public:
  explicit Model(ModelConfig cfg);

  Tensor forward(const Tensor& x, bool train);
  // dLoss/dInput; accumulates parameter gradients.
  Tensor backward(const Tensor& upstream);

  std::vector<Param*> params();
  void zero_grads();
  void set_train(bool train);
  std::size_t count_params();

  // Base/spline addends of the final layer, flattened use; requires the
  // final layer to be a KAN layer (arch kan or mlp_kan).
  std::pair<Tensor, Tensor> last_layer_components(const Tensor& x);

  const ModelConfig& config() const { return config_; }
  std::vector<std::unique_ptr<Layer>>& layers() { return layers_; }
  KanLayer* final_kan_layer();

  // Heap-held so the address survives moves (dropout layers point at it).
  Rng& dropout_rng() { return *dropout_rng_; }

 private:
  friend Model build_model(const ModelConfig&);
  ModelConfig config_;
  std::vector<std::unique_ptr<Layer>> layers_;
  std::unique_ptr<Rng> dropout_rng_;
};

// Builds and deterministically initializes one of the five architectures:
//   kan      [d-d-128-m], all KAN layers
//   mlp1     [d-d-128-m], linear+relu
//   mlp2     [d-10d-128-m], linear+relu
//   kan_mlp  kan with the last layer replaced by a linear layer
//   mlp_kan  mlp1 with the last layer replaced by a KAN layer
// Dropout follows each hidden nonlinearity; the output layer is bare.
Model build_model(const ModelConfig& cfg);

}  // namespace kantsc
