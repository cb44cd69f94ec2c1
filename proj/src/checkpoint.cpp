#include "kantsc/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <vector>

#include <json.hpp>

namespace kantsc {

static_assert(std::endian::native == std::endian::little,
              "checkpoint blob assumes a little-endian host");

namespace {

constexpr char kMagic[8] = {'K', 'A', 'N', 'T', 'S', 'C', '0', '1'};

// Params plus non-learnable state needed to reproduce eval forward.
struct NamedTensor {
  std::string name;
  Tensor* tensor;
};

std::vector<NamedTensor> state_tensors(Model& model) {
  std::vector<NamedTensor> out;
  std::size_t li = 0;
  for (auto& layer : model.layers()) {
    for (Param* p : layer->params()) out.push_back({p->name, &p->value});
    if (auto* kan = dynamic_cast<KanLayer*>(layer.get())) {
      const std::string prefix = "L" + std::to_string(li) + ".kan.bn.";
      out.push_back({prefix + "running_mean", &kan->bn.running_mean});
      out.push_back({prefix + "running_var", &kan->bn.running_var});
    } else if (auto* bn = dynamic_cast<BatchNorm1d*>(layer.get())) {
      const std::string prefix = "L" + std::to_string(li) + ".bn.";
      out.push_back({prefix + "running_mean", &bn->running_mean});
      out.push_back({prefix + "running_var", &bn->running_var});
    }
    ++li;
  }
  return out;
}

nlohmann::json config_to_json(const ModelConfig& cfg) {
  return nlohmann::json{
      {"arch", arch_to_string(cfg.arch)},
      {"d", cfg.d},
      {"m", cfg.m},
      {"grid_size", cfg.grid_size},
      {"spline_order", cfg.spline_order},
      {"use_base", cfg.use_base},
      {"use_spline", cfg.use_spline},
      {"dropout", cfg.dropout},
      {"seed", cfg.seed},
  };
}

ModelConfig config_from_json(const nlohmann::json& j) {
  ModelConfig cfg;
  cfg.arch = arch_from_string(j.at("arch").get<std::string>());
  cfg.d = j.at("d").get<int>();
  cfg.m = j.at("m").get<int>();
  cfg.grid_size = j.at("grid_size").get<int>();
  cfg.spline_order = j.at("spline_order").get<int>();
  cfg.use_base = j.at("use_base").get<bool>();
  cfg.use_spline = j.at("use_spline").get<bool>();
  cfg.dropout = j.at("dropout").get<double>();
  cfg.seed = j.at("seed").get<std::uint64_t>();
  return cfg;
}

}  // namespace

void save_checkpoint(Model& model, const std::string& path,
                     const CheckpointMeta& meta) {
  const std::vector<NamedTensor> tensors = state_tensors(model);

  nlohmann::json manifest;
  manifest["model_config"] = config_to_json(model.config());
  manifest["epoch"] = meta.epoch;
  manifest["rng_seed"] = meta.rng_seed;
  manifest["dtype"] = "f64le";
  nlohmann::json tlist = nlohmann::json::array();
  std::uint64_t offset = 0;
  for (const NamedTensor& nt : tensors) {
    tlist.push_back({{"name", nt.name},
                     {"shape", nt.tensor->shape},
                     {"offset", offset},
                     {"count", nt.tensor->numel()}});
    offset += nt.tensor->numel() * sizeof(double);
  }
  manifest["tensors"] = std::move(tlist);
  const std::string mstr = manifest.dump();

  std::ofstream out(path, std::ios::binary);
  if (!out) throw CheckpointError("cannot write checkpoint '" + path + "'");
  out.write(kMagic, sizeof kMagic);
  const std::uint64_t mlen = mstr.size();
  out.write(reinterpret_cast<const char*>(&mlen), sizeof mlen);
  out.write(mstr.data(), static_cast<std::streamsize>(mstr.size()));
  for (const NamedTensor& nt : tensors)
    out.write(reinterpret_cast<const char*>(nt.tensor->data.data()),
              static_cast<std::streamsize>(nt.tensor->numel() * sizeof(double)));
  if (!out) throw CheckpointError("short write on checkpoint '" + path + "'");
}

Model load_checkpoint(const std::string& path, CheckpointMeta* meta) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CheckpointError("cannot open checkpoint '" + path + "'");

  char magic[8];
  in.read(magic, sizeof magic);
  if (!in || std::memcmp(magic, kMagic, sizeof kMagic) != 0)
    throw CheckpointError("'" + path + "' is not a KANTSC01 checkpoint");

  std::uint64_t mlen = 0;
  in.read(reinterpret_cast<char*>(&mlen), sizeof mlen);
  if (!in || mlen == 0 || mlen > (1ull << 30))
    throw CheckpointError("corrupt checkpoint manifest length");
  std::string mstr(mlen, '\0');
  in.read(mstr.data(), static_cast<std::streamsize>(mlen));
  if (!in) throw CheckpointError("truncated checkpoint manifest");

  nlohmann::json manifest;
  try {
    manifest = nlohmann::json::parse(mstr);
  } catch (const nlohmann::json::exception& e) {
    throw CheckpointError(std::string("bad checkpoint manifest: ") + e.what());
  }

  Model model = [&] {
    try {
      return build_model(config_from_json(manifest.at("model_config")));
    } catch (const nlohmann::json::exception& e) {
      throw CheckpointError(std::string("bad model config in checkpoint: ") +
                            e.what());
    }
  }();
  if (meta) {
    meta->epoch = manifest.value("epoch", 0);
    meta->rng_seed = manifest.value("rng_seed", std::uint64_t{0});
  }

  std::vector<NamedTensor> tensors = state_tensors(model);
  const auto& tlist = manifest.at("tensors");
  if (tlist.size() != tensors.size())
    throw CheckpointError("checkpoint tensor list does not match architecture");
  for (std::size_t i = 0; i < tensors.size(); ++i) {
    const auto& entry = tlist[i];
    if (entry.at("name").get<std::string>() != tensors[i].name)
      throw CheckpointError("checkpoint tensor name mismatch at index " +
                            std::to_string(i) + " (" +
                            entry.at("name").get<std::string>() + " vs " +
                            tensors[i].name + ")");
    const auto shape = entry.at("shape").get<std::vector<std::size_t>>();
    if (shape != tensors[i].tensor->shape)
      throw CheckpointError("checkpoint tensor shape mismatch for " +
                            tensors[i].name);
    in.read(reinterpret_cast<char*>(tensors[i].tensor->data.data()),
            static_cast<std::streamsize>(tensors[i].tensor->numel() *
                                         sizeof(double)));
    if (!in) throw CheckpointError("truncated checkpoint blob");
  }
  return model;
}

}  // namespace kantsc
