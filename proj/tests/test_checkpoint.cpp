#include <doctest.h>

#include <fstream>

#include "kantsc/checkpoint.hpp"
#include "test_util.hpp"

using namespace kantsc;
using testutil::scratch_dir;

namespace {

ModelConfig cfg_for(Arch arch) {
  ModelConfig cfg;
  cfg.arch = arch;
  cfg.d = 6;
  cfg.m = 3;
  cfg.seed = 314;
  return cfg;
}

}  // namespace

TEST_CASE("checkpoint round-trip preserves forward outputs bitwise") {
  const std::string dir = scratch_dir("ckpt");
  Rng rng(1);
  Tensor x({4, 6});
  for (double& v : x.data) v = rng.uniform(-1.2, 1.2);

  for (Arch arch :
       {Arch::Kan, Arch::Mlp1, Arch::Mlp2, Arch::KanMlp, Arch::MlpKan}) {
    Model model = build_model(cfg_for(arch));
    // perturb running stats so the round-trip covers non-default state
    for (auto& layer : model.layers()) {
      if (auto* kan = dynamic_cast<KanLayer*>(layer.get())) {
        for (double& v : kan->bn.running_mean.data) v = rng.uniform(-0.2, 0.2);
        for (double& v : kan->bn.running_var.data) v = rng.uniform(0.5, 1.5);
      }
    }
    const Tensor before = model.forward(x, /*train=*/false);

    const std::string path = dir + "/" + arch_to_string(arch) + ".ckpt";
    CheckpointMeta meta;
    meta.epoch = 42;
    meta.rng_seed = 314;
    save_checkpoint(model, path, meta);

    CheckpointMeta loaded_meta;
    Model loaded = load_checkpoint(path, &loaded_meta);
    CHECK(loaded_meta.epoch == 42);
    CHECK(loaded.config().arch == arch);
    const Tensor after = loaded.forward(x, /*train=*/false);
    CHECK(tensors_bitwise_equal(before, after));
  }
}

TEST_CASE("checkpoint rejects foreign and truncated files") {
  const std::string dir = scratch_dir("ckpt_bad");
  {
    std::ofstream out(dir + "/not_a_ckpt.bin", std::ios::binary);
    out << "definitely not this format";
  }
  CHECK_THROWS_AS(load_checkpoint(dir + "/not_a_ckpt.bin"), CheckpointError);
  CHECK_THROWS_AS(load_checkpoint(dir + "/missing.ckpt"), CheckpointError);

  Model model = build_model(cfg_for(Arch::Mlp1));
  const std::string path = dir + "/ok.ckpt";
  save_checkpoint(model, path, {});
  // truncate the blob
  std::ifstream in(path, std::ios::binary);
  std::string bytes((std::istreambuf_iterator<char>(in)),
                    std::istreambuf_iterator<char>());
  in.close();
  {
    std::ofstream out(dir + "/short.ckpt", std::ios::binary);
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size() - 64));
  }
  CHECK_THROWS_AS(load_checkpoint(dir + "/short.ckpt"), CheckpointError);
}

TEST_CASE("checkpoint bytes are deterministic for a fixed model state") {
  const std::string dir = scratch_dir("ckpt_det");
  Model model = build_model(cfg_for(Arch::Kan));
  save_checkpoint(model, dir + "/a.ckpt", {});
  save_checkpoint(model, dir + "/b.ckpt", {});
  std::ifstream a(dir + "/a.ckpt", std::ios::binary);
  std::ifstream b(dir + "/b.ckpt", std::ios::binary);
  const std::string sa((std::istreambuf_iterator<char>(a)),
                       std::istreambuf_iterator<char>());
  const std::string sb((std::istreambuf_iterator<char>(b)),
                       std::istreambuf_iterator<char>());
  CHECK(sa == sb);
  CHECK(sa.substr(0, 8) == "KANTSC01");
}
