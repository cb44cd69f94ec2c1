#pragma once

#include <cstdint>
#include <string>

#include "kantsc/model.hpp"

namespace kantsc {

struct CheckpointMeta {
  int epoch = 0;
  std::uint64_t rng_seed = 0;
};

// Binary container: 8-byte magic "KANTSC01", u64le manifest length, JSON
// manifest (model config, tensor names/shapes/offsets, dtype "f64le"), then
// a raw little-endian f64 blob. Save/load round-trips bitwise: all Param
// values plus batch-norm running statistics.
void save_checkpoint(Model& model, const std::string& path,
                     const CheckpointMeta& meta);

Model load_checkpoint(const std::string& path, CheckpointMeta* meta = nullptr);

}  // namespace kantsc
