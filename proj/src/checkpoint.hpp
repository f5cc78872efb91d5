#pragma once

// Checkpoint container. All integers and floats are little-endian.
//
//   magic        8 bytes   "CLAQSCKP"
//   version      u32       1
//   config       u64 length + UTF-8 JSON (fully resolved run config)
//   step         u64       optimizer steps taken
//   epoch        u64       epoch the parameters come from
//   rng          u64 length + text (std::mt19937_64 stream state)
//   vocab        u32 count, then per token: u32 length + bytes (id order)
//   params       u32 count, then per tensor:
//                  u32 length + name bytes
//                  u8  real_valued
//                  u32 ndim, then ndim x u64 dims
//                  numel x (f64 real, f64 imag)

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "model.hpp"

namespace claqs::checkpoint {

struct Checkpoint {
  std::string config_json;
  std::uint64_t step = 0;
  std::uint64_t epoch = 0;
  std::string rng_state;
  std::vector<std::string> vocab;
  model::Parameters params;
};

void save(const std::filesystem::path& path, const Checkpoint& ckpt);
Checkpoint load(const std::filesystem::path& path);

}  // namespace claqs::checkpoint
