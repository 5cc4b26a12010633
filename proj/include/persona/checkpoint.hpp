#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>

#include "persona/model.hpp"

namespace persona {

struct CheckpointInfo {
  std::uint64_t seed = 0;
  std::size_t epoch = 0;
};

struct Checkpoint {
  ModelParams params;
  CheckpointInfo info;
};

// Layout: 8-byte magic "PGCKPT1\n", u64 little-endian header length, a JSON
// header (dims, layer count, lambda, dropout, seed, epoch, tensor order), then
// every tensor as float64 little-endian in for_each_tensor() order, matrices
// row-major. Round-trips bitwise.
void write_checkpoint(std::ostream& out, const ModelParams& params, const CheckpointInfo& info);
Checkpoint read_checkpoint(std::istream& in);
void save_checkpoint(const std::filesystem::path& path, const ModelParams& params,
                     const CheckpointInfo& info);
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace persona
