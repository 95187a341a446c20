#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "miniens/tensor/tensor.hpp"

namespace miniens::tensor {

struct NamedParam {
    std::string name;
    Tensor tensor;
};

// Checkpoint file layout (byte-exact):
//   line 1:       "miniens-ckpt 1"
//   line 2:       "params <N>"
//   N lines:      "<name> <d0> <d1> ..."   (name has no spaces)
//   one line:     "data"
//   then the raw values of each parameter in header order, row-major,
//   as little-endian IEEE-754 float64. All text lines end in LF.
void save_checkpoint(const std::vector<NamedParam>& params, const std::filesystem::path& path);

// Loads values into an already-built parameter list; names, order and shapes
// must match the file exactly, otherwise CheckpointMismatch.
void load_checkpoint(std::vector<NamedParam>& params, const std::filesystem::path& path);

}  // namespace miniens::tensor
