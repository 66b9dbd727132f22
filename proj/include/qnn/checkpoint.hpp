#pragma once

// Checkpoint file: magic "QNN1", then per tensor a u32 name length, the name
// bytes, u32 rank, u32 extents and little-endian f32 values. Quaternion
// tensors carry a leading extent of 4 (planes w, x, y, z).

#include <filesystem>
#include <stdexcept>
#include <vector>

#include "qnn/model.hpp"

namespace qnn {

class CheckpointError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

template <std::floating_point T>
void save_checkpoint(const std::filesystem::path& path, const std::vector<Parameter<T>>& params);

std::vector<Parameter<float>> read_checkpoint(const std::filesystem::path& path);

/// Copies stored tensors into the model; names and shapes must match.
template <std::floating_point T>
void load_checkpoint(const std::filesystem::path& path, Model<T>& model);

}  // namespace qnn
