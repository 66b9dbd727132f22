#pragma once

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include "qnn/qtensor.hpp"
#include "qnn/tensor.hpp"

namespace qnn {

class DatasetError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Byte images [N, H, W, C] (channel-last) with labels in [0, 9].
struct DatasetHandle {
  std::vector<std::uint8_t> images;
  std::vector<std::uint8_t> labels;
  std::size_t height = 32;
  std::size_t width = 32;
  std::size_t channels = 3;
  std::string split;

  std::size_t size() const { return labels.size(); }
  std::size_t image_bytes() const { return height * width * channels; }
  const std::uint8_t* image(std::size_t i) const { return images.data() + i * image_bytes(); }

  /// First min(n, size()) records.
  DatasetHandle head(std::size_t n) const;
  /// Throws DatasetError on inconsistent extents or labels above 9.
  void validate() const;
};

struct TrainTestSplit {
  DatasetHandle train;
  DatasetHandle test;
};

inline constexpr std::size_t kCifarRecordBytes = 3073;

/// One CIFAR-10 binary batch: records of 1 label byte + 3072 channel-planar
/// pixels, converted to channel-last.
DatasetHandle read_cifar10_batch(const std::filesystem::path& path);

/// data_batch_1..5.bin and test_batch.bin (also accepted inside a
/// cifar-10-batches-bin subdirectory).
TrainTestSplit load_cifar10(const std::filesystem::path& dir);

/// QIMG: "QIM1", u32 count, height, width, channels (little-endian), count
/// label bytes, then count * H * W * C pixel bytes channel-last.
DatasetHandle load_qimg(const std::filesystem::path& path);
void write_qimg(const std::filesystem::path& path, const DatasetHandle& data);

/// train.qimg and test.qimg in dir.
TrainTestSplit load_svhn_qimg(const std::filesystem::path& dir);

/// Pure quaternion encoding of the selected RGB images: w = 0 and
/// x, y, z = R, G, B / 255. Returns planar [B, 4, H, W].
template <std::floating_point T>
Tensor<T> encode_batch(const DatasetHandle& data, const std::vector<std::size_t>& indices);

/// Single image as a quaternion tensor [1, H, W].
template <std::floating_point T>
QTensor<T> encode_quaternion(const DatasetHandle& data, std::size_t index);

}  // namespace qnn
