#include "qnn/dataset.hpp"

#include <array>
#include <cstring>
#include <fstream>

namespace qnn {

namespace fs = std::filesystem;

DatasetHandle DatasetHandle::head(std::size_t n) const {
  n = std::min(n, size());
  DatasetHandle out;
  out.height = height;
  out.width = width;
  out.channels = channels;
  out.split = split;
  out.labels.assign(labels.begin(), labels.begin() + static_cast<std::ptrdiff_t>(n));
  out.images.assign(images.begin(), images.begin() + static_cast<std::ptrdiff_t>(n * image_bytes()));
  return out;
}

void DatasetHandle::validate() const {
  if (images.size() != labels.size() * image_bytes()) {
    throw DatasetError("dataset '" + split + "': " + std::to_string(images.size()) +
                       " pixel bytes for " + std::to_string(labels.size()) + " images of " +
                       std::to_string(height) + "x" + std::to_string(width) + "x" +
                       std::to_string(channels));
  }
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] > 9) {
      throw DatasetError("dataset '" + split + "': label " + std::to_string(labels[i]) +
                         " at index " + std::to_string(i) + " outside [0, 9]");
    }
  }
}

DatasetHandle read_cifar10_batch(const fs::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw DatasetError("cannot open CIFAR-10 batch " + path.string());
  std::vector<std::uint8_t> raw((std::istreambuf_iterator<char>(is)), std::istreambuf_iterator<char>());
  if (raw.empty() || raw.size() % kCifarRecordBytes != 0) {
    const std::size_t complete = raw.size() / kCifarRecordBytes;
    throw DatasetError(path.string() + ": size " + std::to_string(raw.size()) +
                       " is not a multiple of 3073 bytes per record (expected 3073*N, e.g. " +
                       std::to_string(kCifarRecordBytes * (complete + 1)) +
                       "); truncated record starts at byte offset " +
                       std::to_string(complete * kCifarRecordBytes));
  }
  DatasetHandle out;
  const std::size_t n = raw.size() / kCifarRecordBytes;
  const std::size_t plane = 32 * 32;
  out.labels.resize(n);
  out.images.resize(n * 3 * plane);
  for (std::size_t r = 0; r < n; ++r) {
    const std::uint8_t* rec = raw.data() + r * kCifarRecordBytes;
    if (rec[0] > 9) {
      throw DatasetError(path.string() + ": label " + std::to_string(rec[0]) +
                         " at byte offset " + std::to_string(r * kCifarRecordBytes));
    }
    out.labels[r] = rec[0];
    std::uint8_t* dst = out.images.data() + r * 3 * plane;
    for (std::size_t p = 0; p < plane; ++p) {
      for (std::size_t c = 0; c < 3; ++c) dst[p * 3 + c] = rec[1 + c * plane + p];
    }
  }
  return out;
}

namespace {

fs::path cifar_root(const fs::path& dir) {
  if (fs::exists(dir / "data_batch_1.bin")) return dir;
  if (fs::exists(dir / "cifar-10-batches-bin" / "data_batch_1.bin")) return dir / "cifar-10-batches-bin";
  throw DatasetError("CIFAR-10 batches not found in " + dir.string() +
                     " (expected data_batch_1.bin .. data_batch_5.bin and test_batch.bin)");
}

void append(DatasetHandle& into, const DatasetHandle& part) {
  into.labels.insert(into.labels.end(), part.labels.begin(), part.labels.end());
  into.images.insert(into.images.end(), part.images.begin(), part.images.end());
}

}  // namespace

TrainTestSplit load_cifar10(const fs::path& dir) {
  const fs::path root = cifar_root(dir);
  TrainTestSplit out;
  out.train.split = "train";
  for (int b = 1; b <= 5; ++b) append(out.train, read_cifar10_batch(root / ("data_batch_" + std::to_string(b) + ".bin")));
  out.test = read_cifar10_batch(root / "test_batch.bin");
  out.test.split = "test";
  return out;
}

namespace {

constexpr char kQimgMagic[4] = {'Q', 'I', 'M', '1'};

std::uint32_t read_le32(const std::uint8_t* p) {
  return static_cast<std::uint32_t>(p[0]) | static_cast<std::uint32_t>(p[1]) << 8 |
         static_cast<std::uint32_t>(p[2]) << 16 | static_cast<std::uint32_t>(p[3]) << 24;
}

void write_le32(std::ostream& os, std::uint64_t v) {
  if (v > UINT32_MAX) throw DatasetError("QIMG: field exceeds u32 range");
  const std::array<char, 4> b{static_cast<char>(v & 0xff), static_cast<char>((v >> 8) & 0xff),
                              static_cast<char>((v >> 16) & 0xff), static_cast<char>((v >> 24) & 0xff)};
  os.write(b.data(), 4);
}

}  // namespace

DatasetHandle load_qimg(const fs::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw DatasetError("cannot open QIMG file " + path.string());
  std::vector<std::uint8_t> raw((std::istreambuf_iterator<char>(is)), std::istreambuf_iterator<char>());
  if (raw.size() < 20) {
    throw DatasetError(path.string() + ": short read, header needs 20 bytes, file has " +
                       std::to_string(raw.size()));
  }
  if (std::memcmp(raw.data(), kQimgMagic, 4) != 0) {
    throw DatasetError(path.string() + ": bad magic (expected QIM1)");
  }
  DatasetHandle out;
  const std::uint64_t count = read_le32(raw.data() + 4);
  out.height = read_le32(raw.data() + 8);
  out.width = read_le32(raw.data() + 12);
  out.channels = read_le32(raw.data() + 16);
  if (out.height == 0 || out.width == 0 || out.channels == 0) {
    throw DatasetError(path.string() + ": bad extents " + std::to_string(out.height) + "x" +
                       std::to_string(out.width) + "x" + std::to_string(out.channels));
  }
  const std::uint64_t expected = 20 + count + count * out.image_bytes();
  if (raw.size() < expected) {
    throw DatasetError(path.string() + ": short read, expected " + std::to_string(expected) +
                       " bytes, file has " + std::to_string(raw.size()));
  }
  if (raw.size() > expected) {
    throw DatasetError(path.string() + ": " + std::to_string(raw.size() - expected) +
                       " trailing bytes after " + std::to_string(expected));
  }
  out.labels.assign(raw.begin() + 20, raw.begin() + 20 + static_cast<std::ptrdiff_t>(count));
  out.images.assign(raw.begin() + 20 + static_cast<std::ptrdiff_t>(count), raw.end());
  out.split = path.stem().string();
  out.validate();
  return out;
}

void write_qimg(const fs::path& path, const DatasetHandle& data) {
  data.validate();
  std::ofstream os(path, std::ios::binary);
  if (!os) throw DatasetError("cannot open " + path.string() + " for writing");
  os.write(kQimgMagic, 4);
  write_le32(os, data.size());
  write_le32(os, data.height);
  write_le32(os, data.width);
  write_le32(os, data.channels);
  os.write(reinterpret_cast<const char*>(data.labels.data()), static_cast<std::streamsize>(data.labels.size()));
  os.write(reinterpret_cast<const char*>(data.images.data()), static_cast<std::streamsize>(data.images.size()));
  if (!os) throw DatasetError("write failed for " + path.string());
}

TrainTestSplit load_svhn_qimg(const fs::path& dir) {
  TrainTestSplit out{load_qimg(dir / "train.qimg"), load_qimg(dir / "test.qimg")};
  out.train.split = "train";
  out.test.split = "test";
  return out;
}

template <std::floating_point T>
Tensor<T> encode_batch(const DatasetHandle& data, const std::vector<std::size_t>& indices) {
  if (data.channels != 3) {
    throw DatasetError("encode_batch: expected RGB images, got " + std::to_string(data.channels) +
                       " channels");
  }
  const std::size_t plane = data.height * data.width;
  Tensor<T> out(Shape{indices.size(), 4, data.height, data.width});
  const T inv = T(1) / T(255);
  for (std::size_t b = 0; b < indices.size(); ++b) {
    if (indices[b] >= data.size()) throw std::out_of_range("encode_batch: index out of range");
    const std::uint8_t* src = data.image(indices[b]);
    T* dst = out.data() + b * 4 * plane;
    for (std::size_t p = 0; p < plane; ++p) {
      for (std::size_t c = 0; c < 3; ++c) dst[(c + 1) * plane + p] = static_cast<T>(src[p * 3 + c]) * inv;
    }
  }
  return out;
}

template <std::floating_point T>
QTensor<T> encode_quaternion(const DatasetHandle& data, std::size_t index) {
  const Tensor<T> planar = encode_batch<T>(data, {index});
  QTensor<T> out(Shape{1, data.height, data.width});
  for (std::size_t c = 0; c < 4; ++c) {
    std::copy(planar.data() + c * out.size(), planar.data() + (c + 1) * out.size(), out.plane(c).begin());
  }
  return out;
}

template Tensor<float> encode_batch(const DatasetHandle&, const std::vector<std::size_t>&);
template Tensor<double> encode_batch(const DatasetHandle&, const std::vector<std::size_t>&);
template QTensor<float> encode_quaternion(const DatasetHandle&, std::size_t);
template QTensor<double> encode_quaternion(const DatasetHandle&, std::size_t);

}  // namespace qnn
