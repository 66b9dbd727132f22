#pragma once

#include <array>
#include <cstddef>
#include <functional>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "qnn/quaternion.hpp"

namespace qnn {

using Shape = std::vector<std::size_t>;

inline std::size_t shape_size(const Shape& shape) {
  return std::accumulate(shape.begin(), shape.end(), std::size_t{1}, std::multiplies<>{});
}

inline std::string shape_string(const Shape& shape) {
  std::string s = "[";
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) s += ", ";
    s += std::to_string(shape[i]);
  }
  return s + "]";
}

/// N-dimensional array of quaternions kept as four row-major real planes
/// (w, x, y, z) of identical length.
template <std::floating_point T>
class QTensor {
 public:
  QTensor() = default;
  explicit QTensor(Shape shape) : shape_(std::move(shape)) {
    const std::size_t n = shape_size(shape_);
    for (auto& p : planes_) p.assign(n, T(0));
  }

  static QTensor filled(Shape shape, const Quaternion<T>& value) {
    QTensor t(std::move(shape));
    for (std::size_t i = 0; i < t.size(); ++i) t.set(i, value);
    return t;
  }

  const Shape& shape() const { return shape_; }
  std::size_t rank() const { return shape_.size(); }
  std::size_t size() const { return planes_[0].size(); }

  Quaternion<T> at(std::size_t i) const {
    return {planes_[0][i], planes_[1][i], planes_[2][i], planes_[3][i]};
  }
  void set(std::size_t i, const Quaternion<T>& q) {
    planes_[0][i] = q.w;
    planes_[1][i] = q.x;
    planes_[2][i] = q.y;
    planes_[3][i] = q.z;
  }

  /// Row-major flat index from a multi-index.
  std::size_t index(std::initializer_list<std::size_t> idx) const {
    if (idx.size() != shape_.size()) throw std::invalid_argument("QTensor::index: rank mismatch");
    std::size_t flat = 0;
    std::size_t d = 0;
    for (std::size_t i : idx) {
      if (i >= shape_[d]) throw std::out_of_range("QTensor::index: index out of range");
      flat = flat * shape_[d++] + i;
    }
    return flat;
  }
  Quaternion<T> at(std::initializer_list<std::size_t> idx) const { return at(index(idx)); }
  void set(std::initializer_list<std::size_t> idx, const Quaternion<T>& q) { set(index(idx), q); }

  std::span<const T> plane(std::size_t c) const { return planes_.at(c); }
  std::span<T> plane(std::size_t c) { return planes_.at(c); }

  bool operator==(const QTensor&) const = default;

 private:
  Shape shape_;
  std::array<std::vector<T>, 4> planes_;
};

}  // namespace qnn
