#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <stdexcept>

#include "qnn/quaternion.hpp"

namespace qnn {

/// (Re z, |Im z|) grid. Every point is realized as z = re + im * d for a
/// fixed unit direction d; magnitudes and phases do not depend on d.
struct MeshSpec {
  double re_min = -1.0;
  double re_max = 1.0;
  double im_min = 0.0;
  double im_max = 1.0;
  std::size_t resolution = 101;
  std::array<double, 3> direction{1.0, 1.0, 1.0};

  static MeshSpec value_defaults() { return {}; }
  static MeshSpec derivative_defaults() { return {-1.5, 1.5, 0.0, 1.5, 101, {1.0, 1.0, 1.0}}; }

  void validate() const {
    if (resolution < 2) throw std::invalid_argument("MeshSpec: resolution must be >= 2");
    if (im_min < 0.0) throw std::invalid_argument("MeshSpec: im range must be non-negative");
    if (!(re_max > re_min) || !(im_max > im_min)) {
      throw std::invalid_argument("MeshSpec: empty range");
    }
    const double n = std::sqrt(direction[0] * direction[0] + direction[1] * direction[1] +
                               direction[2] * direction[2]);
    if (!(n > 0.0)) throw std::invalid_argument("MeshSpec: zero imaginary direction");
  }

  std::size_t size() const { return resolution * resolution; }

  double re_at(std::size_t ix) const {
    return re_min + (re_max - re_min) * static_cast<double>(ix) / static_cast<double>(resolution - 1);
  }
  double im_at(std::size_t iy) const {
    return im_min + (im_max - im_min) * static_cast<double>(iy) / static_cast<double>(resolution - 1);
  }

  /// Point of flat index i in y-major order (im outer, re inner).
  Quatd point(std::size_t i) const {
    const double re = re_at(i % resolution);
    const double im = im_at(i / resolution);
    const double n = std::sqrt(direction[0] * direction[0] + direction[1] * direction[1] +
                               direction[2] * direction[2]);
    return {re, im * direction[0] / n, im * direction[1] / n, im * direction[2] / n};
  }
};

}  // namespace qnn
