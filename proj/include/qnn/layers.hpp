#pragma once

// Quaternion layers evaluated directly on QTensors. These are the plain
// per-quaternion definitions; the training path builds the same maps on the
// autodiff tape through real block matrices (ad::qconv2d, ad::qlinear).

#include <cstddef>

#include "qnn/qtensor.hpp"
#include "qnn/tensor.hpp"

namespace qnn {

/// z = W a + b with weight [m, n] and bias [m].
template <std::floating_point T>
struct QLinear {
  QTensor<T> weight;
  QTensor<T> bias;

  std::size_t in_features() const { return weight.shape().at(1); }
  std::size_t out_features() const { return weight.shape().at(0); }
};

/// Kernel [Cout, Cin, K, K] (K odd), bias [Cout]; stride 1, zero padding.
template <std::floating_point T>
struct QConv2d {
  QTensor<T> kernel;
  QTensor<T> bias;
};

struct QAvgPool2d {
  std::size_t window = 2;
};

/// z_i = sum_j w_ij (x) a_j + b_i on an input vector [n].
template <std::floating_point T>
QTensor<T> qlinear_forward(const QLinear<T>& layer, const QTensor<T>& input);

/// O = sum over input channels of G(x, y) = sum F(x + dx, y + dy) (x) w(dx, dy),
/// plus bias; input [Cin, H, W] -> [Cout, H, W].
template <std::floating_point T>
QTensor<T> qconv2d_forward(const QConv2d<T>& layer, const QTensor<T>& input);

/// Componentwise window mean over [C, H, W].
template <std::floating_point T>
QTensor<T> qavgpool_forward(const QAvgPool2d& layer, const QTensor<T>& input);

/// Real tensor [4, shape...] holding the w, x, y, z planes back to back.
template <std::floating_point T>
Tensor<T> to_planes(const QTensor<T>& q);

/// Inverse of to_planes; the leading extent must be 4.
template <std::floating_point T>
QTensor<T> from_planes(const Tensor<T>& t);

}  // namespace qnn
