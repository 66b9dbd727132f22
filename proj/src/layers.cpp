#include "qnn/layers.hpp"

#include <algorithm>

#include "qnn/autodiff.hpp"

namespace qnn {

template <std::floating_point T>
QTensor<T> qlinear_forward(const QLinear<T>& layer, const QTensor<T>& input) {
  const Shape& ws = layer.weight.shape();
  if (ws.size() != 2) throw ShapeError("qlinear_forward: weight must be [m, n], got " + shape_string(ws));
  const std::size_t m = ws[0], n = ws[1];
  if (input.shape() != Shape{n}) {
    throw ShapeError("qlinear_forward: input " + shape_string(input.shape()) + " does not match " +
                     std::to_string(n) + " features");
  }
  if (layer.bias.shape() != Shape{m}) {
    throw ShapeError("qlinear_forward: bias " + shape_string(layer.bias.shape()) +
                     " does not match " + std::to_string(m) + " outputs");
  }
  QTensor<T> out(Shape{m});
  for (std::size_t i = 0; i < m; ++i) {
    Quaternion<T> acc = layer.bias.at(i);
    for (std::size_t j = 0; j < n; ++j) acc = acc + hamilton(layer.weight.at(i * n + j), input.at(j));
    out.set(i, acc);
  }
  return out;
}

template <std::floating_point T>
QTensor<T> qconv2d_forward(const QConv2d<T>& layer, const QTensor<T>& input) {
  const Shape& ks = layer.kernel.shape();
  const Shape& xs = input.shape();
  if (ks.size() != 4 || ks[2] != ks[3] || ks[2] % 2 == 0) {
    throw ShapeError("qconv2d_forward: kernel must be [Cout, Cin, K, K] with K odd, got " +
                     shape_string(ks));
  }
  if (xs.size() != 3 || xs[0] != ks[1]) {
    throw ShapeError("qconv2d_forward: input " + shape_string(xs) + " does not match kernel " +
                     shape_string(ks));
  }
  const std::size_t cout = ks[0], cin = ks[1], k = ks[2], h = xs[1], w = xs[2];
  if (layer.bias.shape() != Shape{cout}) {
    throw ShapeError("qconv2d_forward: bias " + shape_string(layer.bias.shape()) +
                     " does not match " + std::to_string(cout) + " output channels");
  }
  const auto pad = static_cast<std::ptrdiff_t>(k / 2);
  QTensor<T> out(Shape{cout, h, w});
  for (std::size_t o = 0; o < cout; ++o) {
    for (std::size_t y = 0; y < h; ++y) {
      for (std::size_t x = 0; x < w; ++x) {
        Quaternion<T> acc = layer.bias.at(o);
        for (std::size_t i = 0; i < cin; ++i) {
          for (std::size_t ky = 0; ky < k; ++ky) {
            const std::ptrdiff_t sy = static_cast<std::ptrdiff_t>(y + ky) - pad;
            if (sy < 0 || sy >= static_cast<std::ptrdiff_t>(h)) continue;
            for (std::size_t kx = 0; kx < k; ++kx) {
              const std::ptrdiff_t sx = static_cast<std::ptrdiff_t>(x + kx) - pad;
              if (sx < 0 || sx >= static_cast<std::ptrdiff_t>(w)) continue;
              const Quaternion<T> f = input.at((i * h + static_cast<std::size_t>(sy)) * w +
                                               static_cast<std::size_t>(sx));
              acc = acc + hamilton(f, layer.kernel.at(((o * cin + i) * k + ky) * k + kx));
            }
          }
        }
        out.set((o * h + y) * w + x, acc);
      }
    }
  }
  return out;
}

template <std::floating_point T>
QTensor<T> qavgpool_forward(const QAvgPool2d& layer, const QTensor<T>& input) {
  const Shape& xs = input.shape();
  const std::size_t win = layer.window;
  if (xs.size() != 3) throw ShapeError("qavgpool_forward: expected [C, H, W], got " + shape_string(xs));
  if (win == 0 || xs[1] % win != 0 || xs[2] % win != 0) {
    throw ShapeError("qavgpool_forward: extents " + shape_string(xs) +
                     " not divisible by window " + std::to_string(win));
  }
  const std::size_t c = xs[0], h = xs[1], w = xs[2], oh = h / win, ow = w / win;
  const T inv = T(1) / static_cast<T>(win * win);
  QTensor<T> out(Shape{c, oh, ow});
  for (std::size_t ch = 0; ch < c; ++ch) {
    for (std::size_t y = 0; y < oh; ++y) {
      for (std::size_t x = 0; x < ow; ++x) {
        Quaternion<T> acc{};
        for (std::size_t dy = 0; dy < win; ++dy) {
          for (std::size_t dx = 0; dx < win; ++dx) {
            acc = acc + input.at((ch * h + y * win + dy) * w + x * win + dx);
          }
        }
        out.set((ch * oh + y) * ow + x, inv * acc);
      }
    }
  }
  return out;
}

template <std::floating_point T>
Tensor<T> to_planes(const QTensor<T>& q) {
  Shape shape{4};
  shape.insert(shape.end(), q.shape().begin(), q.shape().end());
  Tensor<T> out(shape);
  for (std::size_t c = 0; c < 4; ++c) {
    std::copy(q.plane(c).begin(), q.plane(c).end(), out.data() + c * q.size());
  }
  return out;
}

template <std::floating_point T>
QTensor<T> from_planes(const Tensor<T>& t) {
  if (t.rank() < 1 || t.dim(0) != 4) {
    throw ShapeError("from_planes: leading extent must be 4, got " + shape_string(t.shape()));
  }
  QTensor<T> out(Shape(t.shape().begin() + 1, t.shape().end()));
  for (std::size_t c = 0; c < 4; ++c) {
    std::copy(t.data() + c * out.size(), t.data() + (c + 1) * out.size(), out.plane(c).begin());
  }
  return out;
}

#define QNN_INSTANTIATE(T)                                                        \
  template QTensor<T> qlinear_forward(const QLinear<T>&, const QTensor<T>&);      \
  template QTensor<T> qconv2d_forward(const QConv2d<T>&, const QTensor<T>&);      \
  template QTensor<T> qavgpool_forward(const QAvgPool2d&, const QTensor<T>&);     \
  template Tensor<T> to_planes(const QTensor<T>&);                                \
  template QTensor<T> from_planes(const Tensor<T>&);
QNN_INSTANTIATE(float)
QNN_INSTANTIATE(double)
#undef QNN_INSTANTIATE

}  // namespace qnn
