#include "qnn/autodiff.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace qnn {

template <std::floating_point T>
Var<T> Tape<T>::leaf(Tensor<T> value, bool requires_grad) {
  nodes_.push_back(Node{"leaf", std::move(value), requires_grad, true, {}});
  return Var<T>(this, nodes_.size() - 1);
}

template <std::floating_point T>
Var<T> Tape<T>::record(std::string op, Tensor<T> value, const std::vector<Var<T>>& parents,
                       BackwardFn backward) {
  bool needs = false;
  for (const auto& p : parents) {
    if (p.tape() != this) throw std::invalid_argument(op + ": operand belongs to another tape");
    needs = needs || nodes_[p.id()].requires_grad;
  }
  nodes_.push_back(Node{std::move(op), std::move(value), needs, false,
                        needs ? std::move(backward) : BackwardFn{}});
  return Var<T>(this, nodes_.size() - 1);
}

template <std::floating_point T>
Tensor<T>& Tape<T>::accumulate(const Var<T>& v) {
  auto& slot = grads_.at(v.id());
  if (!slot) slot.emplace(nodes_[v.id()].value.shape(), T(0));
  return *slot;
}

template <std::floating_point T>
Gradients<T> Tape<T>::backward(const Var<T>& loss) {
  if (loss.tape() != this) throw std::invalid_argument("backward: loss belongs to another tape");
  if (nodes_[loss.id()].value.size() != 1) {
    throw ShapeError("backward: loss must be a scalar, got shape " +
                     shape_string(nodes_[loss.id()].value.shape()));
  }
  Gradients<T> out;
  if (!nodes_[loss.id()].requires_grad) return out;

  grads_.assign(nodes_.size(), std::nullopt);
  grads_[loss.id()].emplace(nodes_[loss.id()].value.shape(), T(1));
  for (std::size_t id = loss.id() + 1; id-- > 0;) {
    Node& node = nodes_[id];
    if (!grads_[id] || !node.backward) continue;
    node.backward(*this, *grads_[id]);
  }
  for (std::size_t id = 0; id < nodes_.size(); ++id) {
    const Node& node = nodes_[id];
    if (!node.is_leaf || !node.requires_grad) continue;
    if (grads_[id]) {
      out.grads_.emplace(id, std::move(*grads_[id]));
    } else {
      out.grads_.emplace(id, Tensor<T>(node.value.shape(), T(0)));
    }
  }
  grads_.clear();
  return out;
}

template class Tape<float>;
template class Tape<double>;

namespace ad {

namespace {

template <std::floating_point T>
void require_same_shape(const char* op, const Var<T>& a, const Var<T>& b) {
  if (a.shape() != b.shape()) {
    throw ShapeError(std::string(op) + ": shape mismatch " + shape_string(a.shape()) + " vs " +
                     shape_string(b.shape()));
  }
}

template <std::floating_point T>
void require_rank(const char* op, const Var<T>& a, std::size_t rank) {
  if (a.shape().size() != rank) {
    throw ShapeError(std::string(op) + ": expected rank " + std::to_string(rank) + ", got " +
                     shape_string(a.shape()));
  }
}

/// Elementwise unary op with derivative f'(x, y) given input x and output y.
template <std::floating_point T, class F, class D>
Var<T> unary(const char* op, const Var<T>& a, F f, D df) {
  const Tensor<T>& x = a.value();
  Tensor<T> y(x.shape());
  for (std::size_t i = 0; i < x.size(); ++i) y[i] = f(x[i]);
  return a.tape()->record(op, std::move(y), {a}, [a, df](Tape<T>& t, const Tensor<T>& g) {
    const Tensor<T>& xv = a.value();
    Tensor<T>& ga = t.accumulate(a);
    for (std::size_t i = 0; i < xv.size(); ++i) ga[i] += g[i] * df(xv[i]);
  });
}

template <std::floating_point T>
void dispatch_matmul(Backend b, const T* a, const T* bm, T* c, std::size_t m, std::size_t k,
                     std::size_t n, bool ta, bool tb) {
  if (b == Backend::Serial) {
    kernels::serial::matmul(a, bm, c, m, k, n, ta, tb);
  } else {
    kernels::parallel::matmul(a, bm, c, m, k, n, ta, tb);
  }
}

// Hamilton product matrices: component (row a, column b) of the real 4x4
// matrix equals sign * w[index].
constexpr int kHamIndex[4][4] = {{0, 1, 2, 3}, {1, 0, 3, 2}, {2, 3, 0, 1}, {3, 2, 1, 0}};
// F (x) w as a matrix acting on F.
constexpr int kRightSign[4][4] = {{1, -1, -1, -1}, {1, 1, 1, -1}, {1, -1, 1, 1}, {1, 1, -1, 1}};
// w (x) a as a matrix acting on a.
constexpr int kLeftSign[4][4] = {{1, -1, -1, -1}, {1, 1, -1, 1}, {1, 1, 1, -1}, {1, -1, 1, 1}};

/// Expands quaternion weights [4, rows, cols, inner...] into the real block
/// matrix [4 rows, 4 cols, inner...] using the given sign table.
template <std::floating_point T>
Var<T> hamilton_expand(const char* op, const Var<T>& w, const int (&sign)[4][4]) {
  const Shape& s = w.shape();
  if (s.size() < 3 || s[0] != 4) {
    throw ShapeError(std::string(op) + ": expected [4, rows, cols, ...], got " + shape_string(s));
  }
  const std::size_t rows = s[1];
  const std::size_t cols = s[2];
  std::size_t inner = 1;
  for (std::size_t d = 3; d < s.size(); ++d) inner *= s[d];
  Shape out_shape{4 * rows, 4 * cols};
  out_shape.insert(out_shape.end(), s.begin() + 3, s.end());
  const std::size_t plane = rows * cols * inner;

  Tensor<T> out(out_shape);
  const Tensor<T>& src = w.value();
  for (std::size_t a = 0; a < 4; ++a) {
    for (std::size_t o = 0; o < rows; ++o) {
      for (std::size_t b = 0; b < 4; ++b) {
        for (std::size_t i = 0; i < cols; ++i) {
          const T sg = static_cast<T>(sign[a][b]);
          const T* in = src.data() + kHamIndex[a][b] * plane + (o * cols + i) * inner;
          T* dst = out.data() + ((a * rows + o) * 4 * cols + b * cols + i) * inner;
          for (std::size_t p = 0; p < inner; ++p) dst[p] = sg * in[p];
        }
      }
    }
  }
  return w.tape()->record(op, std::move(out), {w},
                          [w, rows, cols, inner, plane, &sign](Tape<T>& t, const Tensor<T>& g) {
                            Tensor<T>& gw = t.accumulate(w);
                            for (std::size_t a = 0; a < 4; ++a) {
                              for (std::size_t o = 0; o < rows; ++o) {
                                for (std::size_t b = 0; b < 4; ++b) {
                                  for (std::size_t i = 0; i < cols; ++i) {
                                    const T sg = static_cast<T>(sign[a][b]);
                                    T* dst = gw.data() + kHamIndex[a][b] * plane +
                                             (o * cols + i) * inner;
                                    const T* src_g =
                                        g.data() + ((a * rows + o) * 4 * cols + b * cols + i) * inner;
                                    for (std::size_t p = 0; p < inner; ++p) dst[p] += sg * src_g[p];
                                  }
                                }
                              }
                            }
                          });
}

}  // namespace

template <std::floating_point T>
Var<T> add(const Var<T>& a, const Var<T>& b) {
  require_same_shape("add", a, b);
  Tensor<T> y(a.shape());
  for (std::size_t i = 0; i < y.size(); ++i) y[i] = a.value()[i] + b.value()[i];
  return a.tape()->record("add", std::move(y), {a, b}, [a, b](Tape<T>& t, const Tensor<T>& g) {
    if (a.requires_grad()) {
      Tensor<T>& ga = t.accumulate(a);
      for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i];
    }
    if (b.requires_grad()) {
      Tensor<T>& gb = t.accumulate(b);
      for (std::size_t i = 0; i < g.size(); ++i) gb[i] += g[i];
    }
  });
}

template <std::floating_point T>
Var<T> sub(const Var<T>& a, const Var<T>& b) {
  require_same_shape("sub", a, b);
  Tensor<T> y(a.shape());
  for (std::size_t i = 0; i < y.size(); ++i) y[i] = a.value()[i] - b.value()[i];
  return a.tape()->record("sub", std::move(y), {a, b}, [a, b](Tape<T>& t, const Tensor<T>& g) {
    if (a.requires_grad()) {
      Tensor<T>& ga = t.accumulate(a);
      for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i];
    }
    if (b.requires_grad()) {
      Tensor<T>& gb = t.accumulate(b);
      for (std::size_t i = 0; i < g.size(); ++i) gb[i] -= g[i];
    }
  });
}

template <std::floating_point T>
Var<T> mul(const Var<T>& a, const Var<T>& b) {
  require_same_shape("mul", a, b);
  Tensor<T> y(a.shape());
  for (std::size_t i = 0; i < y.size(); ++i) y[i] = a.value()[i] * b.value()[i];
  return a.tape()->record("mul", std::move(y), {a, b}, [a, b](Tape<T>& t, const Tensor<T>& g) {
    if (a.requires_grad()) {
      Tensor<T>& ga = t.accumulate(a);
      for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i] * b.value()[i];
    }
    if (b.requires_grad()) {
      Tensor<T>& gb = t.accumulate(b);
      for (std::size_t i = 0; i < g.size(); ++i) gb[i] += g[i] * a.value()[i];
    }
  });
}

template <std::floating_point T>
Var<T> div(const Var<T>& a, const Var<T>& b) {
  require_same_shape("div", a, b);
  Tensor<T> y(a.shape());
  for (std::size_t i = 0; i < y.size(); ++i) y[i] = a.value()[i] / b.value()[i];
  return a.tape()->record("div", std::move(y), {a, b}, [a, b](Tape<T>& t, const Tensor<T>& g) {
    if (a.requires_grad()) {
      Tensor<T>& ga = t.accumulate(a);
      for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i] / b.value()[i];
    }
    if (b.requires_grad()) {
      Tensor<T>& gb = t.accumulate(b);
      for (std::size_t i = 0; i < g.size(); ++i) {
        const T bv = b.value()[i];
        gb[i] -= g[i] * a.value()[i] / (bv * bv);
      }
    }
  });
}

template <std::floating_point T>
Var<T> neg(const Var<T>& a) {
  return unary<T>("neg", a, [](T x) { return -x; }, [](T) { return T(-1); });
}

template <std::floating_point T>
Var<T> scale(const Var<T>& a, T s) {
  return unary<T>("scale", a, [s](T x) { return s * x; }, [s](T) { return s; });
}

template <std::floating_point T>
Var<T> tanh(const Var<T>& a) {
  return unary<T>(
      "tanh", a, [](T x) { return std::tanh(x); },
      [](T x) {
        const T y = std::tanh(x);
        return T(1) - y * y;
      });
}

template <std::floating_point T>
Var<T> sin(const Var<T>& a) {
  return unary<T>("sin", a, [](T x) { return std::sin(x); }, [](T x) { return std::cos(x); });
}

template <std::floating_point T>
Var<T> cos(const Var<T>& a) {
  return unary<T>("cos", a, [](T x) { return std::cos(x); }, [](T x) { return -std::sin(x); });
}

template <std::floating_point T>
Var<T> sqrt(const Var<T>& a) {
  return unary<T>(
      "sqrt", a, [](T x) { return std::sqrt(x); }, [](T x) { return T(0.5) / std::sqrt(x); });
}

template <std::floating_point T>
Var<T> relu(const Var<T>& a) {
  return unary<T>(
      "relu", a, [](T x) { return std::max(x, T(0)); }, [](T x) { return x > T(0) ? T(1) : T(0); });
}

template <std::floating_point T>
Var<T> atan2(const Var<T>& y, const Var<T>& x) {
  require_same_shape("atan2", y, x);
  Tensor<T> out(y.shape());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = std::atan2(y.value()[i], x.value()[i]);
  return y.tape()->record("atan2", std::move(out), {y, x}, [y, x](Tape<T>& t, const Tensor<T>& g) {
    const Tensor<T>& yv = y.value();
    const Tensor<T>& xv = x.value();
    if (y.requires_grad()) {
      Tensor<T>& gy = t.accumulate(y);
      for (std::size_t i = 0; i < g.size(); ++i) {
        gy[i] += g[i] * xv[i] / (xv[i] * xv[i] + yv[i] * yv[i]);
      }
    }
    if (x.requires_grad()) {
      Tensor<T>& gx = t.accumulate(x);
      for (std::size_t i = 0; i < g.size(); ++i) {
        gx[i] -= g[i] * yv[i] / (xv[i] * xv[i] + yv[i] * yv[i]);
      }
    }
  });
}

template <std::floating_point T>
Var<T> sum(const Var<T>& a) {
  T acc = T(0);
  for (T v : a.value().span()) acc += v;
  return a.tape()->record("sum", Tensor<T>::scalar(acc), {a}, [a](Tape<T>& t, const Tensor<T>& g) {
    Tensor<T>& ga = t.accumulate(a);
    for (std::size_t i = 0; i < ga.size(); ++i) ga[i] += g[0];
  });
}

template <std::floating_point T>
Var<T> mean(const Var<T>& a) {
  const T n = static_cast<T>(a.value().size());
  T acc = T(0);
  for (T v : a.value().span()) acc += v;
  return a.tape()->record("mean", Tensor<T>::scalar(acc / n), {a},
                          [a, n](Tape<T>& t, const Tensor<T>& g) {
                            Tensor<T>& ga = t.accumulate(a);
                            for (std::size_t i = 0; i < ga.size(); ++i) ga[i] += g[0] / n;
                          });
}

template <std::floating_point T>
Var<T> reshape(const Var<T>& a, Shape shape) {
  if (shape_size(shape) != a.value().size()) {
    throw ShapeError("reshape: cannot reshape " + shape_string(a.shape()) + " to " +
                     shape_string(shape));
  }
  return a.tape()->record("reshape", a.value().reshaped(std::move(shape)), {a},
                          [a](Tape<T>& t, const Tensor<T>& g) {
                            Tensor<T>& ga = t.accumulate(a);
                            for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i];
                          });
}

template <std::floating_point T>
Var<T> matmul(const Var<T>& a, const Var<T>& b) {
  require_rank("matmul", a, 2);
  require_rank("matmul", b, 2);
  const std::size_t m = a.shape()[0], k = a.shape()[1], n = b.shape()[1];
  if (b.shape()[0] != k) {
    throw ShapeError("matmul: inner dimensions differ: " + shape_string(a.shape()) + " x " +
                     shape_string(b.shape()));
  }
  Tape<T>* tape = a.tape();
  Tensor<T> c(Shape{m, n});
  dispatch_matmul(tape->backend(), a.value().data(), b.value().data(), c.data(), m, k, n, false,
                  false);
  return tape->record("matmul", std::move(c), {a, b}, [a, b, m, k, n](Tape<T>& t, const Tensor<T>& g) {
    std::vector<T> tmp;
    if (a.requires_grad()) {
      tmp.assign(m * k, T(0));
      dispatch_matmul(t.backend(), g.data(), b.value().data(), tmp.data(), m, n, k, false, true);
      Tensor<T>& ga = t.accumulate(a);
      for (std::size_t i = 0; i < tmp.size(); ++i) ga[i] += tmp[i];
    }
    if (b.requires_grad()) {
      tmp.assign(k * n, T(0));
      dispatch_matmul(t.backend(), a.value().data(), g.data(), tmp.data(), k, m, n, true, false);
      Tensor<T>& gb = t.accumulate(b);
      for (std::size_t i = 0; i < tmp.size(); ++i) gb[i] += tmp[i];
    }
  });
}

template <std::floating_point T>
Var<T> linear(const Var<T>& x, const Var<T>& weight, const std::optional<Var<T>>& bias) {
  require_rank("linear", x, 2);
  require_rank("linear", weight, 2);
  const std::size_t n = x.shape()[0], in = x.shape()[1], out = weight.shape()[0];
  if (weight.shape()[1] != in) {
    throw ShapeError("linear: input features " + std::to_string(in) + " do not match weight " +
                     shape_string(weight.shape()));
  }
  if (bias && bias->value().size() != out) {
    throw ShapeError("linear: bias " + shape_string(bias->shape()) + " does not match " +
                     std::to_string(out) + " outputs");
  }
  Tape<T>* tape = x.tape();
  Tensor<T> y(Shape{n, out});
  dispatch_matmul(tape->backend(), x.value().data(), weight.value().data(), y.data(), n, in, out,
                  false, true);
  if (bias) {
    for (std::size_t r = 0; r < n; ++r) {
      for (std::size_t o = 0; o < out; ++o) y[r * out + o] += bias->value()[o];
    }
  }
  std::vector<Var<T>> parents{x, weight};
  if (bias) parents.push_back(*bias);
  return tape->record("linear", std::move(y), parents,
                      [x, weight, bias, n, in, out](Tape<T>& t, const Tensor<T>& g) {
                        std::vector<T> tmp;
                        if (x.requires_grad()) {
                          tmp.assign(n * in, T(0));
                          dispatch_matmul(t.backend(), g.data(), weight.value().data(), tmp.data(),
                                          n, out, in, false, false);
                          Tensor<T>& gx = t.accumulate(x);
                          for (std::size_t i = 0; i < tmp.size(); ++i) gx[i] += tmp[i];
                        }
                        if (weight.requires_grad()) {
                          tmp.assign(out * in, T(0));
                          dispatch_matmul(t.backend(), g.data(), x.value().data(), tmp.data(), out,
                                          n, in, true, false);
                          Tensor<T>& gw = t.accumulate(weight);
                          for (std::size_t i = 0; i < tmp.size(); ++i) gw[i] += tmp[i];
                        }
                        if (bias && bias->requires_grad()) {
                          Tensor<T>& gb = t.accumulate(*bias);
                          for (std::size_t r = 0; r < n; ++r) {
                            for (std::size_t o = 0; o < out; ++o) gb[o] += g[r * out + o];
                          }
                        }
                      });
}

template <std::floating_point T>
Var<T> conv2d(const Var<T>& x, const Var<T>& weight, const std::optional<Var<T>>& bias) {
  require_rank("conv2d", x, 4);
  require_rank("conv2d", weight, 4);
  const Shape& xs = x.shape();
  const Shape& ws = weight.shape();
  if (ws[1] != xs[1]) {
    throw ShapeError("conv2d: input has " + std::to_string(xs[1]) + " channels, weight expects " +
                     std::to_string(ws[1]));
  }
  if (ws[2] != ws[3] || ws[2] % 2 == 0) {
    throw ShapeError("conv2d: kernel must be square with odd extent, got " + shape_string(ws));
  }
  if (bias && bias->value().size() != ws[0]) {
    throw ShapeError("conv2d: bias " + shape_string(bias->shape()) + " does not match " +
                     std::to_string(ws[0]) + " output channels");
  }
  const kernels::ConvDims d{xs[0], xs[1], ws[0], xs[2], xs[3], ws[2]};
  Tape<T>* tape = x.tape();
  Tensor<T> y(Shape{d.batch, d.out_channels, d.height, d.width});
  const T* bptr = bias ? bias->value().data() : nullptr;
  if (tape->backend() == Backend::Serial) {
    kernels::serial::conv2d_forward(d, x.value().data(), weight.value().data(), bptr, y.data());
  } else {
    kernels::parallel::conv2d_forward(d, x.value().data(), weight.value().data(), bptr, y.data());
  }
  std::vector<Var<T>> parents{x, weight};
  if (bias) parents.push_back(*bias);
  return tape->record("conv2d", std::move(y), parents, [x, weight, bias, d](Tape<T>& t, const Tensor<T>& g) {
    const bool serial = t.backend() == Backend::Serial;
    if (x.requires_grad()) {
      Tensor<T> gi(x.shape());
      if (serial) {
        kernels::serial::conv2d_backward_input(d, g.data(), weight.value().data(), gi.data());
      } else {
        kernels::parallel::conv2d_backward_input(d, g.data(), weight.value().data(), gi.data());
      }
      Tensor<T>& gx = t.accumulate(x);
      for (std::size_t i = 0; i < gi.size(); ++i) gx[i] += gi[i];
    }
    T* gw = weight.requires_grad() ? t.accumulate(weight).data() : nullptr;
    T* gb = (bias && bias->requires_grad()) ? t.accumulate(*bias).data() : nullptr;
    if (gw || gb) {
      if (serial) {
        kernels::serial::conv2d_backward_params(d, g.data(), x.value().data(), gw, gb);
      } else {
        kernels::parallel::conv2d_backward_params(d, g.data(), x.value().data(), gw, gb);
      }
    }
  });
}

template <std::floating_point T>
Var<T> avgpool2d(const Var<T>& x, std::size_t window) {
  require_rank("avgpool2d", x, 4);
  const Shape& xs = x.shape();
  if (window == 0 || xs[2] % window != 0 || xs[3] % window != 0) {
    throw ShapeError("avgpool2d: extents " + shape_string(xs) + " not divisible by window " +
                     std::to_string(window));
  }
  const kernels::PoolDims d{xs[0], xs[1], xs[2], xs[3], window};
  Tape<T>* tape = x.tape();
  Tensor<T> y(Shape{xs[0], xs[1], xs[2] / window, xs[3] / window});
  if (tape->backend() == Backend::Serial) {
    kernels::serial::avgpool2d_forward(d, x.value().data(), y.data());
  } else {
    kernels::parallel::avgpool2d_forward(d, x.value().data(), y.data());
  }
  return tape->record("avgpool2d", std::move(y), {x}, [x, d](Tape<T>& t, const Tensor<T>& g) {
    Tensor<T> gi(x.shape());
    if (t.backend() == Backend::Serial) {
      kernels::serial::avgpool2d_backward(d, g.data(), gi.data());
    } else {
      kernels::parallel::avgpool2d_backward(d, g.data(), gi.data());
    }
    Tensor<T>& gx = t.accumulate(x);
    for (std::size_t i = 0; i < gi.size(); ++i) gx[i] += gi[i];
  });
}

template <std::floating_point T>
Var<T> softmax_cross_entropy(const Var<T>& logits, const std::vector<int>& labels) {
  require_rank("softmax_cross_entropy", logits, 2);
  const std::size_t n = logits.shape()[0], k = logits.shape()[1];
  if (labels.size() != n) {
    throw ShapeError("softmax_cross_entropy: " + std::to_string(labels.size()) + " labels for " +
                     std::to_string(n) + " rows");
  }
  Tensor<T> probs(Shape{n, k});
  T loss = T(0);
  const Tensor<T>& z = logits.value();
  for (std::size_t r = 0; r < n; ++r) {
    const int label = labels[r];
    if (label < 0 || static_cast<std::size_t>(label) >= k) {
      throw std::out_of_range("softmax_cross_entropy: label " + std::to_string(label) +
                              " outside [0, " + std::to_string(k) + ")");
    }
    const T* row = z.data() + r * k;
    const T mx = *std::max_element(row, row + k);
    T denom = T(0);
    for (std::size_t c = 0; c < k; ++c) {
      probs[r * k + c] = std::exp(row[c] - mx);
      denom += probs[r * k + c];
    }
    for (std::size_t c = 0; c < k; ++c) probs[r * k + c] /= denom;
    loss += std::log(denom) + mx - row[label];
  }
  loss /= static_cast<T>(n);
  return logits.tape()->record(
      "softmax_cross_entropy", Tensor<T>::scalar(loss), {logits},
      [logits, labels, probs = std::move(probs), n, k](Tape<T>& t, const Tensor<T>& g) {
        Tensor<T>& gz = t.accumulate(logits);
        const T s = g[0] / static_cast<T>(n);
        for (std::size_t r = 0; r < n; ++r) {
          for (std::size_t c = 0; c < k; ++c) {
            const T onehot = static_cast<std::size_t>(labels[r]) == c ? T(1) : T(0);
            gz[r * k + c] += s * (probs[r * k + c] - onehot);
          }
        }
      });
}

template <std::floating_point T>
Var<T> qactivation(const Var<T>& x, ActivationKind kind, AngleConvention conv) {
  const Shape& xs = x.shape();
  if (xs.size() < 2 || xs[1] % 4 != 0) {
    throw ShapeError("qactivation: expected planar quaternion layout [N, 4C, ...], got " +
                     shape_string(xs));
  }
  const std::size_t batch = xs[0];
  const std::size_t per_sample = x.value().size() / batch / 4;
  Tape<T>* tape = x.tape();
  Tensor<T> y(xs);
  if (tape->backend() == Backend::Serial) {
    kernels::serial::activation_forward(kind, conv, batch, per_sample, x.value().data(), y.data());
  } else {
    kernels::parallel::activation_forward(kind, conv, batch, per_sample, x.value().data(), y.data());
  }
  return tape->record(std::string("qactivation:") + std::string(to_string(kind)), std::move(y), {x},
                      [x, kind, conv, batch, per_sample](Tape<T>& t, const Tensor<T>& g) {
                        Tensor<T> gi(x.shape());
                        if (t.backend() == Backend::Serial) {
                          kernels::serial::activation_backward(kind, conv, batch, per_sample,
                                                               x.value().data(), g.data(), gi.data());
                        } else {
                          kernels::parallel::activation_backward(kind, conv, batch, per_sample,
                                                                 x.value().data(), g.data(),
                                                                 gi.data());
                        }
                        Tensor<T>& gx = t.accumulate(x);
                        for (std::size_t i = 0; i < gi.size(); ++i) gx[i] += gi[i];
                      });
}

template <std::floating_point T>
Var<T> hamilton_expand_right(const Var<T>& kernel) {
  return hamilton_expand("hamilton_expand_right", kernel, kRightSign);
}

template <std::floating_point T>
Var<T> hamilton_expand_left(const Var<T>& weight) {
  return hamilton_expand("hamilton_expand_left", weight, kLeftSign);
}

template <std::floating_point T>
Var<T> qconv2d(const Var<T>& x, const Var<T>& kernel, const std::optional<Var<T>>& bias) {
  if (kernel.shape().size() != 5) {
    throw ShapeError("qconv2d: kernel must be [4, Cout, Cin, K, K], got " +
                     shape_string(kernel.shape()));
  }
  std::optional<Var<T>> flat_bias;
  if (bias) flat_bias = reshape(*bias, Shape{bias->value().size()});
  return conv2d(x, hamilton_expand_right(kernel), flat_bias);
}

template <std::floating_point T>
Var<T> qlinear(const Var<T>& x, const Var<T>& weight, const std::optional<Var<T>>& bias) {
  if (weight.shape().size() != 3) {
    throw ShapeError("qlinear: weight must be [4, m, n], got " + shape_string(weight.shape()));
  }
  std::optional<Var<T>> flat_bias;
  if (bias) flat_bias = reshape(*bias, Shape{bias->value().size()});
  return linear(x, hamilton_expand_left(weight), flat_bias);
}

#define QNN_INSTANTIATE(T)                                                                      \
  template Var<T> add(const Var<T>&, const Var<T>&);                                            \
  template Var<T> sub(const Var<T>&, const Var<T>&);                                            \
  template Var<T> mul(const Var<T>&, const Var<T>&);                                            \
  template Var<T> div(const Var<T>&, const Var<T>&);                                            \
  template Var<T> neg(const Var<T>&);                                                           \
  template Var<T> scale(const Var<T>&, T);                                                      \
  template Var<T> tanh(const Var<T>&);                                                          \
  template Var<T> sin(const Var<T>&);                                                           \
  template Var<T> cos(const Var<T>&);                                                           \
  template Var<T> sqrt(const Var<T>&);                                                          \
  template Var<T> relu(const Var<T>&);                                                          \
  template Var<T> atan2(const Var<T>&, const Var<T>&);                                          \
  template Var<T> sum(const Var<T>&);                                                           \
  template Var<T> mean(const Var<T>&);                                                          \
  template Var<T> reshape(const Var<T>&, Shape);                                                \
  template Var<T> matmul(const Var<T>&, const Var<T>&);                                         \
  template Var<T> linear(const Var<T>&, const Var<T>&, const std::optional<Var<T>>&);           \
  template Var<T> conv2d(const Var<T>&, const Var<T>&, const std::optional<Var<T>>&);           \
  template Var<T> avgpool2d(const Var<T>&, std::size_t);                                        \
  template Var<T> softmax_cross_entropy(const Var<T>&, const std::vector<int>&);                \
  template Var<T> qactivation(const Var<T>&, ActivationKind, AngleConvention);                  \
  template Var<T> hamilton_expand_right(const Var<T>&);                                         \
  template Var<T> hamilton_expand_left(const Var<T>&);                                          \
  template Var<T> qconv2d(const Var<T>&, const Var<T>&, const std::optional<Var<T>>&);          \
  template Var<T> qlinear(const Var<T>&, const Var<T>&, const std::optional<Var<T>>&);
QNN_INSTANTIATE(float)
QNN_INSTANTIATE(double)
#undef QNN_INSTANTIATE

}  // namespace ad
}  // namespace qnn
