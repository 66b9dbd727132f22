#include <algorithm>

#include "qnn/kernels.hpp"

namespace qnn::kernels::serial {

template <class T>
void conv2d_forward(const ConvDims& d, const T* input, const T* weight, const T* bias, T* output) {
  const auto pad = static_cast<std::ptrdiff_t>(d.kernel / 2);
  const auto h = static_cast<std::ptrdiff_t>(d.height);
  const auto w = static_cast<std::ptrdiff_t>(d.width);
  const std::size_t hw = d.height * d.width;
  for (std::size_t n = 0; n < d.batch; ++n) {
    for (std::size_t o = 0; o < d.out_channels; ++o) {
      T* out = output + (n * d.out_channels + o) * hw;
      for (std::ptrdiff_t y = 0; y < h; ++y) {
        for (std::ptrdiff_t x = 0; x < w; ++x) {
          T acc = bias ? bias[o] : T(0);
          for (std::size_t i = 0; i < d.in_channels; ++i) {
            const T* in = input + (n * d.in_channels + i) * hw;
            const T* ker = weight + (o * d.in_channels + i) * d.kernel * d.kernel;
            for (std::size_t ky = 0; ky < d.kernel; ++ky) {
              const std::ptrdiff_t sy = y + static_cast<std::ptrdiff_t>(ky) - pad;
              if (sy < 0 || sy >= h) continue;
              for (std::size_t kx = 0; kx < d.kernel; ++kx) {
                const std::ptrdiff_t sx = x + static_cast<std::ptrdiff_t>(kx) - pad;
                if (sx < 0 || sx >= w) continue;
                acc += in[sy * w + sx] * ker[ky * d.kernel + kx];
              }
            }
          }
          out[y * w + x] = acc;
        }
      }
    }
  }
}

template <class T>
void conv2d_backward_input(const ConvDims& d, const T* grad_out, const T* weight, T* grad_in) {
  const auto pad = static_cast<std::ptrdiff_t>(d.kernel / 2);
  const auto h = static_cast<std::ptrdiff_t>(d.height);
  const auto w = static_cast<std::ptrdiff_t>(d.width);
  const std::size_t hw = d.height * d.width;
  std::fill(grad_in, grad_in + d.batch * d.in_channels * hw, T(0));
  for (std::size_t n = 0; n < d.batch; ++n) {
    for (std::size_t o = 0; o < d.out_channels; ++o) {
      const T* go = grad_out + (n * d.out_channels + o) * hw;
      for (std::size_t i = 0; i < d.in_channels; ++i) {
        T* gi = grad_in + (n * d.in_channels + i) * hw;
        const T* ker = weight + (o * d.in_channels + i) * d.kernel * d.kernel;
        for (std::ptrdiff_t y = 0; y < h; ++y) {
          for (std::ptrdiff_t x = 0; x < w; ++x) {
            const T g = go[y * w + x];
            for (std::size_t ky = 0; ky < d.kernel; ++ky) {
              const std::ptrdiff_t sy = y + static_cast<std::ptrdiff_t>(ky) - pad;
              if (sy < 0 || sy >= h) continue;
              for (std::size_t kx = 0; kx < d.kernel; ++kx) {
                const std::ptrdiff_t sx = x + static_cast<std::ptrdiff_t>(kx) - pad;
                if (sx < 0 || sx >= w) continue;
                gi[sy * w + sx] += g * ker[ky * d.kernel + kx];
              }
            }
          }
        }
      }
    }
  }
}

template <class T>
void conv2d_backward_params(const ConvDims& d, const T* grad_out, const T* input, T* grad_weight,
                            T* grad_bias) {
  const auto pad = static_cast<std::ptrdiff_t>(d.kernel / 2);
  const auto h = static_cast<std::ptrdiff_t>(d.height);
  const auto w = static_cast<std::ptrdiff_t>(d.width);
  const std::size_t hw = d.height * d.width;
  for (std::size_t n = 0; n < d.batch; ++n) {
    for (std::size_t o = 0; o < d.out_channels; ++o) {
      const T* go = grad_out + (n * d.out_channels + o) * hw;
      if (grad_bias) {
        for (std::size_t p = 0; p < hw; ++p) grad_bias[o] += go[p];
      }
      if (!grad_weight) continue;
      for (std::size_t i = 0; i < d.in_channels; ++i) {
        const T* in = input + (n * d.in_channels + i) * hw;
        T* gk = grad_weight + (o * d.in_channels + i) * d.kernel * d.kernel;
        for (std::size_t ky = 0; ky < d.kernel; ++ky) {
          for (std::size_t kx = 0; kx < d.kernel; ++kx) {
            T acc = T(0);
            for (std::ptrdiff_t y = 0; y < h; ++y) {
              const std::ptrdiff_t sy = y + static_cast<std::ptrdiff_t>(ky) - pad;
              if (sy < 0 || sy >= h) continue;
              for (std::ptrdiff_t x = 0; x < w; ++x) {
                const std::ptrdiff_t sx = x + static_cast<std::ptrdiff_t>(kx) - pad;
                if (sx < 0 || sx >= w) continue;
                acc += go[y * w + x] * in[sy * w + sx];
              }
            }
            gk[ky * d.kernel + kx] += acc;
          }
        }
      }
    }
  }
}

template <class T>
void avgpool2d_forward(const PoolDims& d, const T* input, T* output) {
  const std::size_t oh = d.height / d.window;
  const std::size_t ow = d.width / d.window;
  const T inv = T(1) / static_cast<T>(d.window * d.window);
  for (std::size_t c = 0; c < d.batch * d.channels; ++c) {
    const T* in = input + c * d.height * d.width;
    T* out = output + c * oh * ow;
    for (std::size_t y = 0; y < oh; ++y) {
      for (std::size_t x = 0; x < ow; ++x) {
        T acc = T(0);
        for (std::size_t dy = 0; dy < d.window; ++dy) {
          for (std::size_t dx = 0; dx < d.window; ++dx) {
            acc += in[(y * d.window + dy) * d.width + x * d.window + dx];
          }
        }
        out[y * ow + x] = acc * inv;
      }
    }
  }
}

template <class T>
void avgpool2d_backward(const PoolDims& d, const T* grad_out, T* grad_in) {
  const std::size_t oh = d.height / d.window;
  const std::size_t ow = d.width / d.window;
  const T inv = T(1) / static_cast<T>(d.window * d.window);
  for (std::size_t c = 0; c < d.batch * d.channels; ++c) {
    T* gi = grad_in + c * d.height * d.width;
    const T* go = grad_out + c * oh * ow;
    for (std::size_t y = 0; y < d.height; ++y) {
      for (std::size_t x = 0; x < d.width; ++x) {
        gi[y * d.width + x] = go[(y / d.window) * ow + x / d.window] * inv;
      }
    }
  }
}

template <class T>
void matmul(const T* a, const T* b, T* c, std::size_t m, std::size_t k, std::size_t n,
            bool transpose_a, bool transpose_b) {
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      T acc = T(0);
      for (std::size_t p = 0; p < k; ++p) {
        const T av = transpose_a ? a[p * m + i] : a[i * k + p];
        const T bv = transpose_b ? b[j * k + p] : b[p * n + j];
        acc += av * bv;
      }
      c[i * n + j] = acc;
    }
  }
}

template <class T>
void activation_forward(ActivationKind kind, AngleConvention conv, std::size_t batch,
                        std::size_t per_sample, const T* input, T* output) {
  const std::size_t s = per_sample;
  for (std::size_t n = 0; n < batch; ++n) {
    const T* in = input + n * 4 * s;
    T* out = output + n * 4 * s;
    for (std::size_t m = 0; m < s; ++m) {
      const Quaternion<T> q{in[m], in[m + s], in[m + 2 * s], in[m + 3 * s]};
      const Quaternion<T> a = apply(kind, conv, q, DegeneracyMode::Lenient);
      out[m] = a.w;
      out[m + s] = a.x;
      out[m + 2 * s] = a.y;
      out[m + 3 * s] = a.z;
    }
  }
}

template <class T>
void activation_backward(ActivationKind kind, AngleConvention conv, std::size_t batch,
                         std::size_t per_sample, const T* input, const T* grad_out, T* grad_in) {
  const std::size_t s = per_sample;
  for (std::size_t n = 0; n < batch; ++n) {
    const T* in = input + n * 4 * s;
    const T* go = grad_out + n * 4 * s;
    T* gi = grad_in + n * 4 * s;
    for (std::size_t m = 0; m < s; ++m) {
      const Quaternion<T> q{in[m], in[m + s], in[m + 2 * s], in[m + 3 * s]};
      const Quaternion<T> g{go[m], go[m + s], go[m + 2 * s], go[m + 3 * s]};
      const Quaternion<T> r = apply_vjp(kind, conv, q, g);
      gi[m] = r.w;
      gi[m + s] = r.x;
      gi[m + 2 * s] = r.y;
      gi[m + 3 * s] = r.z;
    }
  }
}

#define QNN_INSTANTIATE(T)                                                                     \
  template void conv2d_forward<T>(const ConvDims&, const T*, const T*, const T*, T*);          \
  template void conv2d_backward_input<T>(const ConvDims&, const T*, const T*, T*);             \
  template void conv2d_backward_params<T>(const ConvDims&, const T*, const T*, T*, T*);        \
  template void avgpool2d_forward<T>(const PoolDims&, const T*, T*);                           \
  template void avgpool2d_backward<T>(const PoolDims&, const T*, T*);                          \
  template void matmul<T>(const T*, const T*, T*, std::size_t, std::size_t, std::size_t, bool, \
                          bool);                                                               \
  template void activation_forward<T>(ActivationKind, AngleConvention, std::size_t,            \
                                      std::size_t, const T*, T*);                              \
  template void activation_backward<T>(ActivationKind, AngleConvention, std::size_t,           \
                                       std::size_t, const T*, const T*, T*);
QNN_INSTANTIATE(float)
QNN_INSTANTIATE(double)
#undef QNN_INSTANTIATE

}  // namespace qnn::kernels::serial
