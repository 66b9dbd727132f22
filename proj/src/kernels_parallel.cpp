#define EIGEN_DONT_PARALLELIZE
#include <Eigen/Core>
#include <algorithm>
#include <vector>

#include "qnn/kernels.hpp"

namespace qnn::kernels::parallel {

namespace {

template <class T>
using RowMat = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Unfolds one [C, H, W] image into [C*K*K, H*W] patch columns.
template <class T>
void im2col(const ConvDims& d, const T* image, T* col) {
  const auto pad = static_cast<std::ptrdiff_t>(d.kernel / 2);
  const auto h = static_cast<std::ptrdiff_t>(d.height);
  const auto w = static_cast<std::ptrdiff_t>(d.width);
  const std::size_t hw = d.height * d.width;
  for (std::size_t i = 0; i < d.in_channels; ++i) {
    const T* in = image + i * hw;
    for (std::size_t ky = 0; ky < d.kernel; ++ky) {
      for (std::size_t kx = 0; kx < d.kernel; ++kx) {
        T* row = col + ((i * d.kernel + ky) * d.kernel + kx) * hw;
        const std::ptrdiff_t oy = static_cast<std::ptrdiff_t>(ky) - pad;
        const std::ptrdiff_t ox = static_cast<std::ptrdiff_t>(kx) - pad;
        for (std::ptrdiff_t y = 0; y < h; ++y) {
          T* dst = row + y * w;
          const std::ptrdiff_t sy = y + oy;
          if (sy < 0 || sy >= h) {
            std::fill(dst, dst + w, T(0));
            continue;
          }
          const T* src = in + sy * w;
          for (std::ptrdiff_t x = 0; x < w; ++x) {
            const std::ptrdiff_t sx = x + ox;
            dst[x] = (sx >= 0 && sx < w) ? src[sx] : T(0);
          }
        }
      }
    }
  }
}

/// Adds [C*K*K, H*W] patch columns back onto one [C, H, W] image.
template <class T>
void col2im_add(const ConvDims& d, const T* col, T* image) {
  const auto pad = static_cast<std::ptrdiff_t>(d.kernel / 2);
  const auto h = static_cast<std::ptrdiff_t>(d.height);
  const auto w = static_cast<std::ptrdiff_t>(d.width);
  const std::size_t hw = d.height * d.width;
  for (std::size_t i = 0; i < d.in_channels; ++i) {
    T* out = image + i * hw;
    for (std::size_t ky = 0; ky < d.kernel; ++ky) {
      for (std::size_t kx = 0; kx < d.kernel; ++kx) {
        const T* row = col + ((i * d.kernel + ky) * d.kernel + kx) * hw;
        const std::ptrdiff_t oy = static_cast<std::ptrdiff_t>(ky) - pad;
        const std::ptrdiff_t ox = static_cast<std::ptrdiff_t>(kx) - pad;
        for (std::ptrdiff_t y = 0; y < h; ++y) {
          const std::ptrdiff_t sy = y + oy;
          if (sy < 0 || sy >= h) continue;
          const T* src = row + y * w;
          T* dst = out + sy * w;
          for (std::ptrdiff_t x = 0; x < w; ++x) {
            const std::ptrdiff_t sx = x + ox;
            if (sx >= 0 && sx < w) dst[sx] += src[x];
          }
        }
      }
    }
  }
}

std::ptrdiff_t signed_size(std::size_t n) { return static_cast<std::ptrdiff_t>(n); }

}  // namespace

template <class T>
void conv2d_forward(const ConvDims& d, const T* input, const T* weight, const T* bias, T* output) {
  const std::size_t hw = d.height * d.width;
  const std::size_t k = d.in_channels * d.kernel * d.kernel;
  const Eigen::Map<const RowMat<T>> wmat(weight, signed_size(d.out_channels), signed_size(k));
#pragma omp parallel
  {
    std::vector<T> col(k * hw);
#pragma omp for schedule(static)
    for (std::ptrdiff_t n = 0; n < signed_size(d.batch); ++n) {
      im2col(d, input + static_cast<std::size_t>(n) * d.in_channels * hw, col.data());
      const Eigen::Map<const RowMat<T>> cmat(col.data(), signed_size(k), signed_size(hw));
      Eigen::Map<RowMat<T>> out(output + static_cast<std::size_t>(n) * d.out_channels * hw,
                                signed_size(d.out_channels), signed_size(hw));
      out.noalias() = wmat * cmat;
      if (bias) {
        for (std::size_t o = 0; o < d.out_channels; ++o) out.row(signed_size(o)).array() += bias[o];
      }
    }
  }
}

template <class T>
void conv2d_backward_input(const ConvDims& d, const T* grad_out, const T* weight, T* grad_in) {
  const std::size_t hw = d.height * d.width;
  const std::size_t k = d.in_channels * d.kernel * d.kernel;
  const Eigen::Map<const RowMat<T>> wmat(weight, signed_size(d.out_channels), signed_size(k));
#pragma omp parallel
  {
    RowMat<T> col(signed_size(k), signed_size(hw));
#pragma omp for schedule(static)
    for (std::ptrdiff_t n = 0; n < signed_size(d.batch); ++n) {
      const auto sn = static_cast<std::size_t>(n);
      const Eigen::Map<const RowMat<T>> go(grad_out + sn * d.out_channels * hw,
                                           signed_size(d.out_channels), signed_size(hw));
      col.noalias() = wmat.transpose() * go;
      T* gi = grad_in + sn * d.in_channels * hw;
      std::fill(gi, gi + d.in_channels * hw, T(0));
      col2im_add(d, col.data(), gi);
    }
  }
}

template <class T>
void conv2d_backward_params(const ConvDims& d, const T* grad_out, const T* input, T* grad_weight,
                            T* grad_bias) {
  const std::size_t hw = d.height * d.width;
  const std::size_t k = d.in_channels * d.kernel * d.kernel;
  const std::size_t chunks = (d.batch + kReductionChunk - 1) / kReductionChunk;
  const std::size_t wsize = d.out_channels * k;
  std::vector<T> partial_w(grad_weight ? chunks * wsize : 0, T(0));
  std::vector<T> partial_b(grad_bias ? chunks * d.out_channels : 0, T(0));
#pragma omp parallel
  {
    std::vector<T> col(k * hw);
#pragma omp for schedule(static)
    for (std::ptrdiff_t c = 0; c < signed_size(chunks); ++c) {
      const auto sc = static_cast<std::size_t>(c);
      const std::size_t first = sc * kReductionChunk;
      const std::size_t last = std::min(d.batch, first + kReductionChunk);
      for (std::size_t n = first; n < last; ++n) {
        const Eigen::Map<const RowMat<T>> go(grad_out + n * d.out_channels * hw,
                                             signed_size(d.out_channels), signed_size(hw));
        if (grad_weight) {
          im2col(d, input + n * d.in_channels * hw, col.data());
          const Eigen::Map<const RowMat<T>> cmat(col.data(), signed_size(k), signed_size(hw));
          Eigen::Map<RowMat<T>> pw(partial_w.data() + sc * wsize, signed_size(d.out_channels),
                                   signed_size(k));
          pw.noalias() += go * cmat.transpose();
        }
        if (grad_bias) {
          for (std::size_t o = 0; o < d.out_channels; ++o) {
            partial_b[sc * d.out_channels + o] += go.row(signed_size(o)).sum();
          }
        }
      }
    }
  }
  for (std::size_t c = 0; c < chunks; ++c) {
    if (grad_weight) {
      const T* pw = partial_w.data() + c * wsize;
      for (std::size_t i = 0; i < wsize; ++i) grad_weight[i] += pw[i];
    }
    if (grad_bias) {
      const T* pb = partial_b.data() + c * d.out_channels;
      for (std::size_t o = 0; o < d.out_channels; ++o) grad_bias[o] += pb[o];
    }
  }
}

template <class T>
void avgpool2d_forward(const PoolDims& d, const T* input, T* output) {
  const std::size_t oh = d.height / d.window;
  const std::size_t ow = d.width / d.window;
  const T inv = T(1) / static_cast<T>(d.window * d.window);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t c = 0; c < signed_size(d.batch * d.channels); ++c) {
    const T* in = input + static_cast<std::size_t>(c) * d.height * d.width;
    T* out = output + static_cast<std::size_t>(c) * oh * ow;
    for (std::size_t y = 0; y < oh; ++y) {
      for (std::size_t x = 0; x < ow; ++x) {
        T acc = T(0);
        for (std::size_t dy = 0; dy < d.window; ++dy) {
          const T* src = in + (y * d.window + dy) * d.width + x * d.window;
          for (std::size_t dx = 0; dx < d.window; ++dx) acc += src[dx];
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
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t c = 0; c < signed_size(d.batch * d.channels); ++c) {
    T* gi = grad_in + static_cast<std::size_t>(c) * d.height * d.width;
    const T* go = grad_out + static_cast<std::size_t>(c) * oh * ow;
    for (std::size_t y = 0; y < d.height; ++y) {
      const T* src = go + (y / d.window) * ow;
      T* dst = gi + y * d.width;
      for (std::size_t x = 0; x < d.width; ++x) dst[x] = src[x / d.window] * inv;
    }
  }
}

template <class T>
void matmul(const T* a, const T* b, T* c, std::size_t m, std::size_t k, std::size_t n,
            bool transpose_a, bool transpose_b) {
  Eigen::Map<RowMat<T>> cm(c, signed_size(m), signed_size(n));
  const Eigen::Map<const RowMat<T>> am(a, signed_size(transpose_a ? k : m),
                                       signed_size(transpose_a ? m : k));
  const Eigen::Map<const RowMat<T>> bm(b, signed_size(transpose_b ? n : k),
                                       signed_size(transpose_b ? k : n));
  if (transpose_a && transpose_b) {
    cm.noalias() = am.transpose() * bm.transpose();
  } else if (transpose_a) {
    cm.noalias() = am.transpose() * bm;
  } else if (transpose_b) {
    cm.noalias() = am * bm.transpose();
  } else {
    cm.noalias() = am * bm;
  }
}

template <class T>
void activation_forward(ActivationKind kind, AngleConvention conv, std::size_t batch,
                        std::size_t per_sample, const T* input, T* output) {
  const std::size_t s = per_sample;
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t e = 0; e < signed_size(batch * s); ++e) {
    const std::size_t n = static_cast<std::size_t>(e) / s;
    const std::size_t m = static_cast<std::size_t>(e) % s;
    const T* in = input + n * 4 * s + m;
    T* out = output + n * 4 * s + m;
    const Quaternion<T> a = apply(kind, conv, Quaternion<T>{in[0], in[s], in[2 * s], in[3 * s]},
                                  DegeneracyMode::Lenient);
    out[0] = a.w;
    out[s] = a.x;
    out[2 * s] = a.y;
    out[3 * s] = a.z;
  }
}

template <class T>
void activation_backward(ActivationKind kind, AngleConvention conv, std::size_t batch,
                         std::size_t per_sample, const T* input, const T* grad_out, T* grad_in) {
  const std::size_t s = per_sample;
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t e = 0; e < signed_size(batch * s); ++e) {
    const std::size_t off = (static_cast<std::size_t>(e) / s) * 4 * s + static_cast<std::size_t>(e) % s;
    const T* in = input + off;
    const T* go = grad_out + off;
    T* gi = grad_in + off;
    const Quaternion<T> r = apply_vjp(kind, conv, Quaternion<T>{in[0], in[s], in[2 * s], in[3 * s]},
                                      Quaternion<T>{go[0], go[s], go[2 * s], go[3 * s]});
    gi[0] = r.w;
    gi[s] = r.x;
    gi[2 * s] = r.y;
    gi[3 * s] = r.z;
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

}  // namespace qnn::kernels::parallel
