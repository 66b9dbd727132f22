#pragma once

// Compute kernels behind the autodiff engine. Each kernel exists twice with
// the same signature:
//   serial::   straightforward loops, the reference used by the tests;
//   parallel:: OpenMP over samples / elements with GEMM-backed convolution.
// Parallel reductions over the batch use fixed-size sample chunks summed in
// chunk order, so results do not depend on the thread count.
//
// Layouts: images are [N, C, H, W]; convolution weights [Cout, Cin, K, K]
// with zero padding (K - 1) / 2 and stride 1; matrices are row-major.
// Activations see a batch as [N, 4, M]: per sample four component planes of
// M quaternions each.

#include <cstddef>

#include "qnn/activations.hpp"

namespace qnn {

enum class Backend { Serial, Parallel };

namespace kernels {

struct ConvDims {
  std::size_t batch, in_channels, out_channels, height, width, kernel;
};

struct PoolDims {
  std::size_t batch, channels, height, width, window;
};

#define QNN_KERNEL_DECLS                                                                       \
  template <class T>                                                                           \
  void conv2d_forward(const ConvDims& d, const T* input, const T* weight, const T* bias,       \
                      T* output);                                                              \
  template <class T>                                                                           \
  void conv2d_backward_input(const ConvDims& d, const T* grad_out, const T* weight,            \
                             T* grad_in);                                                      \
  /* Accumulates into grad_weight / grad_bias (either may be null). */                         \
  template <class T>                                                                           \
  void conv2d_backward_params(const ConvDims& d, const T* grad_out, const T* input,            \
                              T* grad_weight, T* grad_bias);                                   \
  template <class T>                                                                           \
  void avgpool2d_forward(const PoolDims& d, const T* input, T* output);                        \
  template <class T>                                                                           \
  void avgpool2d_backward(const PoolDims& d, const T* grad_out, T* grad_in);                   \
  /* C[m, n] = A[m, k] B[k, n] with optional transposes of A and B. */                        \
  template <class T>                                                                           \
  void matmul(const T* a, const T* b, T* c, std::size_t m, std::size_t k, std::size_t n,       \
              bool transpose_a, bool transpose_b);                                             \
  template <class T>                                                                           \
  void activation_forward(ActivationKind kind, AngleConvention conv, std::size_t batch,        \
                          std::size_t per_sample, const T* input, T* output);                  \
  template <class T>                                                                           \
  void activation_backward(ActivationKind kind, AngleConvention conv, std::size_t batch,       \
                           std::size_t per_sample, const T* input, const T* grad_out,          \
                           T* grad_in);

namespace serial {
QNN_KERNEL_DECLS
}  // namespace serial

namespace parallel {
QNN_KERNEL_DECLS
}  // namespace parallel

#undef QNN_KERNEL_DECLS

/// Samples per partial sum in the parallel batch reductions.
inline constexpr std::size_t kReductionChunk = 8;

}  // namespace kernels
}  // namespace qnn
