#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "qnn/kernels.hpp"

using namespace qnn;
using namespace qnn::kernels;

namespace {

std::vector<float> random_vec(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<float> d(-1, 1);
  std::vector<float> v(n);
  for (auto& x : v) x = d(rng);
  return v;
}

// Real-expanded shapes of the middle QVGG-S block: 16 -> 32 quaternion channels at 16x16.
ConvDims conv_dims(const benchmark::State& state) {
  return {static_cast<std::size_t>(state.range(0)), 64, 128, 16, 16, 3};
}

template <bool Parallel>
void BM_ConvForward(benchmark::State& state) {
  const ConvDims d = conv_dims(state);
  const auto x = random_vec(d.batch * d.in_channels * 256, 1);
  const auto w = random_vec(d.out_channels * d.in_channels * 9, 2);
  const auto b = random_vec(d.out_channels, 3);
  std::vector<float> y(d.batch * d.out_channels * 256);
  for (auto _ : state) {
    if constexpr (Parallel) parallel::conv2d_forward(d, x.data(), w.data(), b.data(), y.data());
    else serial::conv2d_forward(d, x.data(), w.data(), b.data(), y.data());
    benchmark::DoNotOptimize(y.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(d.batch));
}

template <bool Parallel>
void BM_ConvBackward(benchmark::State& state) {
  const ConvDims d = conv_dims(state);
  const auto x = random_vec(d.batch * d.in_channels * 256, 1);
  const auto w = random_vec(d.out_channels * d.in_channels * 9, 2);
  const auto go = random_vec(d.batch * d.out_channels * 256, 4);
  std::vector<float> gi(x.size()), gw(w.size()), gb(d.out_channels);
  for (auto _ : state) {
    if constexpr (Parallel) {
      parallel::conv2d_backward_input(d, go.data(), w.data(), gi.data());
      parallel::conv2d_backward_params(d, go.data(), x.data(), gw.data(), gb.data());
    } else {
      serial::conv2d_backward_input(d, go.data(), w.data(), gi.data());
      serial::conv2d_backward_params(d, go.data(), x.data(), gw.data(), gb.data());
    }
    benchmark::DoNotOptimize(gw.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(d.batch));
}

template <bool Parallel>
void BM_Activation(benchmark::State& state) {
  const std::size_t batch = static_cast<std::size_t>(state.range(0)), per = 32 * 16 * 16;
  const auto x = random_vec(batch * 4 * per, 5);
  std::vector<float> y(x.size());
  for (auto _ : state) {
    if constexpr (Parallel) {
      parallel::activation_forward(ActivationKind::PhaseSin, AngleConvention::Psi, batch, per, x.data(), y.data());
    } else {
      serial::activation_forward(ActivationKind::PhaseSin, AngleConvention::Psi, batch, per, x.data(), y.data());
    }
    benchmark::DoNotOptimize(y.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(batch * per));
}

template <bool Parallel>
void BM_Matmul(benchmark::State& state) {
  const std::size_t n = static_cast<std::size_t>(state.range(0));
  const auto a = random_vec(n * 4096, 6);
  const auto b = random_vec(4096 * 10, 7);
  std::vector<float> c(n * 10);
  for (auto _ : state) {
    if constexpr (Parallel) parallel::matmul(a.data(), b.data(), c.data(), n, 4096, 10, false, false);
    else serial::matmul(a.data(), b.data(), c.data(), n, 4096, 10, false, false);
    benchmark::DoNotOptimize(c.data());
  }
}

}  // namespace

BENCHMARK(BM_ConvForward<false>)->Name("conv_forward/serial")->Arg(8)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_ConvForward<true>)->Name("conv_forward/parallel")->Arg(8)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_ConvBackward<false>)->Name("conv_backward/serial")->Arg(8)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_ConvBackward<true>)->Name("conv_backward/parallel")->Arg(8)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Activation<false>)->Name("phase_sin/serial")->Arg(32)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Activation<true>)->Name("phase_sin/parallel")->Arg(32)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Matmul<false>)->Name("head_matmul/serial")->Arg(256)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_Matmul<true>)->Name("head_matmul/parallel")->Arg(256)->Unit(benchmark::kMicrosecond);

BENCHMARK_MAIN();
