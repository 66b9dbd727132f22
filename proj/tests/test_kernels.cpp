#include <gtest/gtest.h>

#include <random>
#include <vector>

#include "qnn/kernels.hpp"

using namespace qnn;
using namespace qnn::kernels;

namespace {

template <class T>
std::vector<T> random_vec(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> d(-1, 1);
  std::vector<T> v(n);
  for (auto& x : v) x = static_cast<T>(d(rng));
  return v;
}

template <class T>
double max_diff(const std::vector<T>& a, const std::vector<T>& b) {
  double m = 0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(double(a[i]) - double(b[i])));
  return m;
}

}  // namespace

class ConvKernels : public ::testing::TestWithParam<ConvDims> {};

TEST_P(ConvKernels, ParallelMatchesSerial) {
  const ConvDims d = GetParam();
  const std::size_t hw = d.height * d.width;
  const auto x = random_vec<double>(d.batch * d.in_channels * hw, 1);
  const auto w = random_vec<double>(d.out_channels * d.in_channels * d.kernel * d.kernel, 2);
  const auto b = random_vec<double>(d.out_channels, 3);
  const auto go = random_vec<double>(d.batch * d.out_channels * hw, 4);

  std::vector<double> ys(d.batch * d.out_channels * hw), yp(ys.size());
  serial::conv2d_forward(d, x.data(), w.data(), b.data(), ys.data());
  parallel::conv2d_forward(d, x.data(), w.data(), b.data(), yp.data());
  EXPECT_LE(max_diff(ys, yp), 1e-12);

  std::vector<double> gis(x.size()), gip(x.size());
  serial::conv2d_backward_input(d, go.data(), w.data(), gis.data());
  parallel::conv2d_backward_input(d, go.data(), w.data(), gip.data());
  EXPECT_LE(max_diff(gis, gip), 1e-12);

  std::vector<double> gws(w.size(), 0.5), gwp(w.size(), 0.5), gbs(b.size(), 0.25), gbp(b.size(), 0.25);
  serial::conv2d_backward_params(d, go.data(), x.data(), gws.data(), gbs.data());
  parallel::conv2d_backward_params(d, go.data(), x.data(), gwp.data(), gbp.data());
  EXPECT_LE(max_diff(gws, gwp), 1e-11);
  EXPECT_LE(max_diff(gbs, gbp), 1e-11);

  std::vector<double> only_b(b.size(), 0);
  parallel::conv2d_backward_params<double>(d, go.data(), x.data(), nullptr, only_b.data());
  for (std::size_t o = 0; o < b.size(); ++o) EXPECT_NEAR(only_b[o] + 0.25, gbs[o], 1e-11);
}

INSTANTIATE_TEST_SUITE_P(Shapes, ConvKernels,
                         ::testing::Values(ConvDims{1, 1, 1, 1, 1, 1}, ConvDims{2, 3, 4, 5, 5, 3},
                                           ConvDims{9, 4, 8, 8, 8, 3}, ConvDims{17, 8, 4, 4, 6, 5},
                                           ConvDims{3, 2, 2, 2, 2, 3}));

TEST(Kernels, ConvOneByOneIsScaledIdentity) {
  const ConvDims d{2, 1, 1, 3, 3, 1};
  const auto x = random_vec<double>(18, 5);
  const double w = 2.5;
  std::vector<double> y(18);
  parallel::conv2d_forward<double>(d, x.data(), &w, nullptr, y.data());
  for (std::size_t i = 0; i < y.size(); ++i) EXPECT_DOUBLE_EQ(y[i], 2.5 * x[i]);
}

TEST(Kernels, PoolAndMatmulMatchSerial) {
  const PoolDims p{3, 5, 8, 6, 2};
  const auto x = random_vec<float>(3 * 5 * 8 * 6, 6);
  std::vector<float> ys(3 * 5 * 4 * 3), yp(ys.size());
  serial::avgpool2d_forward(p, x.data(), ys.data());
  parallel::avgpool2d_forward(p, x.data(), yp.data());
  EXPECT_EQ(ys, yp);
  std::vector<float> gs(x.size()), gp(x.size());
  serial::avgpool2d_backward(p, ys.data(), gs.data());
  parallel::avgpool2d_backward(p, ys.data(), gp.data());
  EXPECT_EQ(gs, gp);

  for (bool ta : {false, true}) {
    for (bool tb : {false, true}) {
      const auto a = random_vec<double>(7 * 5, 7);
      const auto b = random_vec<double>(5 * 4, 8);
      std::vector<double> cs(7 * 4), cp(7 * 4);
      serial::matmul(a.data(), b.data(), cs.data(), 7, 5, 4, ta, tb);
      parallel::matmul(a.data(), b.data(), cp.data(), 7, 5, 4, ta, tb);
      EXPECT_LE(max_diff(cs, cp), 1e-13);
    }
  }
}

TEST(Kernels, ActivationsMatchSerial) {
  const std::size_t batch = 5, per = 37;
  const auto x = random_vec<double>(batch * 4 * per, 9);
  const auto g = random_vec<double>(x.size(), 10);
  for (auto kind : kAllActivations) {
    for (auto conv : {AngleConvention::Psi, AngleConvention::Theta}) {
      std::vector<double> ys(x.size()), yp(x.size()), gs(x.size()), gp(x.size());
      serial::activation_forward(kind, conv, batch, per, x.data(), ys.data());
      parallel::activation_forward(kind, conv, batch, per, x.data(), yp.data());
      EXPECT_EQ(ys, yp);
      serial::activation_backward(kind, conv, batch, per, x.data(), g.data(), gs.data());
      parallel::activation_backward(kind, conv, batch, per, x.data(), g.data(), gp.data());
      EXPECT_EQ(gs, gp);
    }
  }
}

TEST(Kernels, PlanarLayoutPerSample) {
  // Sample n, quaternion m: components at n*4*M + c*M + m.
  const std::size_t per = 3;
  std::vector<double> x(2 * 4 * per, 0.0);
  x[1 * 4 * per + 0 * per + 2] = 3;
  x[1 * 4 * per + 2 * per + 2] = 4;
  std::vector<double> y(x.size());
  serial::activation_forward(ActivationKind::Norm, AngleConvention::Psi, 2, per, x.data(), y.data());
  EXPECT_NEAR(y[1 * 4 * per + 0 * per + 2], 0.6, 1e-12);
  EXPECT_NEAR(y[1 * 4 * per + 2 * per + 2], 0.8, 1e-12);
}

TEST(Kernels, ParamReductionIsDeterministic) {
  const ConvDims d{37, 4, 4, 8, 8, 3};
  const auto x = random_vec<float>(d.batch * d.in_channels * 64, 11);
  const auto go = random_vec<float>(d.batch * d.out_channels * 64, 12);
  std::vector<float> a(4 * 4 * 9, 0), b(a.size(), 0);
  parallel::conv2d_backward_params<float>(d, go.data(), x.data(), a.data(), nullptr);
  parallel::conv2d_backward_params<float>(d, go.data(), x.data(), b.data(), nullptr);
  EXPECT_EQ(a, b);
}
