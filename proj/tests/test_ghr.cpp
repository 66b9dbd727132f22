#include <gtest/gtest.h>

#include <random>

#include "qnn/ghr.hpp"
#include "support/oracles.hpp"

using namespace qnn;

namespace {

std::function<Quatd(const Quatd&)> forward(ActivationKind kind) {
  return [kind](const Quatd& z) { return apply(kind, AngleConvention::Psi, z); };
}

}  // namespace

TEST(Ghr, IdentityAndConjugate) {
  const Quatd q{0.3, -0.7, 1.1, 0.2};
  const Quatd id = numeric_ghr([](const Quatd& z) { return z; }, q).value;
  EXPECT_NEAR(norm(id - Quatd{1, 0, 0, 0}), 0.0, 1e-9);
  const Quatd cj = numeric_ghr([](const Quatd& z) { return conj(z); }, q).value;
  EXPECT_NEAR(norm(cj - Quatd{-0.5, 0, 0, 0}), 0.0, 1e-9);
}

TEST(Ghr, Examples) {
  EXPECT_NEAR(norm(analytic_ghr(ActivationKind::Norm, Quatd{1, 1, 1, 1}).value - Quatd{0.375, 0, 0, 0}), 0, 1e-15);
  EXPECT_NEAR(norm(numeric_ghr(forward(ActivationKind::Norm), Quatd{1, 1, 1, 1}).value - Quatd{0.375, 0, 0, 0}), 0, 1e-9);

  // Frozen from the finite-difference oracle at h = 1e-6.
  const Quatd cd = analytic_ghr(ActivationKind::Cardioid, Quatd{2, 0.5, 0, 0}).value;
  EXPECT_NEAR(cd.w, 0.98507125, 1e-8);
  EXPECT_NEAR(cd.x, 0.03031695, 1e-8);
  EXPECT_NEAR(cd.y, 0.0, 1e-15);
  EXPECT_NEAR(cd.z, 0.0, 1e-15);
  const Quatd cdn = numeric_ghr(forward(ActivationKind::Cardioid), Quatd{2, 0.5, 0, 0}).value;
  EXPECT_NEAR(norm(cd - cdn), 0, 1e-9);

  const Quatd mt = analytic_ghr(ActivationKind::MagnitudeTanh, Quatd{1, 0.01, 0, 0}).value;
  EXPECT_NEAR(mt.w, 0.676, 5e-4);
  EXPECT_NEAR(mt.w, 0.6761684, 1e-7);
  EXPECT_NEAR(std::abs(mt.x) + std::abs(mt.y) + std::abs(mt.z), 0, 1e-12);
}

TEST(Ghr, TableMatchesFiniteDifferences) {
  for (auto kind : kQuaternionActivations) {
    std::mt19937_64 rng(1000 + static_cast<int>(kind));
    std::uniform_real_distribution<double> re(-1.5, 1.5), im(0.1, 1.5), dir(-1, 1);
    double worst = 0;
    for (int i = 0; i < 1000; ++i) {
      std::array<double, 3> d{dir(rng), dir(rng), dir(rng)};
      const double dn = std::sqrt(d[0] * d[0] + d[1] * d[1] + d[2] * d[2]);
      if (dn < 1e-3) {
        --i;
        continue;
      }
      const double s = im(rng) / dn;
      const Quatd q{re(rng), s * d[0], s * d[1], s * d[2]};
      const Quatd a = analytic_ghr(kind, q).value;
      const Quatd n = numeric_ghr(forward(kind), q, 1e-6).value;
      worst = std::max(worst, norm(a - n) / std::max(1.0, norm(a)));
    }
    EXPECT_LE(worst, 1e-5) << to_string(kind);
  }
}

TEST(Ghr, Errors) {
  EXPECT_THROW(analytic_ghr(ActivationKind::SplitReLU, Quatd{1, 1, 0, 0}), UnsupportedKind);
  EXPECT_THROW(analytic_ghr(ActivationKind::PhaseSin, Quatd{1, 1, 0, 0}, AngleConvention::Theta), UnsupportedKind);
  EXPECT_THROW(analytic_ghr(ActivationKind::PhaseSin, Quatd{1, 0, 0, 0}), DegenerateInput);
  EXPECT_THROW(analytic_ghr(ActivationKind::Norm, Quatd{}), DegenerateInput);
}

TEST(Ghr, DerivativeGrid) {
  MeshSpec spec = MeshSpec::derivative_defaults();
  const auto norm_grid = derivative_grid(ActivationKind::Norm, spec);
  ASSERT_EQ(norm_grid.size(), spec.size());
  // (re, im) = (0, 0) sits in the middle of the first row.
  EXPECT_FALSE(norm_grid[50].has_value());
  for (std::size_t i = 0; i < spec.size(); ++i) {
    const Quatd z = spec.point(i);
    if (imag_norm(z) <= 1e-12) {
      EXPECT_FALSE(norm_grid[i].has_value());
    } else {
      ASSERT_TRUE(norm_grid[i].has_value());
      EXPECT_NEAR(*norm_grid[i], 0.75 / norm(z), 1e-12);
    }
  }
  // Point (re, im) = (0, 2) has |z| = 2: 3 / (4 |z|).
  const auto small = derivative_grid(ActivationKind::Norm, MeshSpec{0.0, 2.0, 0.0, 2.0, 2, {1, 1, 1}});
  EXPECT_FALSE(small[0].has_value());
  ASSERT_TRUE(small[2].has_value());
  EXPECT_NEAR(*small[2], 0.375, 1e-12);
}

TEST(Ghr, PhaseClassSensitiveEverywhere) {
  MeshSpec spec = MeshSpec::derivative_defaults();
  spec.im_min = 0.2;
  for (auto kind : kQuaternionActivations) {
    if (activation_class(kind) != ActivationClass::Phase) continue;
    const auto grid = derivative_grid(kind, spec);
    double lo = 1e300, hi = 0;
    for (const auto& v : grid) {
      ASSERT_TRUE(v.has_value());
      ASSERT_TRUE(std::isfinite(*v));
      lo = std::min(lo, *v);
      hi = std::max(hi, *v);
    }
    EXPECT_GT(lo, 0.05) << to_string(kind);
    EXPECT_LT(hi, 1e3) << to_string(kind);
  }
}

TEST(Ghr, MagnitudeTanhSaturates) {
  const Quatd d{0, 1 / std::sqrt(3.0), 1 / std::sqrt(3.0), 1 / std::sqrt(3.0)};
  const Quatd big = 5.0 * (Quatd{0.6, 0, 0, 0} + 0.8 * d);
  const Quatd small = 0.5 * (Quatd{0.6, 0, 0, 0} + 0.8 * d);
  EXPECT_LT(norm(analytic_ghr(ActivationKind::MagnitudeTanh, big).value),
            norm(analytic_ghr(ActivationKind::MagnitudeTanh, small).value));
}
