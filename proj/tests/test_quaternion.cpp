#include <gtest/gtest.h>

#include <numbers>
#include <random>

#include "qnn/quaternion.hpp"
#include "support/oracles.hpp"

using namespace qnn;

namespace {

double max_abs(const Quatd& q) {
  return std::max({std::abs(q.w), std::abs(q.x), std::abs(q.y), std::abs(q.z)});
}

}  // namespace

TEST(Quaternion, UnitMultiplicationTable) {
  for (int a = 0; a < 4; ++a) {
    for (int b = 0; b < 4; ++b) {
      const auto expected = oracle::unit_table(a, b);
      const Quatd p = hamilton(oracle::basis(a), oracle::basis(b));
      for (int c = 0; c < 4; ++c) {
        const double want = c == expected.unit ? expected.sign : 0.0;
        EXPECT_EQ(p[static_cast<std::size_t>(c)], want) << "e" << a << " * e" << b;
      }
    }
  }
  EXPECT_EQ(hamilton(Quatd{0, 1, 0, 0}, Quatd{0, 0, 1, 0}), (Quatd{0, 0, 0, 1}));
}

TEST(Quaternion, HamiltonExamples) {
  EXPECT_EQ(hamilton(Quatd{1, 2, 3, 4}, Quatd{5, 6, 7, 8}), (Quatd{-60, 12, 30, 24}));
  const Quatd q{0.3, -1.2, 2.5, 0.7};
  EXPECT_EQ(hamilton(Quatd{1, 0, 0, 0}, q), q);
  EXPECT_EQ((Quatd{1, 2, 3, 4} * Quatd{5, 6, 7, 8}), hamilton(Quatd{1, 2, 3, 4}, Quatd{5, 6, 7, 8}));
}

TEST(Quaternion, HamiltonMatchesMatrixForm) {
  std::mt19937_64 rng(11);
  std::normal_distribution<double> d;
  for (int i = 0; i < 1000; ++i) {
    const Quatd p{d(rng), d(rng), d(rng), d(rng)};
    const Quatd q{d(rng), d(rng), d(rng), d(rng)};
    EXPECT_LE(max_abs(hamilton(p, q) - oracle::product_matrix(p, q)), 1e-12);
  }
}

TEST(Quaternion, NonCommutative) {
  EXPECT_NE(hamilton(Quatd{0, 1, 0, 0}, Quatd{0, 0, 1, 0}),
            hamilton(Quatd{0, 0, 1, 0}, Quatd{0, 1, 0, 0}));
}

TEST(Quaternion, BasicOperations) {
  EXPECT_EQ(conj(Quatd{0, 1, 2, 3}), (Quatd{0, -1, -2, -3}));
  EXPECT_EQ(norm(Quatd{1, 1, 1, 1}), 2.0);
  EXPECT_EQ(imag_norm(Quatd{7, 0, 3, 4}), 5.0);
  EXPECT_EQ(add(Quatd{1, 2, 3, 4}, Quatd{4, 3, 2, 1}), (Quatd{5, 5, 5, 5}));
  EXPECT_TRUE(is_finite(Quatd{1, 2, 3, 4}));
  EXPECT_FALSE(is_finite(Quatd{1, std::nan(""), 3, 4}));
}

TEST(Quaternion, NormAndConjugateProperties) {
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> d(-10, 10);
  double worst_norm = 0, worst_conj = 0;
  for (int i = 0; i < 10000; ++i) {
    const Quatd p{d(rng), d(rng), d(rng), d(rng)};
    const Quatd q{d(rng), d(rng), d(rng), d(rng)};
    const Quatd pq = hamilton(p, q);
    const double np = norm(p) * norm(q);
    worst_norm = std::max(worst_norm, std::abs(norm(pq) - np) / np);
    const Quatd lhs = conj(pq);
    const Quatd rhs = hamilton(conj(q), conj(p));
    worst_conj = std::max(worst_conj, max_abs(lhs - rhs) / norm(pq));
  }
  EXPECT_LE(worst_norm, 1e-12);
  EXPECT_LE(worst_conj, 1e-12);
}

TEST(Quaternion, PhaseExamples) {
  const double pi = std::numbers::pi;
  EXPECT_NEAR(phase_psi(Quatd{1, 1, 1, 1}), pi / 3, 1e-15);
  EXPECT_DOUBLE_EQ(phase_psi(Quatd{0, 0, 1, 0}), pi / 2);
  EXPECT_DOUBLE_EQ(phase_psi(Quatd{-1, 0, 0, 0}), pi);
  EXPECT_DOUBLE_EQ(angle_theta(Quatd{0, 1, 0, 0}), pi);
  EXPECT_DOUBLE_EQ(angle_theta(Quatd{1, 0, 0, 0}), 0.0);
  EXPECT_NEAR(angle_theta(Quatd{1, 1, 1, 1}), 2 * pi / 3, 1e-15);
}

TEST(Quaternion, PhaseDegenerate) {
  EXPECT_THROW(phase_psi(Quatd{}), DegenerateInput);
  EXPECT_THROW(angle_theta(Quatd{1e-13, 0, 0, 0}), DegenerateInput);
  EXPECT_EQ(phase_psi(Quatd{}, DegeneracyMode::Lenient), 0.0);
  EXPECT_THROW(phase_psi(Quatf{1e-7f, 0, 0, 0}), DegenerateInput);
}

TEST(Quaternion, PhaseMatchesArccos) {
  std::mt19937_64 rng(5);
  for (int i = 0; i < 10000; ++i) {
    const Quatd q = oracle::random_quaternion(rng, 0.1, 10, 0);
    EXPECT_NEAR(phase_psi(q), std::acos(q.w / norm(q)), 1e-12);
    const double psi = phase_psi(q);
    ASSERT_GE(psi, 0.0);
    ASSERT_LE(psi, std::numbers::pi);
  }
}

TEST(Quaternion, PolarExamples) {
  const auto p1 = to_polar(Quatd{0, 3, 0, 0});
  EXPECT_DOUBLE_EQ(p1.magnitude, 3);
  ASSERT_TRUE(p1.axis);
  EXPECT_EQ(*p1.axis, (std::array<double, 3>{1, 0, 0}));
  EXPECT_DOUBLE_EQ(p1.phase, std::numbers::pi / 2);

  const auto p2 = to_polar(Quatd{2, 0, 0, 0});
  EXPECT_DOUBLE_EQ(p2.magnitude, 2);
  EXPECT_FALSE(p2.axis);
  EXPECT_DOUBLE_EQ(p2.phase, 0);

  const auto p3 = to_polar(Quatd{1, 1, 1, 1});
  EXPECT_DOUBLE_EQ(p3.magnitude, 2);
  ASSERT_TRUE(p3.axis);
  for (double a : *p3.axis) EXPECT_NEAR(a, 1 / std::sqrt(3.0), 1e-15);
  EXPECT_NEAR(p3.phase, std::numbers::pi / 3, 1e-15);

  EXPECT_THROW(to_polar(Quatd{}), DegenerateInput);
  EXPECT_FALSE(to_polar(Quatd{}, DegeneracyMode::Lenient).axis);
}

TEST(Quaternion, PolarRoundTrip) {
  std::mt19937_64 rng(8);
  for (int i = 0; i < 10000; ++i) {
    const Quatd q = oracle::random_quaternion(rng, 1e-3, 1e3, 1e-9);
    const auto p = to_polar(q);
    ASSERT_TRUE(p.axis);
    const auto& n = *p.axis;
    EXPECT_NEAR(std::sqrt(n[0] * n[0] + n[1] * n[1] + n[2] * n[2]), 1.0, 1e-12);
    EXPECT_LE(max_abs(from_polar(p) - q) / norm(q), 1e-12);
  }
}
