#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "tracklab/spaces.hpp"

using namespace tracklab;

namespace {

Vector random_vector(std::mt19937_64& rng, Index n, double scale = 3.0) {
  std::uniform_real_distribution<double> dist(-scale, scale);
  Vector v(n);
  for (Index i = 0; i < n; ++i) v[i] = dist(rng);
  return v;
}

WeightedNorm random_spd_norm(std::mt19937_64& rng, Index n) {
  const Matrix G = Matrix::NullaryExpr(n, n, [&] { return std::uniform_real_distribution<double>(-1, 1)(rng); });
  Matrix W = G * G.transpose() + Matrix::Identity(n, n);
  W = 0.5 * (W + W.transpose());
  return WeightedNorm(W, 0.7);
}

}  // namespace

TEST(WeightedNorm, UnitVectorIdentityWeight) {
  EXPECT_DOUBLE_EQ(weighted_norm(Vector{{1.0, 0.0}}, WeightedNorm::euclidean(2)), 1.0);
}

TEST(WeightedNorm, ZeroVector) {
  for (Index n : {1, 3, 7}) EXPECT_EQ(weighted_norm(Vector::Zero(n), WeightedNorm::euclidean(n)), 0.0);
}

TEST(WeightedNorm, DiagonalWeightHalfScale) {
  // (1/2 * (2 + 8))^{1/2} = sqrt(5)
  const WeightedNorm n(Vector{{2.0, 8.0}}.asDiagonal().toDenseMatrix(), 0.5);
  EXPECT_NEAR(n(Vector{{1.0, 1.0}}), std::sqrt(5.0), 1e-14);
}

TEST(WeightedNorm, RejectsBadInput) {
  EXPECT_THROW(WeightedNorm::euclidean(2)(Vector::Zero(3)), ValidationError);
  EXPECT_THROW(WeightedNorm(Matrix{{1.0, 2.0}, {2.0, 1.0}}), ValidationError);   // indefinite
  EXPECT_THROW(WeightedNorm(Matrix{{1.0, 0.1}, {0.0, 1.0}}), ValidationError);   // not symmetric
  EXPECT_THROW(WeightedNorm(Matrix::Identity(2, 2), 0.0), ValidationError);
  EXPECT_THROW(WeightedNorm(Matrix::Zero(2, 2)), ValidationError);
}

TEST(WeightedNorm, ScaledMultipliesTheNorm) {
  std::mt19937_64 rng(3);
  const WeightedNorm n = random_spd_norm(rng, 3);
  const Vector x = random_vector(rng, 3);
  EXPECT_NEAR(n.scaled(2.5)(x), 2.5 * n(x), 1e-12 * n(x));
}

TEST(WeightedNorm, HomogeneityAndTriangleInequality) {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 200; ++trial) {
    const Index dim = 1 + trial % 5;
    const WeightedNorm n = random_spd_norm(rng, dim);
    const Vector x = random_vector(rng, dim), y = random_vector(rng, dim);
    const double alpha = std::uniform_real_distribution<double>(-10, 10)(rng);
    EXPECT_NEAR(n(alpha * x), std::abs(alpha) * n(x), 1e-12 * std::abs(alpha) * n(x) + 1e-300);
    EXPECT_LE(n(x + y), n(x) + n(y) + 1e-12);
  }
}

TEST(WeightedNorm, IdentityWeightIsEuclidean) {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 50; ++trial) {
    const Vector x = random_vector(rng, 4);
    EXPECT_NEAR(WeightedNorm::euclidean(4)(x), x.norm(), 1e-12);
    // p = 2 with a 1/2 weight on the matrix and scale 2 is the same norm
    EXPECT_NEAR(WeightedNorm(0.5 * Matrix::Identity(4, 4), 2.0)(x), x.norm(), 1e-12);
  }
}

TEST(ProductNorm, Examples) {
  EXPECT_NEAR(product_norm(3.0, 4.0, 2.0), 5.0, 1e-15);
  for (double p : {1.5, 2.0, 7.0}) EXPECT_DOUBLE_EQ(product_norm(2.75, 0.0, p), 2.75);
  EXPECT_NEAR(product_norm(1.0, 1.0, 4.0), 1.189207115002721, 1e-14);
  EXPECT_EQ(product_norm(0.0, 0.0, 3.0), 0.0);
}

TEST(ProductNorm, RejectsExponentAtMostOne) {
  EXPECT_THROW(product_norm(1.0, 1.0, 1.0), ValidationError);
  EXPECT_THROW(product_norm(1.0, 1.0, 0.5), ValidationError);
  EXPECT_THROW(product_norm(-1.0, 1.0, 2.0), ValidationError);
}

TEST(ProductNorm, NormPropertiesOnPairs) {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> d(0.0, 5.0);
  for (int trial = 0; trial < 300; ++trial) {
    const double p = 1.1 + 5.0 * d(rng) / 5.0;
    const double a1 = d(rng), b1 = d(rng), a2 = d(rng), b2 = d(rng);
    EXPECT_LE(product_norm(a1 + a2, b1 + b2, p), product_norm(a1, b1, p) + product_norm(a2, b2, p) + 1e-12);
    EXPECT_LE(product_norm(a1, b1, p), product_norm(a1 + a2, b1, p));
    EXPECT_LE(product_norm(a1, b1, p), product_norm(a1, b1 + b2, p));
  }
}

TEST(ProductNorm, LargeExponentDoesNotOverflow) {
  EXPECT_NEAR(product_norm(1e200, 1e200, 50.0), 1e200 * std::pow(2.0, 1.0 / 50.0), 1e186);
}

TEST(GridNorm, ConstantOneHasClosedForm) {
  for (Index n : {1, 9, 100}) {
    for (double p : {1.5, 2.0, 3.0}) {
      const double h = 1.0 / static_cast<double>(n + 1);
      const double expected = std::pow(static_cast<double>(n) / static_cast<double>(n + 1), 1.0 / p);
      EXPECT_NEAR(grid_norm(Vector::Ones(n), GridNorm(h, p)), expected, 1e-14);
    }
  }
}

TEST(GridNorm, ZeroAndEmpty) {
  EXPECT_EQ(grid_norm(Vector::Zero(5), GridNorm(1.0 / 6.0)), 0.0);
  EXPECT_THROW(grid_norm(Vector(), GridNorm(0.5)), ValidationError);
  EXPECT_THROW(GridNorm(0.0), ValidationError);
  EXPECT_THROW(GridNorm(0.1, 1.0), ValidationError);
}

TEST(GridNorm, SineRiemannSum) {
  const Index n = 999;
  const double h = 1.0 / static_cast<double>(n + 1);
  Vector v(n);
  for (Index i = 0; i < n; ++i) v[i] = std::sin(std::numbers::pi * static_cast<double>(i + 1) * h);
  EXPECT_NEAR(grid_norm(v, GridNorm(h, 2.0)), std::sqrt(0.5), 1e-3);
}

TEST(GridNorm, ScaledMultipliesTheNorm) {
  const Vector v = Vector::LinSpaced(10, -1.0, 2.0);
  for (double q : {1.5, 2.0, 4.0}) {
    const GridNorm g(0.1, q, 0.3);
    EXPECT_NEAR(g.scaled(1.7)(v), 1.7 * g(v), 1e-13);
  }
}

TEST(Norm, VariantDispatch) {
  const Norm w = WeightedNorm::euclidean(2);
  const Norm g = GridNorm(0.25);
  const Vector x{{3.0, 4.0}};
  EXPECT_NEAR(norm(w, x), 5.0, 1e-15);
  EXPECT_NEAR(norm(g, x), std::sqrt(0.25 * 25.0), 1e-15);
  EXPECT_NEAR(norm(scaled(w, 2.0), x), 10.0, 1e-14);
  EXPECT_EQ(norm_dim(w), 2);
  EXPECT_EQ(norm_dim(g), -1);
}
