/* Copyright 2026 The regsched Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/


#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "regsched/core_math.hpp"
#include "support.hpp"

namespace regsched {
namespace {

using testing::naive_matmul;
using testing::naive_transpose;
using testing::random_matrix;
using testing::random_vector;

TEST(Hadamard, IdentityMaskKeepsDiagonal) {
  const Matrix a = Matrix::from_rows({{1, 2}, {3, 4}});
  const Matrix m = Matrix::from_rows({{1, 0}, {0, 1}});
  EXPECT_EQ(hadamard(a, m), Matrix::from_rows({{1, 0}, {0, 4}}));
}

TEST(Hadamard, AllOnesIsIdentity) {
  std::mt19937_64 rng(1);
  const Matrix a = random_matrix(4, 3, rng);
  EXPECT_EQ(hadamard(a, Matrix(4, 3, 1.0)), a);
}

TEST(Hadamard, MatchesElementLoop) {
  std::mt19937_64 rng(2);
  const Matrix a = random_matrix(5, 7, rng);
  const Matrix b = random_matrix(5, 7, rng);
  const Matrix h = hadamard(a, b);
  for (std::size_t i = 0; i < 5; ++i)
    for (std::size_t j = 0; j < 7; ++j) EXPECT_EQ(h(i, j), a(i, j) * b(i, j));
}

TEST(Hadamard, ShapeMismatchThrows) {
  EXPECT_THROW(hadamard(Matrix(2, 3), Matrix(3, 2)), DimensionError);
}

TEST(Hadamard, CommutesAndDistributes) {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 50; ++trial) {
    const Matrix a = random_matrix(4, 5, rng), b = random_matrix(4, 5, rng), c = random_matrix(4, 5, rng);
    EXPECT_EQ(hadamard(a, b), hadamard(b, a));
    EXPECT_LE(testing::max_abs_diff(hadamard(a, b + c), hadamard(a, b) + hadamard(a, c)), 1e-12);
  }
}

TEST(Norms, L1Examples) {
  EXPECT_EQ(norm_l1(Vector{1, -2, 3}), 6.0);
  EXPECT_EQ(norm_l1(Vector(5)), 0.0);
}

TEST(Norms, L1MatchesNaiveSum) {
  std::mt19937_64 rng(4);
  const Vector v = random_vector(100, rng, -5, 5);
  double s = 0.0;
  for (double x : v) s += std::abs(x);
  EXPECT_NEAR(norm_l1(v), s, 1e-12 * s);
}

TEST(Norms, L2SquaredExamples) {
  EXPECT_EQ(norm_l2_sq(Vector{3, 4}), 25.0);
  EXPECT_EQ(norm_l2_sq(Vector(3)), 0.0);
}

TEST(Norms, L2SquaredMatchesNaiveSum) {
  std::mt19937_64 rng(5);
  const Vector v = random_vector(100, rng, -5, 5);
  double s = 0.0;
  for (double x : v) s += x * x;
  EXPECT_NEAR(norm_l2_sq(v), s, 1e-12 * s);
}

TEST(Norms, FrobeniusExamples) {
  EXPECT_DOUBLE_EQ(frobenius(Matrix::identity(3)), std::sqrt(3.0));
  EXPECT_EQ(frobenius(Matrix(2, 4)), 0.0);
}

TEST(Norms, FrobeniusMatchesDoubleLoop) {
  std::mt19937_64 rng(6);
  const Matrix a = random_matrix(4, 6, rng);
  double s = 0.0;
  for (std::size_t i = 0; i < 4; ++i)
    for (std::size_t j = 0; j < 6; ++j) s += a(i, j) * a(i, j);
  EXPECT_NEAR(frobenius(a), std::sqrt(s), 1e-12 * std::sqrt(s));
}

TEST(Norms, L2SquaredIsSquaredFrobeniusOfColumn) {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 20; ++trial) {
    const Vector v = random_vector(1 + trial, rng);
    const double f = frobenius(Matrix::column(v));
    EXPECT_NEAR(norm_l2_sq(v), f * f, 1e-12 * norm_l2_sq(v));
  }
}

TEST(Products, AllVariantsMatchTripleLoop) {
  std::mt19937_64 rng(8);
  const Matrix a = random_matrix(6, 4, rng), b = random_matrix(4, 5, rng);
  EXPECT_LE(testing::max_abs_diff(matmul(a, b), naive_matmul(a, b)), 1e-12);
  const Matrix c = random_matrix(6, 5, rng);
  EXPECT_LE(testing::max_abs_diff(matmul_tn(a, c), naive_matmul(naive_transpose(a), c)), 1e-12);
  const Matrix d = random_matrix(3, 4, rng);
  EXPECT_LE(testing::max_abs_diff(matmul_nt(a, d), naive_matmul(a, naive_transpose(d))), 1e-12);
  EXPECT_EQ(transpose(a), naive_transpose(a));
  EXPECT_THROW(matmul(a, a), DimensionError);
}

TEST(Operators, SmoothingSevenRows) {
  const Matrix a = build_smoothing_A(7);
  const double t = 1.0 / 3.0;
  const double first[7] = {t * 2 / 3, t * 2 / 3, 0, 0, 0, 0, 0};
  const double third[7] = {0, t, t, t, 0, 0, 0};
  for (std::size_t j = 0; j < 7; ++j) {
    EXPECT_DOUBLE_EQ(a(0, j), first[j]);
    EXPECT_DOUBLE_EQ(a(2, j), third[j]);
    EXPECT_DOUBLE_EQ(a(6, j), first[6 - j]);
  }
}

TEST(Operators, SmoothingThreeByHand) {
  // Boundary rows take precedence; the only interior row is the middle one.
  const double t = 1.0 / 3.0, e = (1.0 / 3.0) * (2.0 / 3.0);
  const Matrix expected = Matrix::from_rows({{e, e, 0}, {t, t, t}, {0, e, e}});
  EXPECT_LE(testing::max_abs_diff(build_smoothing_A(3), expected), 1e-15);
}

TEST(Operators, DifferenceSevenFirstRow) {
  const Matrix b = build_difference_B(7);
  const double first[7] = {-2, 2, 0, 0, 0, 0, 0};
  for (std::size_t j = 0; j < 7; ++j) EXPECT_EQ(b(0, j), first[j]);
}

TEST(Operators, DifferenceFourByHand) {
  const Matrix expected = Matrix::from_rows({{-2, 2, 0, 0}, {-1, 0, 1, 0}, {0, -1, 0, 1}, {0, 0, -2, 2}});
  EXPECT_EQ(build_difference_B(4), expected);
}

TEST(Operators, RowSumProperties) {
  for (std::size_t n = 3; n <= 40; ++n) {
    const Matrix a = build_smoothing_A(n), b = build_difference_B(n);
    ASSERT_EQ(a.rows(), n);
    ASSERT_EQ(a.cols(), n);
    for (std::size_t i = 0; i < n; ++i) {
      double sa = 0.0, sb = 0.0;
      for (std::size_t j = 0; j < n; ++j) {
        sa += a(i, j);
        sb += b(i, j);
      }
      EXPECT_EQ(sb, 0.0) << "n=" << n << " row " << i;
      if (i > 0 && i + 1 < n) EXPECT_NEAR(sa, 1.0, 1e-15);
    }
    const Matrix ones(n, 1, 1.0);
    EXPECT_EQ(frobenius(matmul(b, ones)), 0.0);
  }
}

TEST(Operators, TooSmallThrows) {
  EXPECT_THROW(build_smoothing_A(2), DimensionError);
  EXPECT_THROW(build_difference_B(2), DimensionError);
}

TEST(MatrixType, ConstructionChecksLength) {
  EXPECT_THROW(Matrix(2, 2, std::vector<double>{1, 2, 3}), DimensionError);
  EXPECT_THROW(Matrix::from_rows({{1, 2}, {3}}), DimensionError);
  EXPECT_TRUE(all_finite(Matrix(3, 3, 1.0).span()));
}

}  // namespace
}  // namespace regsched
