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

#include "regsched/objective.hpp"
#include "regsched/regularizers.hpp"
#include "support.hpp"

namespace regsched {
namespace {

using testing::random_matrix;

// Central differences of reg_value with respect to every entry of w.
Matrix numeric_reg_grad(Regularizer r, const Matrix& w, double h = 1e-5) {
  Matrix g(w.rows(), w.cols());
  Matrix probe = w;
  for (std::size_t i = 0; i < w.size(); ++i) {
    const double saved = probe.span()[i];
    probe.span()[i] = saved + h;
    const double up = reg_value(r, probe, 3);
    probe.span()[i] = saved - h;
    const double down = reg_value(r, probe, 3);
    probe.span()[i] = saved;
    g.span()[i] = (up - down) / (2.0 * h);
  }
  return g;
}

TEST(RegValue, OrthogonalIdentityIsZero) {
  EXPECT_EQ(reg_value(Regularizer::kOrthogonal, Matrix::identity(4), 2), 0.0);
}

TEST(RegValue, LocalDifferenceConstantColumnsIsZero) {
  Matrix w(6, 3);
  for (std::size_t i = 0; i < 6; ++i)
    for (std::size_t j = 0; j < 3; ++j) w(i, j) = 1.5 * static_cast<double>(j) - 2.0;
  EXPECT_EQ(reg_value(Regularizer::kLocalDifference, w, 2), 0.0);
}

TEST(RegValue, LassoExample) {
  EXPECT_EQ(reg_value(Regularizer::kLasso, Matrix::from_rows({{1, -2}, {0, 3}}), 1), 6.0);
}

TEST(RegValue, LayerCountIsConstant) {
  std::mt19937_64 rng(1);
  EXPECT_EQ(reg_value(Regularizer::kLayers, random_matrix(3, 3, rng), 5), 5.0);
}

TEST(RegValue, HighFrequencyMatchesComposition) {
  std::mt19937_64 rng(2);
  const Matrix w = random_matrix(5, 4, rng);
  const Matrix op = Matrix::identity(5) - build_smoothing_A(5);
  const Matrix ow = testing::naive_matmul(op, w);
  double s = 0.0;
  for (double v : ow.span()) s += v * v;
  EXPECT_NEAR(reg_value(Regularizer::kHighFrequency, w, 2), std::sqrt(s), 1e-12);
}

TEST(RegValue, ReferencePointShiftsLassoAndRidge) {
  const Matrix w = Matrix::from_rows({{1, 2}, {3, 4}});
  const Matrix w0 = Matrix::from_rows({{1, 1}, {1, 1}});
  EXPECT_EQ(reg_value(Regularizer::kLasso, w, 1, &w0), 6.0);
  EXPECT_EQ(reg_value(Regularizer::kRidge, w, 1, &w0), 14.0);
}

TEST(RegValue, OperatorsNeedThreeRows) {
  EXPECT_THROW(reg_value(Regularizer::kHighFrequency, Matrix(2, 3, 1.0), 1), DimensionError);
  EXPECT_THROW(reg_grad(Regularizer::kLocalDifference, Matrix(2, 3, 1.0), 1), DimensionError);
}

TEST(RegValue, NonNegativeForRandomInputs) {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 100; ++trial) {
    const Matrix w = random_matrix(3 + trial % 4, 1 + trial % 5, rng, -3, 3);
    for (Regularizer r : kAllRegularizers) EXPECT_GE(reg_value(r, w, 2), 0.0);
  }
}

TEST(RegGrad, RidgeIsTwiceW) {
  std::mt19937_64 rng(4);
  const Matrix w = random_matrix(3, 4, rng);
  const Matrix g = reg_grad(Regularizer::kRidge, w, 1);
  for (std::size_t i = 0; i < w.size(); ++i) EXPECT_EQ(g.span()[i], 2.0 * w.span()[i]);
}

TEST(RegGrad, LayerCountIsZero) {
  std::mt19937_64 rng(5);
  EXPECT_EQ(reg_grad(Regularizer::kLayers, random_matrix(3, 2, rng), 4), Matrix(3, 2));
}

TEST(RegGrad, LassoSignWithZeroAtKink) {
  const Matrix g = reg_grad(Regularizer::kLasso, Matrix::from_rows({{1, -2}, {0, 3}}), 1);
  EXPECT_EQ(g, Matrix::from_rows({{1, -1}, {0, 1}}));
}

TEST(RegGrad, ZeroAtVanishingNorm) {
  EXPECT_EQ(reg_grad(Regularizer::kOrthogonal, Matrix::identity(3), 1), Matrix(3, 3));
  EXPECT_EQ(reg_grad(Regularizer::kLocalDifference, Matrix(4, 2, 1.0), 1), Matrix(4, 2));
}

TEST(RegGrad, SmoothKindsMatchFiniteDifferences) {
  std::mt19937_64 rng(6);
  for (int trial = 0; trial < 20; ++trial) {
    const Matrix w = random_matrix(4, 4, rng);
    for (Regularizer r : {Regularizer::kOrthogonal, Regularizer::kRidge, Regularizer::kHighFrequency,
                          Regularizer::kLocalDifference}) {
      const Matrix a = reg_grad(r, w, 3), n = numeric_reg_grad(r, w);
      for (std::size_t i = 0; i < w.size(); ++i) {
        EXPECT_TRUE(testing::gradient_close(a.span()[i], n.span()[i], 1e-5, 1e-8))
            << name_of(r) << " coordinate " << i << ": " << a.span()[i] << " vs " << n.span()[i];
      }
    }
  }
}

TEST(RegGrad, LassoMatchesFiniteDifferencesAwayFromKinks) {
  std::mt19937_64 rng(7);
  const Matrix w = random_matrix(5, 3, rng);
  const Matrix a = reg_grad(Regularizer::kLasso, w, 1), n = numeric_reg_grad(Regularizer::kLasso, w);
  for (std::size_t i = 0; i < w.size(); ++i) {
    if (std::abs(w.span()[i]) < 1e-6) continue;
    EXPECT_NEAR(a.span()[i], n.span()[i], 1e-8);
  }
}

TEST(Catalog, NamesRoundTripInFixedOrder) {
  const char* expected[] = {"lasso", "layers", "orthogonal", "ridge", "highfreq", "localdiff"};
  for (std::size_t i = 0; i < kRegularizerCount; ++i) {
    EXPECT_EQ(kRegularizerNames[i], expected[i]);
    EXPECT_EQ(index_of(regularizer_from_name(expected[i])), i);
  }
  EXPECT_THROW(regularizer_from_name("dropout"), ConfigError);
}

TEST(LambdaMatrixType, RejectsNegativeAndNonFinite) {
  LambdaMatrix m(2);
  EXPECT_THROW(m.set(0, 0, -1.0), ConfigError);
  EXPECT_THROW(m.set(0, 0, std::nan("")), ConfigError);
  EXPECT_THROW(m.set_lambda_x(-0.5), ConfigError);
  EXPECT_THROW(m.set_row(1, std::vector<double>{1, 2, 3}), DimensionError);
  EXPECT_TRUE(m.regularizers_zero());
  m.set(1, Regularizer::kRidge, 0.5);
  EXPECT_EQ(m.at(1, Regularizer::kRidge), 0.5);
  EXPECT_FALSE(m.row_is_zero(1));
  m.clear_row(1);
  EXPECT_TRUE(m.row_is_zero(1));
}

class CompositeLossTest : public ::testing::Test {
 protected:
  void SetUp() override {
    model = testing::random_model(rng, 4, 6, true);
    while (model.depth() < 3) model = testing::random_model(rng, 4, 6, true);
    mask = StructureMask::full(model);
    batch = testing::random_batch(7, model.input_width(), rng);
  }
  std::mt19937_64 rng{11};
  LayeredModel model;
  StructureMask mask;
  Batch batch;
};

TEST_F(CompositeLossTest, ReducesToApproximationTerm) {
  const LossBreakdown l = composite_loss(model, mask, batch, LambdaMatrix(model.depth()));
  EXPECT_EQ(l.S, l.Ey);
  EXPECT_EQ(l.Ey, e_y(model, mask, batch));
}

TEST_F(CompositeLossTest, AllZeroWeightsGiveZero) {
  EXPECT_EQ(composite_loss(model, mask, batch, LambdaMatrix(model.depth(), 0.0, 0.0)).S, 0.0);
}

TEST_F(CompositeLossTest, RecomposesFromComponents) {
  std::uniform_real_distribution<double> d(0.0, 2.0);
  LambdaMatrix lam(model.depth(), d(rng), d(rng));
  for (std::size_t i = 0; i < model.depth(); ++i)
    for (std::size_t j = 0; j < kRegularizerCount; ++j)
      if (regularizer_applicable(kAllRegularizers[j], model.layer(i).weight)) lam.set(i, j, d(rng));
  const LossBreakdown l = composite_loss(model, mask, batch, lam);
  double s = lam.lambda_x() * l.Ex + lam.lambda_y() * l.Ey;
  for (std::size_t i = 0; i < model.depth(); ++i)
    for (std::size_t j = 0; j < kRegularizerCount; ++j) s += lam(i, j) * l.R[i][j];
  EXPECT_NEAR(l.S, s, 1e-10 * std::abs(s));
  EXPECT_NEAR(composite_loss_value(model, mask, batch, lam), l.S, 1e-10 * std::abs(s));
}

TEST_F(CompositeLossTest, HomogeneousInRegularizerWeights) {
  LambdaMatrix lam(model.depth(), 0.0, 0.0), scaled(model.depth(), 0.0, 0.0);
  for (std::size_t i = 0; i < model.depth(); ++i) {
    lam.set(i, Regularizer::kRidge, 0.3);
    lam.set(i, Regularizer::kLasso, 0.7);
    scaled.set(i, Regularizer::kRidge, 0.3 * 4.0);
    scaled.set(i, Regularizer::kLasso, 0.7 * 4.0);
  }
  const double base = composite_loss(model, mask, batch, lam).S;
  EXPECT_NEAR(composite_loss(model, mask, batch, scaled).S, 4.0 * base, 1e-12 * base);
}

TEST_F(CompositeLossTest, MonotoneInEachWeight) {
  const LambdaMatrix base(model.depth());
  const LossBreakdown l0 = composite_loss(model, mask, batch, base);
  for (std::size_t i = 0; i < model.depth(); ++i) {
    for (std::size_t j = 0; j < kRegularizerCount; ++j) {
      if (!regularizer_applicable(kAllRegularizers[j], model.layer(i).weight) || l0.R[i][j] <= 0.0) continue;
      LambdaMatrix up = base;
      up.set(i, j, 0.5);
      EXPECT_GT(composite_loss(model, mask, batch, up).S, l0.S);
    }
  }
}

TEST_F(CompositeLossTest, MaskedEntriesDoNotAffectRegularizers) {
  StructureMask m = mask;
  m.gammas[0](0, 0) = 0.0;
  m.gammas[0](1, 1) = 0.0;
  const LambdaMatrix lam = testing::uniform_lambdas(model.depth(), 0.2);
  const LossBreakdown before = composite_loss(model, m, batch, lam);
  LayeredModel poked = model;
  poked.layer(0).weight(0, 0) = 123.0;
  poked.layer(0).weight(1, 1) = -7.0;
  const LossBreakdown after = composite_loss(poked, m, batch, lam);
  EXPECT_EQ(before.R, after.R);
  EXPECT_EQ(before.S, after.S);
}

TEST_F(CompositeLossTest, LayerShapeChecked) {
  EXPECT_THROW(composite_loss(model, mask, batch, LambdaMatrix(model.depth() + 1)), DimensionError);
  Batch bad = batch;
  bad.x = Matrix(7, model.input_width() + 1);
  EXPECT_THROW(composite_loss(model, mask, bad, LambdaMatrix(model.depth())), DimensionError);
}

}  // namespace
}  // namespace regsched
