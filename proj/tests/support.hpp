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


// Shared oracles and fixtures for the test binaries. Everything here is
// written independently of the library internals it checks: naive loops,
// central finite differences and explicit enumeration.

#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "regsched/core_math.hpp"
#include "regsched/metrics.hpp"
#include "regsched/model.hpp"
#include "regsched/objective.hpp"
#include "regsched/regularizers.hpp"

namespace regsched::testing {

inline Matrix random_matrix(std::size_t rows, std::size_t cols, std::mt19937_64& rng, double lo = -1.0,
                            double hi = 1.0) {
  std::uniform_real_distribution<double> d(lo, hi);
  Matrix m(rows, cols);
  for (double& v : m.span()) v = d(rng);
  return m;
}

inline Vector random_vector(std::size_t n, std::mt19937_64& rng, double lo = -1.0, double hi = 1.0) {
  std::uniform_real_distribution<double> d(lo, hi);
  Vector v(n);
  for (double& x : v) x = d(rng);
  return v;
}

// Triple loop product, used as the reference for every matmul variant.
inline Matrix naive_matmul(const Matrix& a, const Matrix& b) {
  Matrix c(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < b.cols(); ++j) {
      double s = 0.0;
      for (std::size_t k = 0; k < a.cols(); ++k) s += a(i, k) * b(k, j);
      c(i, j) = s;
    }
  return c;
}

inline Matrix naive_transpose(const Matrix& a) {
  Matrix t(a.cols(), a.rows());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) t(j, i) = a(i, j);
  return t;
}

inline double max_abs_diff(const Matrix& a, const Matrix& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a.span()[i] - b.span()[i]));
  return m;
}

// Two-pass sample variance with the n-1 denominator.
inline double two_pass_variance(const std::vector<double>& v) {
  double mean = 0.0;
  for (double x : v) mean += x;
  mean /= static_cast<double>(v.size());
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  return ss / static_cast<double>(v.size() - 1);
}

inline double pearson(const std::vector<double>& a, const std::vector<double>& b) {
  const auto n = static_cast<double>(a.size());
  double ma = 0.0, mb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ma += a[i];
    mb += b[i];
  }
  ma /= n;
  mb /= n;
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    sab += (a[i] - ma) * (b[i] - mb);
    saa += (a[i] - ma) * (a[i] - ma);
    sbb += (b[i] - mb) * (b[i] - mb);
  }
  return sab / std::sqrt(saa * sbb);
}

// Random smooth model: depth in [1, max_depth], hidden widths in [3, max_width],
// tanh/sigmoid/identity activations, optional decoder head.
inline LayeredModel random_model(std::mt19937_64& rng, std::size_t max_depth, std::size_t max_width,
                                 bool with_head) {
  std::uniform_int_distribution<std::size_t> depth_d(with_head ? 2 : 1, max_depth);
  std::uniform_int_distribution<std::size_t> width_d(3, max_width);
  std::uniform_int_distribution<int> act_d(0, 2);
  Architecture a;
  a.input_width = width_d(rng);
  const std::size_t k = depth_d(rng);
  for (std::size_t i = 0; i + 1 < k; ++i) {
    a.widths.push_back(width_d(rng));
    const int pick = act_d(rng);
    a.activations.push_back(pick == 0 ? Activation::kTanh : pick == 1 ? Activation::kSigmoid : Activation::kIdentity);
  }
  a.widths.push_back(1);
  a.activations.push_back(Activation::kIdentity);
  if (with_head) a.autoencoder_depth = std::uniform_int_distribution<std::size_t>(1, k - 1)(rng);
  LayeredModel m(a);
  for (auto& l : m.layers()) {
    l.weight = random_matrix(l.inputs(), l.outputs(), rng);
    l.bias = random_vector(l.outputs(), rng, -0.5, 0.5);
  }
  if (m.has_head()) {
    m.head()->weight = random_matrix(m.head()->weight.rows(), m.head()->weight.cols(), rng);
    m.head()->bias = random_vector(m.head()->bias.size(), rng, -0.5, 0.5);
  }
  return m;
}

inline Batch random_batch(std::size_t rows, std::size_t cols, std::mt19937_64& rng) {
  return Batch{random_matrix(rows, cols, rng), random_vector(rows, rng)};
}

// Relative/absolute comparison of one gradient coordinate.
inline bool gradient_close(double analytic, double numeric, double rel_tol, double abs_tol) {
  const double err = std::abs(analytic - numeric);
  return err <= abs_tol || err <= rel_tol * std::max(std::abs(analytic), std::abs(numeric));
}

struct GradientCheck {
  std::size_t checked = 0;
  std::size_t skipped_kinks = 0;
  std::size_t failures = 0;
  double worst_rel = 0.0;
  double worst_abs = 0.0;
};

// Compares backward() with central differences of composite_loss_value over
// every parameter. Weight coordinates whose effective value lies within
// `kink_margin` of zero are skipped when lasso is active on their layer.
inline GradientCheck check_gradient(const LayeredModel& model, const StructureMask& mask, const Batch& batch,
                                    const LambdaMatrix& lambdas, double h = 1e-5, double rel_tol = 1e-5,
                                    double abs_tol = 1e-8, double kink_margin = 1e-4) {
  GradientCheck out;
  const ModelGradient g = backward(model, mask, batch, lambdas);
  const FlatParams fp = flatten(model);
  LayeredModel probe = model;
  for (const ParamIndex& p : fp.index) {
    if (p.kind == ParamIndex::Kind::kWeight && lambdas.at(p.layer, Regularizer::kLasso) > 0.0 &&
        mask.gammas[p.layer](p.row, p.col) != 0.0 && std::abs(parameter_at(model, p)) < kink_margin) {
      ++out.skipped_kinks;
      continue;
    }
    double& v = parameter_at(probe, p);
    const double saved = v;
    v = saved + h;
    const double up = composite_loss_value(probe, mask, batch, lambdas);
    v = saved - h;
    const double down = composite_loss_value(probe, mask, batch, lambdas);
    v = saved;
    const double numeric = (up - down) / (2.0 * h);
    // Masked weights do not enter the loss, so both sides are exactly zero.
    const double analytic = parameter_at(g, p);
    ++out.checked;
    if (!gradient_close(analytic, numeric, rel_tol, abs_tol)) ++out.failures;
    out.worst_abs = std::max(out.worst_abs, std::abs(analytic - numeric));
    const double denom = std::max(std::abs(analytic), std::abs(numeric));
    if (denom > 0.0 && std::abs(analytic - numeric) > abs_tol) {
      out.worst_rel = std::max(out.worst_rel, std::abs(analytic - numeric) / denom);
    }
  }
  return out;
}

inline LambdaMatrix uniform_lambdas(std::size_t layers, double value, double lambda_x = 0.0) {
  LambdaMatrix m(layers, lambda_x, 1.0);
  LambdaMatrix::Row r;
  r.fill(value);
  for (std::size_t i = 0; i < layers; ++i) m.set_row(i, r);
  return m;
}

// Scratch directory unique to a test, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    path_ = std::filesystem::temp_directory_path() /
            ("regsched_test_" + tag + "_" + std::to_string(std::random_device{}()));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

}  // namespace regsched::testing
