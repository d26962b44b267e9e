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


// Catalog of per-layer weight regularizers and the k x r metaparameter
// matrix that weights them in the composite loss.

#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "regsched/core_math.hpp"
#include "regsched/errors.hpp"

namespace regsched {

// Column order of LambdaMatrix follows this enumeration.
enum class Regularizer : std::size_t {
  kLasso = 0,            // ||w - w0||_1
  kLayers = 1,           // number of layers (constant in W)
  kOrthogonal = 2,       // ||W W^T - I||_F
  kRidge = 3,            // ||w - w0||_2^2
  kHighFrequency = 4,    // ||(I - A) W||_F
  kLocalDifference = 5,  // ||B W||_F
};

inline constexpr std::size_t kRegularizerCount = 6;

inline constexpr std::array<Regularizer, kRegularizerCount> kAllRegularizers = {
    Regularizer::kLasso,  Regularizer::kLayers,        Regularizer::kOrthogonal,
    Regularizer::kRidge,  Regularizer::kHighFrequency, Regularizer::kLocalDifference};

inline constexpr std::array<std::string_view, kRegularizerCount> kRegularizerNames = {
    "lasso", "layers", "orthogonal", "ridge", "highfreq", "localdiff"};

inline std::string_view name_of(Regularizer r) {
  return kRegularizerNames[static_cast<std::size_t>(r)];
}

inline Regularizer regularizer_from_name(std::string_view name) {
  for (std::size_t i = 0; i < kRegularizerCount; ++i) {
    if (kRegularizerNames[i] == name) return kAllRegularizers[i];
  }
  throw ConfigError("unknown regularizer '" + std::string(name) + "'");
}

inline std::size_t index_of(Regularizer r) { return static_cast<std::size_t>(r); }

// Operators act on the row index of W, so they need at least three rows.
inline bool regularizer_applicable(Regularizer r, const Matrix& w) {
  if (r == Regularizer::kHighFrequency || r == Regularizer::kLocalDifference) return w.rows() >= 3;
  return true;
}

namespace detail {

inline void require_operator_rows(Regularizer r, const Matrix& w) {
  if (!regularizer_applicable(r, w)) {
    throw DimensionError(std::string(name_of(r)) + " regularizer needs a weight matrix with >= 3 rows, got " +
                         shape_string(w));
  }
}

inline Matrix offset(const Matrix& w, const Matrix* w0) {
  if (w0 == nullptr) return w;
  require_same_shape(w, *w0, "reference weights");
  return w - *w0;
}

inline Matrix high_frequency_operator(std::size_t n) {
  return Matrix::identity(n) - build_smoothing_A(n);
}

}  // namespace detail

// Value of regularizer `kind` on weight matrix `w`. `w0` is the optional
// reference point of the lasso and ridge terms (zero when null).
inline double reg_value(Regularizer kind, const Matrix& w, std::size_t layer_count,
                        const Matrix* w0 = nullptr) {
  if (w.empty()) throw DimensionError("regularizer applied to an empty matrix");
  switch (kind) {
    case Regularizer::kLasso:
      return norm_l1(detail::offset(w, w0).span());
    case Regularizer::kLayers:
      return static_cast<double>(layer_count);
    case Regularizer::kOrthogonal:
      return frobenius(matmul_nt(w, w) - Matrix::identity(w.rows()));
    case Regularizer::kRidge:
      return norm_l2_sq(detail::offset(w, w0).span());
    case Regularizer::kHighFrequency:
      detail::require_operator_rows(kind, w);
      return frobenius(matmul(detail::high_frequency_operator(w.rows()), w));
    case Regularizer::kLocalDifference:
      detail::require_operator_rows(kind, w);
      return frobenius(matmul(build_difference_B(w.rows()), w));
  }
  return 0.0;
}

// Gradient of reg_value with respect to w. Non-differentiable points take
// the zero subgradient: sign(0) = 0 for lasso, and 0 where a Frobenius norm
// vanishes.
inline Matrix reg_grad(Regularizer kind, const Matrix& w, std::size_t layer_count,
                       const Matrix* w0 = nullptr) {
  (void)layer_count;
  if (w.empty()) throw DimensionError("regularizer applied to an empty matrix");
  switch (kind) {
    case Regularizer::kLasso: {
      Matrix g = detail::offset(w, w0);
      for (double& v : g.span()) v = static_cast<double>((v > 0.0) - (v < 0.0));
      return g;
    }
    case Regularizer::kLayers:
      return Matrix(w.rows(), w.cols());
    case Regularizer::kOrthogonal: {
      // d||M||_F = 2 M W / ||M||_F for M = W W^T - I (symmetric).
      const Matrix m = matmul_nt(w, w) - Matrix::identity(w.rows());
      const double f = frobenius(m);
      if (f == 0.0) return Matrix(w.rows(), w.cols());
      return (2.0 / f) * matmul(m, w);
    }
    case Regularizer::kRidge:
      return 2.0 * detail::offset(w, w0);
    case Regularizer::kHighFrequency:
    case Regularizer::kLocalDifference: {
      detail::require_operator_rows(kind, w);
      const Matrix op = kind == Regularizer::kHighFrequency ? detail::high_frequency_operator(w.rows())
                                                            : build_difference_B(w.rows());
      const Matrix ow = matmul(op, w);
      const double f = frobenius(ow);
      if (f == 0.0) return Matrix(w.rows(), w.cols());
      return (1.0 / f) * matmul_tn(op, ow);
    }
  }
  return Matrix(w.rows(), w.cols());
}

// k x r matrix of non-negative regularizer weights plus the scalar weights of
// the reconstruction (lambda_x) and approximation (lambda_y) terms.
class LambdaMatrix {
 public:
  using Row = std::array<double, kRegularizerCount>;

  LambdaMatrix() = default;
  explicit LambdaMatrix(std::size_t layers, double lambda_x = 0.0, double lambda_y = 1.0)
      : rows_(layers, Row{}), lambda_x_(lambda_x), lambda_y_(lambda_y) {
    check_scalar(lambda_x, "lambda_x");
    check_scalar(lambda_y, "lambda_y");
  }

  std::size_t layers() const { return rows_.size(); }
  static constexpr std::size_t regularizers() { return kRegularizerCount; }

  double operator()(std::size_t layer, std::size_t reg) const { return rows_.at(layer).at(reg); }
  double at(std::size_t layer, Regularizer r) const { return (*this)(layer, index_of(r)); }

  void set(std::size_t layer, std::size_t reg, double value) {
    check_scalar(value, "lambda");
    rows_.at(layer).at(reg) = value;
  }
  void set(std::size_t layer, Regularizer r, double value) { set(layer, index_of(r), value); }

  const Row& row(std::size_t layer) const { return rows_.at(layer); }
  void set_row(std::size_t layer, const Row& values) {
    for (double v : values) check_scalar(v, "lambda");
    rows_.at(layer) = values;
  }
  void set_row(std::size_t layer, const std::vector<double>& values) {
    if (values.size() != kRegularizerCount) {
      throw DimensionError("lambda row needs " + std::to_string(kRegularizerCount) + " entries, got " +
                           std::to_string(values.size()));
    }
    Row r{};
    std::copy(values.begin(), values.end(), r.begin());
    set_row(layer, r);
  }
  void clear_row(std::size_t layer) { rows_.at(layer) = Row{}; }

  bool row_is_zero(std::size_t layer) const {
    for (double v : rows_.at(layer))
      if (v != 0.0) return false;
    return true;
  }
  bool regularizers_zero() const {
    for (std::size_t i = 0; i < rows_.size(); ++i)
      if (!row_is_zero(i)) return false;
    return true;
  }

  double lambda_x() const { return lambda_x_; }
  double lambda_y() const { return lambda_y_; }
  void set_lambda_x(double v) { check_scalar(v, "lambda_x"), lambda_x_ = v; }
  void set_lambda_y(double v) { check_scalar(v, "lambda_y"), lambda_y_ = v; }

  bool operator==(const LambdaMatrix&) const = default;

 private:
  static void check_scalar(double v, const char* what) {
    if (!std::isfinite(v) || v < 0.0) {
      throw ConfigError(std::string(what) + " must be finite and non-negative, got " + std::to_string(v));
    }
  }

  std::vector<Row> rows_;
  double lambda_x_ = 0.0;
  double lambda_y_ = 1.0;
};

}  // namespace regsched
