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


// Dense row-major matrices and vectors in 64-bit reals, plus the banded
// smoothing (A) and difference (B) operators used by the frequency and
// local-difference regularizers.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

#include "regsched/errors.hpp"

namespace regsched {

class Vector {
 public:
  Vector() = default;
  explicit Vector(std::size_t len, double fill = 0.0) : data_(len, fill) {}
  Vector(std::initializer_list<double> values) : data_(values) {}
  explicit Vector(std::vector<double> values) : data_(std::move(values)) {}

  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  double& operator[](std::size_t i) { return data_[i]; }
  double operator[](std::size_t i) const { return data_[i]; }

  std::span<double> span() { return data_; }
  std::span<const double> span() const { return data_; }
  const std::vector<double>& values() const { return data_; }

  auto begin() { return data_.begin(); }
  auto end() { return data_.end(); }
  auto begin() const { return data_.begin(); }
  auto end() const { return data_.end(); }

  bool operator==(const Vector&) const = default;

 private:
  std::vector<double> data_;
};

class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}
  Matrix(std::size_t rows, std::size_t cols, std::vector<double> row_major)
      : rows_(rows), cols_(cols), data_(std::move(row_major)) {
    if (data_.size() != rows_ * cols_) {
      throw DimensionError("matrix data length " + std::to_string(data_.size()) +
                           " does not equal " + std::to_string(rows_) + "x" +
                           std::to_string(cols_));
    }
  }

  static Matrix from_rows(std::initializer_list<std::initializer_list<double>> rows) {
    const std::size_t r = rows.size();
    const std::size_t c = r == 0 ? 0 : rows.begin()->size();
    Matrix m(r, c);
    std::size_t i = 0;
    for (const auto& row : rows) {
      if (row.size() != c) throw DimensionError("ragged matrix literal");
      std::copy(row.begin(), row.end(), m.data_.begin() + static_cast<std::ptrdiff_t>(i * c));
      ++i;
    }
    return m;
  }

  static Matrix identity(std::size_t n) {
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
  }

  // n x 1 column holding v.
  static Matrix column(const Vector& v) {
    return Matrix(v.size(), 1, v.values());
  }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

  std::span<double> row(std::size_t i) { return {data_.data() + i * cols_, cols_}; }
  std::span<const double> row(std::size_t i) const { return {data_.data() + i * cols_, cols_}; }

  std::span<double> span() { return data_; }
  std::span<const double> span() const { return data_; }

  bool same_shape(const Matrix& other) const {
    return rows_ == other.rows_ && cols_ == other.cols_;
  }

  bool operator==(const Matrix&) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

inline std::string shape_string(const Matrix& m) {
  return std::to_string(m.rows()) + "x" + std::to_string(m.cols());
}

inline void require_same_shape(const Matrix& a, const Matrix& b, const char* op) {
  if (!a.same_shape(b)) {
    throw DimensionError(std::string(op) + ": shape " + shape_string(a) +
                         " does not match " + shape_string(b));
  }
}

inline bool all_finite(std::span<const double> values) {
  return std::all_of(values.begin(), values.end(), [](double v) { return std::isfinite(v); });
}

inline Matrix hadamard(const Matrix& a, const Matrix& m) {
  require_same_shape(a, m, "hadamard");
  Matrix out(a.rows(), a.cols());
  auto o = out.span();
  auto x = a.span();
  auto y = m.span();
  for (std::size_t i = 0; i < o.size(); ++i) o[i] = x[i] * y[i];
  return out;
}

inline Matrix operator+(const Matrix& a, const Matrix& b) {
  require_same_shape(a, b, "add");
  Matrix out = a;
  auto o = out.span();
  auto y = b.span();
  for (std::size_t i = 0; i < o.size(); ++i) o[i] += y[i];
  return out;
}

inline Matrix operator-(const Matrix& a, const Matrix& b) {
  require_same_shape(a, b, "subtract");
  Matrix out = a;
  auto o = out.span();
  auto y = b.span();
  for (std::size_t i = 0; i < o.size(); ++i) o[i] -= y[i];
  return out;
}

inline Matrix operator*(double s, const Matrix& a) {
  Matrix out = a;
  for (double& v : out.span()) v *= s;
  return out;
}

// a += s * b
inline void axpy(double s, const Matrix& b, Matrix& a) {
  require_same_shape(a, b, "axpy");
  auto o = a.span();
  auto y = b.span();
  for (std::size_t i = 0; i < o.size(); ++i) o[i] += s * y[i];
}

inline Matrix transpose(const Matrix& a) {
  Matrix out(a.cols(), a.rows());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) out(j, i) = a(i, j);
  return out;
}

// a * b
inline Matrix matmul(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.rows()) {
    throw DimensionError("matmul: " + shape_string(a) + " * " + shape_string(b));
  }
  Matrix out(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    auto orow = out.row(i);
    for (std::size_t p = 0; p < a.cols(); ++p) {
      const double av = a(i, p);
      auto brow = b.row(p);
      for (std::size_t j = 0; j < orow.size(); ++j) orow[j] += av * brow[j];
    }
  }
  return out;
}

// a^T * b
inline Matrix matmul_tn(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows()) {
    throw DimensionError("matmul_tn: " + shape_string(a) + "^T * " + shape_string(b));
  }
  Matrix out(a.cols(), b.cols());
  for (std::size_t p = 0; p < a.rows(); ++p) {
    auto arow = a.row(p);
    auto brow = b.row(p);
    for (std::size_t i = 0; i < arow.size(); ++i) {
      const double av = arow[i];
      auto orow = out.row(i);
      for (std::size_t j = 0; j < brow.size(); ++j) orow[j] += av * brow[j];
    }
  }
  return out;
}

// a * b^T
inline Matrix matmul_nt(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.cols()) {
    throw DimensionError("matmul_nt: " + shape_string(a) + " * " + shape_string(b) + "^T");
  }
  Matrix out(a.rows(), b.rows());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    auto arow = a.row(i);
    for (std::size_t j = 0; j < b.rows(); ++j) {
      auto brow = b.row(j);
      double acc = 0.0;
      for (std::size_t p = 0; p < arow.size(); ++p) acc += arow[p] * brow[p];
      out(i, j) = acc;
    }
  }
  return out;
}

inline double norm_l1(std::span<const double> v) {
  double acc = 0.0;
  for (double x : v) acc += std::abs(x);
  return acc;
}
inline double norm_l1(const Vector& v) { return norm_l1(v.span()); }

inline double norm_l2_sq(std::span<const double> v) {
  double acc = 0.0;
  for (double x : v) acc += x * x;
  return acc;
}
inline double norm_l2_sq(const Vector& v) { return norm_l2_sq(v.span()); }

inline double frobenius(const Matrix& a) { return std::sqrt(norm_l2_sq(a.span())); }

// Square n x n three-tap averaging operator. Interior rows average the
// diagonal entry with its two neighbours; the boundary rows keep the
// (1/3)(2/3, 2/3) weights on the two outermost columns.
inline Matrix build_smoothing_A(std::size_t n) {
  if (n < 3) throw DimensionError("smoothing operator needs n >= 3, got " + std::to_string(n));
  Matrix a(n, n);
  const double third = 1.0 / 3.0;
  const double edge = third * (2.0 / 3.0);
  a(0, 0) = edge;
  a(0, 1) = edge;
  for (std::size_t i = 1; i + 1 < n; ++i) {
    a(i, i - 1) = third;
    a(i, i) = third;
    a(i, i + 1) = third;
  }
  a(n - 1, n - 2) = edge;
  a(n - 1, n - 1) = edge;
  return a;
}

// Square n x n central-difference operator with one-sided doubled
// differences on the boundary rows. Every row annihilates constants.
inline Matrix build_difference_B(std::size_t n) {
  if (n < 3) throw DimensionError("difference operator needs n >= 3, got " + std::to_string(n));
  Matrix b(n, n);
  b(0, 0) = -2.0;
  b(0, 1) = 2.0;
  for (std::size_t i = 1; i + 1 < n; ++i) {
    b(i, i - 1) = -1.0;
    b(i, i + 1) = 1.0;
  }
  b(n - 1, n - 2) = -2.0;
  b(n - 1, n - 1) = 2.0;
  return b;
}

}  // namespace regsched
