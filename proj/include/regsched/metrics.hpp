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


// Accuracy, robustness, and complexity measures, and the per-iteration run
// record written to JSONL.

#pragma once

#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <string>

#include <nlohmann/json.hpp>

#include "regsched/core_math.hpp"
#include "regsched/errors.hpp"
#include "regsched/model.hpp"

namespace regsched {

// Row batch of inputs and targets.
struct Batch {
  Matrix x;  // objects x n
  Vector y;  // objects

  std::size_t size() const { return y.size(); }
  bool empty() const { return y.empty(); }
};

inline double mae(std::span<const double> predictions, std::span<const double> targets) {
  if (predictions.size() != targets.size()) throw DimensionError("mae: length mismatch");
  if (predictions.empty()) throw SizeError("mae: empty input");
  double acc = 0.0;
  for (std::size_t i = 0; i < predictions.size(); ++i) acc += std::abs(predictions[i] - targets[i]);
  return acc / static_cast<double>(predictions.size());
}

inline double sum_squared_residuals(std::span<const double> predictions, std::span<const double> targets) {
  if (predictions.size() != targets.size()) throw DimensionError("residuals: length mismatch");
  double acc = 0.0;
  for (std::size_t i = 0; i < predictions.size(); ++i) {
    const double d = targets[i] - predictions[i];
    acc += d * d;
  }
  return acc;
}

// Sum of squared approximation residuals over the batch.
inline double e_y(const LayeredModel& model, const StructureMask& mask, const Batch& batch) {
  if (batch.empty()) throw SizeError("e_y: empty batch");
  return sum_squared_residuals(forward_batch(model, mask, batch.x).span(), batch.y.span());
}

// Sum of squared reconstruction residuals over the batch.
inline double e_x(const LayeredModel& model, const Batch& batch) {
  if (batch.empty()) throw SizeError("e_x: empty batch");
  if (!model.has_head()) throw ConfigError("e_x: model has no autoencoder head");
  const Matrix r = reconstruct_batch(model, StructureMask::full(model), batch.x);
  return sum_squared_residuals(r.span(), batch.x.span());
}

inline double e_x(const LayeredModel& model, const StructureMask& mask, const Batch& batch) {
  if (batch.empty()) throw SizeError("e_x: empty batch");
  const Matrix r = reconstruct_batch(model, mask, batch.x);
  return sum_squared_residuals(r.span(), batch.x.span());
}

// Sample (n-1) variance. Requires at least two values.
inline double sample_variance(std::span<const double> values) {
  if (values.size() < 2) throw SizeError("sample variance needs at least two values");
  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= static_cast<double>(values.size());
  double acc = 0.0;
  for (double v : values) acc += (v - mean) * (v - mean);
  return acc / static_cast<double>(values.size() - 1);
}

// Variance of the last `window` loss values; empty until enough exist.
inline std::optional<double> robustness(std::span<const double> history, std::size_t window) {
  if (window < 2) throw ConfigError("robustness window must be at least 2");
  if (history.size() < window) return std::nullopt;
  return sample_variance(history.subspan(history.size() - window));
}

// Sample variance of the flattened parameters, skipping masked-out weights.
inline double parameter_variance(const LayeredModel& model, const StructureMask& mask) {
  const FlatParams fp = flatten(model);
  std::vector<double> active;
  active.reserve(fp.size());
  for (std::size_t i = 0; i < fp.size(); ++i)
    if (parameter_active(mask, fp.index[i])) active.push_back(fp.values[i]);
  if (active.size() < 2) return 0.0;
  return sample_variance(active);
}

inline double parameter_variance(const LayeredModel& model) {
  return parameter_variance(model, StructureMask::full(model));
}

// Number of active entries across all structure matrices.
inline std::size_t complexity(const StructureMask& mask) {
  std::size_t n = 0;
  for (const auto& g : mask.gammas)
    for (double v : g.span()) n += v != 0.0;
  return n;
}

struct RunRecord {
  std::size_t iteration = 0;
  double train_S = 0.0;
  double val_MAE = 0.0;
  std::size_t complexity = 0;
  std::optional<double> robustness;  // null until the window fills
  double parameter_variance = 0.0;

  bool operator==(const RunRecord&) const = default;
};

inline void to_json(nlohmann::json& j, const RunRecord& r) {
  j = nlohmann::json{{"iteration", r.iteration},
                     {"train_S", r.train_S},
                     {"val_MAE", r.val_MAE},
                     {"complexity", r.complexity},
                     {"robustness", r.robustness ? nlohmann::json(*r.robustness) : nlohmann::json(nullptr)},
                     {"parameter_variance", r.parameter_variance}};
}

inline void from_json(const nlohmann::json& j, RunRecord& r) {
  r.iteration = j.at("iteration").get<std::size_t>();
  r.train_S = j.at("train_S").get<double>();
  r.val_MAE = j.at("val_MAE").get<double>();
  r.complexity = j.at("complexity").get<std::size_t>();
  const auto& rob = j.at("robustness");
  r.robustness = rob.is_null() ? std::nullopt : std::optional<double>(rob.get<double>());
  r.parameter_variance = j.at("parameter_variance").get<double>();
}

inline std::string to_jsonl(std::span<const RunRecord> records) {
  std::string out;
  for (const auto& r : records) {
    out += nlohmann::json(r).dump();
    out += '\n';
  }
  return out;
}

}  // namespace regsched
