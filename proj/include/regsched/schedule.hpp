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


// Optimization schedules: which regularizer weights are in force at each
// training iteration.

#pragma once

#include <array>
#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "regsched/errors.hpp"
#include "regsched/regularizers.hpp"

namespace regsched {

enum class ScheduleMode { kBasic, kSequential, kCumulative, kStatic, kAccumulated, kOrdinal, kExpert };

inline constexpr std::array<ScheduleMode, 7> kAllScheduleModes = {
    ScheduleMode::kBasic,       ScheduleMode::kSequential, ScheduleMode::kCumulative, ScheduleMode::kStatic,
    ScheduleMode::kAccumulated, ScheduleMode::kOrdinal,    ScheduleMode::kExpert};

inline std::string_view name_of(ScheduleMode m) {
  switch (m) {
    case ScheduleMode::kBasic: return "basic";
    case ScheduleMode::kSequential: return "sequential";
    case ScheduleMode::kCumulative: return "cumulative";
    case ScheduleMode::kStatic: return "static";
    case ScheduleMode::kAccumulated: return "accumulated";
    case ScheduleMode::kOrdinal: return "ordinal";
    case ScheduleMode::kExpert: return "expert";
  }
  return "basic";
}

inline ScheduleMode schedule_mode_from_name(std::string_view name) {
  for (ScheduleMode m : kAllScheduleModes)
    if (name_of(m) == name) return m;
  throw ConfigError("unknown schedule mode '" + std::string(name) + "'");
}

// Modes whose per-layer rows come from GA-REG.
inline bool needs_ga_reg(ScheduleMode m) {
  return m == ScheduleMode::kSequential || m == ScheduleMode::kCumulative || m == ScheduleMode::kAccumulated ||
         m == ScheduleMode::kOrdinal;
}

struct Segment {
  std::size_t begin = 0;
  std::size_t end = 0;  // exclusive
  bool contains(std::size_t t) const { return t >= begin && t < end; }
  std::size_t length() const { return end - begin; }
  bool operator==(const Segment&) const = default;
};

// Splits [0, total) into `parts` equal segments; the last one absorbs the
// remainder.
inline std::vector<Segment> split_segments(std::size_t total, std::size_t parts) {
  if (parts == 0) throw ConfigError("cannot split iterations into zero segments");
  if (total < parts) {
    throw ConfigError("need at least one iteration per segment: T=" + std::to_string(total) +
                      " < " + std::to_string(parts));
  }
  const std::size_t len = total / parts;
  std::vector<Segment> out;
  for (std::size_t p = 0; p < parts; ++p) {
    out.push_back(Segment{p * len, p + 1 == parts ? total : (p + 1) * len});
  }
  return out;
}

inline std::size_t segment_of(const std::vector<Segment>& segments, std::size_t t) {
  for (std::size_t i = 0; i < segments.size(); ++i)
    if (segments[i].contains(t)) return i;
  throw RangeError("iteration " + std::to_string(t) + " lies outside every segment");
}

struct ScheduleSpec {
  ScheduleMode mode = ScheduleMode::kBasic;
  std::size_t iterations = 0;  // T
  std::size_t layers = 0;      // k
  std::size_t autoencoder_layers = 0;  // s (expert mode)
  std::size_t pretrain_iterations = 0;  // expert phase 1, run before [0, T)

  // Per-layer best vectors (cumulative, accumulated, ordinal, and the
  // completed layers of sequential).
  std::vector<std::optional<LambdaMatrix::Row>> best;
  // Static mode.
  std::optional<LambdaMatrix> full;
  // Sequential mode: current population best for a layer.
  std::function<LambdaMatrix::Row(std::size_t layer)> live_best;

  // Segments of [0, T). Expert mode splits among layers s+1..k only.
  std::vector<Segment> segments() const {
    const std::size_t parts = mode == ScheduleMode::kExpert ? layers - autoencoder_layers : layers;
    return split_segments(iterations, parts);
  }

  // Layer (0-based) whose segment contains t.
  std::size_t active_layer(std::size_t t) const {
    const std::size_t seg = segment_of(segments(), t);
    return mode == ScheduleMode::kExpert ? autoencoder_layers + seg : seg;
  }

  void validate() const {
    if (layers == 0) throw ConfigError("schedule: layer count must be positive");
    if (autoencoder_layers >= layers) throw ConfigError("schedule: autoencoder layers s must be < k");
    const std::size_t parts = mode == ScheduleMode::kExpert ? layers - autoencoder_layers : layers;
    if (iterations < parts) {
      throw ConfigError("schedule: T=" + std::to_string(iterations) + " is smaller than the " +
                        std::to_string(parts) + " layer segments");
    }
    if (mode == ScheduleMode::kStatic) {
      if (!full) throw ConfigError("schedule: static mode needs lambda_matrix");
      if (full->layers() != layers) throw ConfigError("schedule: lambda_matrix must have one row per layer");
    }
    if (mode == ScheduleMode::kCumulative || mode == ScheduleMode::kAccumulated || mode == ScheduleMode::kOrdinal) {
      if (best.size() != layers) throw ConfigError("schedule: one best vector per layer is required");
    }
    if (mode == ScheduleMode::kSequential && !live_best) {
      throw ConfigError("schedule: sequential mode needs a live population lookup");
    }
  }
};

inline ScheduleSpec basic_schedule(std::size_t k, std::size_t T) {
  ScheduleSpec s;
  s.mode = ScheduleMode::kBasic;
  s.layers = k;
  s.iterations = T;
  return s;
}

inline ScheduleSpec static_schedule(const LambdaMatrix& full, std::size_t T) {
  ScheduleSpec s;
  s.mode = ScheduleMode::kStatic;
  s.layers = full.layers();
  s.iterations = T;
  s.full = full;
  return s;
}

// Per-layer rows of `matrix` as best vectors for the cumulative, accumulated
// or ordinal modes.
inline ScheduleSpec layerwise_schedule(ScheduleMode mode, const LambdaMatrix& matrix, std::size_t T) {
  if (mode != ScheduleMode::kCumulative && mode != ScheduleMode::kAccumulated && mode != ScheduleMode::kOrdinal) {
    throw ConfigError("layerwise schedule requires cumulative, accumulated, or ordinal mode");
  }
  ScheduleSpec s;
  s.mode = mode;
  s.layers = matrix.layers();
  s.iterations = T;
  for (std::size_t i = 0; i < matrix.layers(); ++i) s.best.emplace_back(matrix.row(i));
  return s;
}

// Autoencoder pretraining of the first s layers, then T split equally among
// layers s+1..k with all of the active layer's regularizers at weight 1.
inline ScheduleSpec expert_schedule(std::size_t k, std::size_t s, std::size_t T, std::size_t r = kRegularizerCount,
                                    std::size_t pretrain_iterations = 0) {
  if (r != kRegularizerCount) {
    throw ConfigError("expert schedule: regularizer count must be " + std::to_string(kRegularizerCount));
  }
  if (s >= k) throw ConfigError("expert schedule: s=" + std::to_string(s) + " must be < k=" + std::to_string(k));
  if (T < k - s) throw ConfigError("expert schedule: T must be >= k - s");
  ScheduleSpec spec;
  spec.mode = ScheduleMode::kExpert;
  spec.layers = k;
  spec.autoencoder_layers = s;
  spec.iterations = T;
  spec.pretrain_iterations = s == 0 ? 0 : pretrain_iterations;
  return spec;
}

// Phase-1 weights of the expert schedule: reconstruction only.
inline LambdaMatrix expert_pretrain_lambda(const ScheduleSpec& spec) {
  return LambdaMatrix(spec.layers, 1.0, 0.0);
}

inline LambdaMatrix resolve_lambda(const ScheduleSpec& spec, std::size_t iteration) {
  if (iteration >= spec.iterations) {
    throw RangeError("iteration " + std::to_string(iteration) + " outside [0, " + std::to_string(spec.iterations) +
                     ")");
  }
  LambdaMatrix out(spec.layers, 0.0, 1.0);
  auto stored = [&spec](std::size_t layer) -> const LambdaMatrix::Row& {
    if (layer >= spec.best.size() || !spec.best[layer]) {
      throw ConfigError("schedule: best vector for layer " + std::to_string(layer + 1) + " is not set");
    }
    return *spec.best[layer];
  };
  switch (spec.mode) {
    case ScheduleMode::kBasic:
      return out;
    case ScheduleMode::kStatic:
      if (!spec.full) throw ConfigError("schedule: static mode needs lambda_matrix");
      return *spec.full;
    case ScheduleMode::kSequential: {
      const std::size_t active = spec.active_layer(iteration);
      for (std::size_t i = 0; i < active; ++i)
        if (i < spec.best.size() && spec.best[i]) out.set_row(i, *spec.best[i]);
      if (!spec.live_best) throw ConfigError("schedule: sequential mode needs a live population lookup");
      out.set_row(active, spec.live_best(active));
      return out;
    }
    case ScheduleMode::kCumulative:
    case ScheduleMode::kAccumulated: {
      const std::size_t active = spec.active_layer(iteration);
      for (std::size_t i = 0; i <= active; ++i) out.set_row(i, stored(i));
      return out;
    }
    case ScheduleMode::kOrdinal: {
      const std::size_t active = spec.active_layer(iteration);
      out.set_row(active, stored(active));
      return out;
    }
    case ScheduleMode::kExpert: {
      LambdaMatrix::Row ones;
      ones.fill(1.0);
      out.set_row(spec.active_layer(iteration), ones);
      return out;
    }
  }
  return out;
}

}  // namespace regsched
