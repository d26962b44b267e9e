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


// JSON model checkpoints: architecture, weights, biases, decoder head and
// structure mask. Doubles are written in shortest round-trip form, so a
// save/load cycle reproduces every value exactly.

#pragma once

#include <string>
#include <utility>

#include <nlohmann/json.hpp>

#include "regsched/model.hpp"

namespace regsched {

inline constexpr const char* kCheckpointFormat = "regsched-model";
inline constexpr int kCheckpointVersion = 1;

struct Checkpoint {
  LayeredModel model;
  StructureMask mask;
};

namespace detail {

inline nlohmann::json matrix_json(const Matrix& m) {
  nlohmann::json rows = nlohmann::json::array();
  for (std::size_t i = 0; i < m.rows(); ++i) {
    const auto r = m.row(i);
    rows.push_back(std::vector<double>(r.begin(), r.end()));
  }
  return rows;
}

inline Matrix matrix_from_json(const nlohmann::json& j, std::size_t rows, std::size_t cols, const std::string& where) {
  if (!j.is_array() || j.size() != rows) {
    throw SchemaError(where + ": expected " + std::to_string(rows) + " rows");
  }
  Matrix m(rows, cols);
  for (std::size_t i = 0; i < rows; ++i) {
    const auto& r = j[i];
    if (!r.is_array() || r.size() != cols) {
      throw SchemaError(where + "[" + std::to_string(i) + "]: expected " + std::to_string(cols) + " columns");
    }
    for (std::size_t c = 0; c < cols; ++c) {
      if (!r[c].is_number()) throw SchemaError(where + "[" + std::to_string(i) + "][" + std::to_string(c) + "]: not a number");
      m(i, c) = r[c].get<double>();
    }
  }
  return m;
}

inline Vector vector_from_json(const nlohmann::json& j, std::size_t len, const std::string& where) {
  if (!j.is_array() || j.size() != len) throw SchemaError(where + ": expected " + std::to_string(len) + " entries");
  Vector v(len);
  for (std::size_t i = 0; i < len; ++i) {
    if (!j[i].is_number()) throw SchemaError(where + "[" + std::to_string(i) + "]: not a number");
    v[i] = j[i].get<double>();
  }
  return v;
}

inline const nlohmann::json& require(const nlohmann::json& j, const char* key, const std::string& where) {
  if (!j.is_object() || !j.contains(key)) throw SchemaError(where + ": missing field '" + key + "'");
  return j.at(key);
}

}  // namespace detail

inline nlohmann::json architecture_json(const Architecture& a) {
  nlohmann::json acts = nlohmann::json::array();
  for (auto act : a.activations) acts.push_back(std::string(name_of(act)));
  return {{"input_width", a.input_width},
          {"widths", a.widths},
          {"activations", acts},
          {"autoencoder_depth", a.autoencoder_depth}};
}

inline Architecture architecture_from_json(const nlohmann::json& j) {
  try {
    Architecture a;
    a.input_width = detail::require(j, "input_width", "architecture").get<std::size_t>();
    a.widths = detail::require(j, "widths", "architecture").get<std::vector<std::size_t>>();
    for (const auto& name : detail::require(j, "activations", "architecture")) {
      a.activations.push_back(activation_from_name(name.get<std::string>()));
    }
    a.autoencoder_depth = detail::require(j, "autoencoder_depth", "architecture").get<std::size_t>();
    a.validate();
    return a;
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError(std::string("architecture: ") + e.what());
  } catch (const ConfigError& e) {
    throw SchemaError(e.what());
  }
}

inline nlohmann::json checkpoint_json(const LayeredModel& model, const StructureMask& mask) {
  mask.check_compatible(model);
  nlohmann::json layers = nlohmann::json::array();
  for (std::size_t i = 0; i < model.depth(); ++i) {
    const Layer& l = model.layer(i);
    layers.push_back({{"weight", detail::matrix_json(l.weight)},
                      {"bias", l.bias.values()},
                      {"mask", detail::matrix_json(mask.gammas[i])}});
  }
  nlohmann::json head = nullptr;
  if (model.has_head()) {
    head = {{"weight", detail::matrix_json(model.head()->weight)}, {"bias", model.head()->bias.values()}};
  }
  return {{"format", kCheckpointFormat},
          {"version", kCheckpointVersion},
          {"architecture", architecture_json(model.architecture())},
          {"layers", layers},
          {"head", head}};
}

inline Checkpoint checkpoint_from_json(const nlohmann::json& j) {
  const auto& fmt = detail::require(j, "format", "checkpoint");
  if (!fmt.is_string() || fmt.get<std::string>() != kCheckpointFormat) {
    throw SchemaError("checkpoint: unrecognized format tag");
  }
  const auto& ver = detail::require(j, "version", "checkpoint");
  if (!ver.is_number_integer() || ver.get<int>() != kCheckpointVersion) {
    throw SchemaError("checkpoint: unsupported version");
  }
  const Architecture arch = architecture_from_json(detail::require(j, "architecture", "checkpoint"));
  const auto& layers = detail::require(j, "layers", "checkpoint");
  if (!layers.is_array() || layers.size() != arch.depth()) {
    throw SchemaError("checkpoint.layers: expected " + std::to_string(arch.depth()) + " layers");
  }
  Checkpoint out{LayeredModel(arch), {}};
  for (std::size_t i = 0; i < arch.depth(); ++i) {
    const std::string where = "checkpoint.layers[" + std::to_string(i) + "]";
    const std::size_t rows = arch.fan_in(i), cols = arch.widths[i];
    Layer& l = out.model.layer(i);
    l.weight = detail::matrix_from_json(detail::require(layers[i], "weight", where), rows, cols, where + ".weight");
    l.bias = detail::vector_from_json(detail::require(layers[i], "bias", where), cols, where + ".bias");
    out.mask.gammas.push_back(
        detail::matrix_from_json(detail::require(layers[i], "mask", where), rows, cols, where + ".mask"));
  }
  const auto& head = detail::require(j, "head", "checkpoint");
  if (arch.autoencoder_depth > 0) {
    if (head.is_null()) throw SchemaError("checkpoint.head: missing decoder for autoencoder depth > 0");
    const std::size_t ns = arch.widths[arch.autoencoder_depth - 1];
    out.model.head()->weight =
        detail::matrix_from_json(detail::require(head, "weight", "checkpoint.head"), ns, arch.input_width, "checkpoint.head.weight");
    out.model.head()->bias =
        detail::vector_from_json(detail::require(head, "bias", "checkpoint.head"), arch.input_width, "checkpoint.head.bias");
  } else if (!head.is_null()) {
    throw SchemaError("checkpoint.head: decoder present but autoencoder depth is 0");
  }
  try {
    out.mask.check_compatible(out.model);
  } catch (const DimensionError& e) {
    throw SchemaError(std::string("checkpoint mask: ") + e.what());
  }
  return out;
}

// Loads a checkpoint and checks it against an expected architecture.
inline Checkpoint checkpoint_from_json(const nlohmann::json& j, const Architecture& expected) {
  Checkpoint c = checkpoint_from_json(j);
  if (!(c.model.architecture() == expected)) {
    throw SchemaError("checkpoint architecture does not match the configured architecture");
  }
  return c;
}

}  // namespace regsched
