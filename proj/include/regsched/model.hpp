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


// Layered feed-forward regression model with per-weight structure masks and
// an optional linear autoencoder head reading from an intermediate layer.
//
// Layer i holds W_i of shape n_in x n_out and computes
//   h_i = act_i((Gamma_i (*) W_i)^T h_{i-1} + b_i),
// with row-batched inputs stored one sample per row.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "regsched/core_math.hpp"
#include "regsched/errors.hpp"
#include "regsched/rng.hpp"

namespace regsched {

enum class Activation { kIdentity, kSigmoid, kRelu, kTanh };

inline std::string_view name_of(Activation a) {
  switch (a) {
    case Activation::kIdentity: return "identity";
    case Activation::kSigmoid: return "sigmoid";
    case Activation::kRelu: return "relu";
    case Activation::kTanh: return "tanh";
  }
  return "identity";
}

inline Activation activation_from_name(std::string_view name) {
  for (Activation a : {Activation::kIdentity, Activation::kSigmoid, Activation::kRelu, Activation::kTanh}) {
    if (name_of(a) == name) return a;
  }
  throw ConfigError("unknown activation '" + std::string(name) + "'");
}

inline double activate(Activation a, double z) {
  switch (a) {
    case Activation::kIdentity: return z;
    case Activation::kSigmoid: return 1.0 / (1.0 + std::exp(-z));
    case Activation::kRelu: return z > 0.0 ? z : 0.0;
    case Activation::kTanh: return std::tanh(z);
  }
  return z;
}

// Derivative expressed through the pre-activation z and output h.
inline double activation_slope(Activation a, double z, double h) {
  switch (a) {
    case Activation::kIdentity: return 1.0;
    case Activation::kSigmoid: return h * (1.0 - h);
    case Activation::kRelu: return z > 0.0 ? 1.0 : 0.0;
    case Activation::kTanh: return 1.0 - h * h;
  }
  return 1.0;
}

struct Layer {
  Matrix weight;  // n_in x n_out
  Vector bias;    // n_out
  Activation activation = Activation::kIdentity;

  std::size_t inputs() const { return weight.rows(); }
  std::size_t outputs() const { return weight.cols(); }
  bool operator==(const Layer&) const = default;
};

// Linear decoder r(x) = W'^T h_s + b' from the output of layer `after_layer`
// (1-based, so after_layer = s) back to the input width.
struct AutoencoderHead {
  std::size_t after_layer = 1;
  Matrix weight;  // n_s x n
  Vector bias;    // n
  bool operator==(const AutoencoderHead&) const = default;
};

// Shape-only description of a model.
struct Architecture {
  std::size_t input_width = 0;
  std::vector<std::size_t> widths;  // output width of every layer; last is 1
  std::vector<Activation> activations;
  std::size_t autoencoder_depth = 0;  // 0 = no head

  std::size_t depth() const { return widths.size(); }
  std::size_t fan_in(std::size_t layer) const { return layer == 0 ? input_width : widths[layer - 1]; }

  void validate() const {
    if (input_width == 0) throw ConfigError("architecture: input width must be positive");
    if (widths.empty()) throw ConfigError("architecture: at least one layer is required");
    if (activations.size() != widths.size()) {
      throw ConfigError("architecture: one activation per layer is required");
    }
    for (std::size_t w : widths)
      if (w == 0) throw ConfigError("architecture: layer widths must be positive");
    if (widths.back() != 1) throw ConfigError("architecture: regression output width must be 1");
    if (autoencoder_depth >= widths.size()) {
      throw ConfigError("architecture: autoencoder depth s must satisfy 0 <= s < k");
    }
  }

  bool operator==(const Architecture&) const = default;
};

class LayeredModel {
 public:
  LayeredModel() = default;
  LayeredModel(std::vector<Layer> layers, std::optional<AutoencoderHead> head = std::nullopt)
      : layers_(std::move(layers)), head_(std::move(head)) {
    validate();
  }

  // Zero-valued model of the given shape.
  explicit LayeredModel(const Architecture& arch) {
    arch.validate();
    for (std::size_t i = 0; i < arch.depth(); ++i) {
      layers_.push_back(Layer{Matrix(arch.fan_in(i), arch.widths[i]), Vector(arch.widths[i]), arch.activations[i]});
    }
    if (arch.autoencoder_depth > 0) {
      const std::size_t s = arch.autoencoder_depth;
      head_ = AutoencoderHead{s, Matrix(arch.widths[s - 1], arch.input_width), Vector(arch.input_width)};
    }
  }

  std::size_t depth() const { return layers_.size(); }
  std::size_t input_width() const { return layers_.empty() ? 0 : layers_.front().inputs(); }

  const std::vector<Layer>& layers() const { return layers_; }
  std::vector<Layer>& layers() { return layers_; }
  const Layer& layer(std::size_t i) const { return layers_.at(i); }
  Layer& layer(std::size_t i) { return layers_.at(i); }

  bool has_head() const { return head_.has_value(); }
  const std::optional<AutoencoderHead>& head() const { return head_; }
  std::optional<AutoencoderHead>& head() { return head_; }

  Architecture architecture() const {
    Architecture a;
    a.input_width = input_width();
    for (const auto& l : layers_) {
      a.widths.push_back(l.outputs());
      a.activations.push_back(l.activation);
    }
    a.autoencoder_depth = head_ ? head_->after_layer : 0;
    return a;
  }

  std::size_t weight_count() const {
    std::size_t n = 0;
    for (const auto& l : layers_) n += l.weight.size();
    return n;
  }

  std::size_t parameter_count() const {
    std::size_t n = 0;
    for (const auto& l : layers_) n += l.weight.size() + l.bias.size();
    if (head_) n += head_->weight.size() + head_->bias.size();
    return n;
  }

  void validate() const {
    if (layers_.empty()) throw DimensionError("model has no layers");
    for (std::size_t i = 0; i < layers_.size(); ++i) {
      const Layer& l = layers_[i];
      if (l.bias.size() != l.outputs()) {
        throw DimensionError("layer " + std::to_string(i + 1) + ": bias length does not match output width");
      }
      if (i > 0 && layers_[i - 1].outputs() != l.inputs()) {
        throw DimensionError("layer " + std::to_string(i + 1) + ": input width " + std::to_string(l.inputs()) +
                             " does not match previous output width " + std::to_string(layers_[i - 1].outputs()));
      }
    }
    if (layers_.back().outputs() != 1) throw DimensionError("final layer output width must be 1");
    if (head_) {
      const std::size_t s = head_->after_layer;
      if (s == 0 || s > layers_.size()) throw DimensionError("autoencoder head attached to invalid layer");
      if (head_->weight.rows() != layers_[s - 1].outputs() || head_->weight.cols() != input_width() ||
          head_->bias.size() != input_width()) {
        throw DimensionError("autoencoder head does not map layer " + std::to_string(s) +
                             " back to the input width");
      }
    }
  }

  bool operator==(const LayeredModel&) const = default;

 private:
  std::vector<Layer> layers_;
  std::optional<AutoencoderHead> head_;
};

// Gradients share the model's shape.
using ModelGradient = LayeredModel;

// Per-layer binary matrices Gamma_i shaped like the weight matrices.
struct StructureMask {
  std::vector<Matrix> gammas;

  static StructureMask full(const LayeredModel& model) {
    StructureMask m;
    for (const auto& l : model.layers()) m.gammas.emplace_back(l.inputs(), l.outputs(), 1.0);
    return m;
  }

  std::size_t layers() const { return gammas.size(); }

  // Shape and binary-value check against a model.
  void check_compatible(const LayeredModel& model) const {
    if (gammas.size() != model.depth()) {
      throw DimensionError("mask has " + std::to_string(gammas.size()) + " layers, model has " +
                           std::to_string(model.depth()));
    }
    for (std::size_t i = 0; i < gammas.size(); ++i) {
      require_same_shape(gammas[i], model.layer(i).weight, "structure mask");
      for (double g : gammas[i].span()) {
        if (g != 0.0 && g != 1.0) throw DimensionError("structure mask entries must be 0 or 1");
      }
    }
  }

  // True if some layer has no active entry at all.
  bool has_dead_layer() const {
    for (const auto& g : gammas) {
      bool any = false;
      for (double v : g.span()) any = any || v != 0.0;
      if (!any) return true;
    }
    return false;
  }

  bool operator==(const StructureMask&) const = default;
};

// Glorot-uniform weights, zero biases.
inline LayeredModel init_model(const Architecture& arch, std::uint64_t seed) {
  LayeredModel model(arch);
  Rng rng = make_stream(seed, {stream::kInit});
  auto fill = [&rng](Matrix& w) {
    const double bound = std::sqrt(6.0 / static_cast<double>(w.rows() + w.cols()));
    std::uniform_real_distribution<double> dist(-bound, bound);
    for (double& v : w.span()) v = dist(rng);
  };
  for (auto& l : model.layers()) fill(l.weight);
  if (model.has_head()) fill(model.head()->weight);
  return model;
}

inline Matrix effective_weight(const LayeredModel& model, const StructureMask& mask, std::size_t i) {
  return hadamard(model.layer(i).weight, mask.gammas.at(i));
}

// Intermediate values of a batched forward pass. pre[i]/post[i] are the
// pre-activation and output of layer i (batch x n_out).
struct ForwardTrace {
  std::vector<Matrix> effective;
  std::vector<Matrix> pre;
  std::vector<Matrix> post;
};

namespace detail {

inline void require_inputs(const LayeredModel& model, const Matrix& x) {
  if (x.cols() != model.input_width()) {
    throw DimensionError("input width " + std::to_string(x.cols()) + " does not match model input width " +
                         std::to_string(model.input_width()));
  }
}

inline Matrix affine(const Matrix& h, const Matrix& w, const Vector& b) {
  Matrix z = matmul(h, w);
  for (std::size_t r = 0; r < z.rows(); ++r) {
    auto row = z.row(r);
    for (std::size_t j = 0; j < row.size(); ++j) row[j] += b[j];
  }
  return z;
}

}  // namespace detail

// Runs the first `upto` layers (all when upto == depth) on a row batch.
inline ForwardTrace forward_trace(const LayeredModel& model, const StructureMask& mask, const Matrix& x,
                                  std::size_t upto) {
  detail::require_inputs(model, x);
  mask.check_compatible(model);
  ForwardTrace t;
  const Matrix* h = &x;
  for (std::size_t i = 0; i < upto; ++i) {
    const Layer& l = model.layer(i);
    t.effective.push_back(effective_weight(model, mask, i));
    t.pre.push_back(detail::affine(*h, t.effective.back(), l.bias));
    Matrix out = t.pre.back();
    switch (l.activation) {
      case Activation::kIdentity: break;
      case Activation::kRelu:
        for (double& v : out.span()) v = v > 0.0 ? v : 0.0;
        break;
      default:
        for (double& v : out.span()) v = activate(l.activation, v);
    }
    t.post.push_back(std::move(out));
    h = &t.post.back();
  }
  return t;
}

// Predictions for every row of x (length = x.rows()).
inline Vector forward_batch(const LayeredModel& model, const StructureMask& mask, const Matrix& x) {
  ForwardTrace t = forward_trace(model, mask, x, model.depth());
  return Vector(std::vector<double>(t.post.back().span().begin(), t.post.back().span().end()));
}

inline double forward(const LayeredModel& model, const StructureMask& mask, const Vector& x) {
  const Matrix row(1, x.size(), x.values());
  return forward_batch(model, mask, row)[0];
}

// Decoder output from an already computed layer-s representation.
inline Matrix decode(const AutoencoderHead& head, const Matrix& hidden) {
  return detail::affine(hidden, head.weight, head.bias);
}

// Reconstructions of every row of x through the first s layers and the
// decoder. Uses the mask for the encoder layers.
inline Matrix reconstruct_batch(const LayeredModel& model, const StructureMask& mask, const Matrix& x) {
  if (!model.has_head()) throw ConfigError("model has no autoencoder head");
  ForwardTrace t = forward_trace(model, mask, x, model.head()->after_layer);
  return decode(*model.head(), t.post.back());
}

inline Vector reconstruct(const LayeredModel& model, const Vector& x) {
  const Matrix row(1, x.size(), x.values());
  const Matrix r = reconstruct_batch(model, StructureMask::full(model), row);
  return Vector(std::vector<double>(r.span().begin(), r.span().end()));
}

// Where an entry of the flattened parameter vector lives.
struct ParamIndex {
  enum class Kind { kWeight, kBias, kDecoderWeight, kDecoderBias };
  Kind kind = Kind::kWeight;
  std::size_t layer = 0;  // 0-based; unused for decoder entries
  std::size_t row = 0;
  std::size_t col = 0;
  bool operator==(const ParamIndex&) const = default;
};

// Concatenated parameter vector [w_k, vec(W_{k-1}), ..., vec(W_1)], then the
// biases in the same layer order, then the decoder's vec(W') and b'. vec()
// stacks columns.
struct FlatParams {
  Architecture arch;
  Vector values;
  std::vector<ParamIndex> index;

  std::size_t size() const { return values.size(); }
};

namespace detail {

template <typename Visit>
void for_each_parameter(const Architecture& arch, Visit&& visit) {
  using Kind = ParamIndex::Kind;
  const std::size_t k = arch.depth();
  for (std::size_t li = k; li-- > 0;) {
    const std::size_t rows = arch.fan_in(li), cols = arch.widths[li];
    for (std::size_t c = 0; c < cols; ++c)
      for (std::size_t r = 0; r < rows; ++r) visit(ParamIndex{Kind::kWeight, li, r, c});
  }
  for (std::size_t li = k; li-- > 0;)
    for (std::size_t j = 0; j < arch.widths[li]; ++j) visit(ParamIndex{Kind::kBias, li, j, 0});
  if (arch.autoencoder_depth > 0) {
    const std::size_t rows = arch.widths[arch.autoencoder_depth - 1], cols = arch.input_width;
    for (std::size_t c = 0; c < cols; ++c)
      for (std::size_t r = 0; r < rows; ++r) visit(ParamIndex{Kind::kDecoderWeight, 0, r, c});
    for (std::size_t j = 0; j < cols; ++j) visit(ParamIndex{Kind::kDecoderBias, 0, j, 0});
  }
}

}  // namespace detail

inline double& parameter_at(LayeredModel& m, const ParamIndex& p) {
  using Kind = ParamIndex::Kind;
  switch (p.kind) {
    case Kind::kWeight: return m.layer(p.layer).weight(p.row, p.col);
    case Kind::kBias: return m.layer(p.layer).bias[p.row];
    case Kind::kDecoderWeight: return m.head()->weight(p.row, p.col);
    case Kind::kDecoderBias: return m.head()->bias[p.row];
  }
  return m.layer(p.layer).weight(p.row, p.col);
}

inline double parameter_at(const LayeredModel& m, const ParamIndex& p) {
  return parameter_at(const_cast<LayeredModel&>(m), p);
}

// Mask bit of a parameter; biases and decoder entries are never masked.
inline bool parameter_active(const StructureMask& mask, const ParamIndex& p) {
  return p.kind != ParamIndex::Kind::kWeight || mask.gammas.at(p.layer)(p.row, p.col) != 0.0;
}

inline FlatParams flatten(const LayeredModel& model) {
  FlatParams fp;
  fp.arch = model.architecture();
  std::vector<double> values;
  values.reserve(model.parameter_count());
  detail::for_each_parameter(fp.arch, [&](const ParamIndex& p) {
    values.push_back(parameter_at(model, p));
    fp.index.push_back(p);
  });
  fp.values = Vector(std::move(values));
  return fp;
}

inline LayeredModel unflatten(const FlatParams& fp) {
  LayeredModel model(fp.arch);
  if (fp.values.size() != model.parameter_count()) {
    throw DimensionError("flat parameter vector has length " + std::to_string(fp.values.size()) + ", expected " +
                         std::to_string(model.parameter_count()));
  }
  std::size_t i = 0;
  detail::for_each_parameter(fp.arch, [&](const ParamIndex& p) { parameter_at(model, p) = fp.values[i++]; });
  return model;
}

// W <- W - lr * g on unmasked weights; biases and decoder always update.
inline void sgd_step(LayeredModel& model, const StructureMask& mask, const ModelGradient& grad,
                     double learning_rate) {
  if (!(learning_rate >= 0.0)) throw ConfigError("learning rate must be non-negative");
  mask.check_compatible(model);
  if (grad.depth() != model.depth() || grad.has_head() != model.has_head()) {
    throw DimensionError("gradient shape does not match model");
  }
  for (std::size_t i = 0; i < model.depth(); ++i) {
    Layer& l = model.layer(i);
    const Layer& g = grad.layer(i);
    require_same_shape(l.weight, g.weight, "sgd_step");
    auto w = l.weight.span();
    auto gw = g.weight.span();
    auto gamma = mask.gammas[i].span();
    for (std::size_t j = 0; j < w.size(); ++j)
      if (gamma[j] != 0.0) w[j] -= learning_rate * gw[j];
    for (std::size_t j = 0; j < l.bias.size(); ++j) l.bias[j] -= learning_rate * g.bias[j];
  }
  if (model.has_head()) {
    auto& h = *model.head();
    const auto& g = *grad.head();
    require_same_shape(h.weight, g.weight, "sgd_step decoder");
    auto w = h.weight.span();
    auto gw = g.weight.span();
    for (std::size_t j = 0; j < w.size(); ++j) w[j] -= learning_rate * gw[j];
    for (std::size_t j = 0; j < h.bias.size(); ++j) h.bias[j] -= learning_rate * g.bias[j];
  }
}

}  // namespace regsched
