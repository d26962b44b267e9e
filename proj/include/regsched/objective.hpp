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


// Composite loss S = lambda_x E_x + lambda_y E_y + sum_ij lambda_ij R_ij and
// its analytic gradient. Regularizers see the masked weights Gamma (*) W.

#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "regsched/core_math.hpp"
#include "regsched/metrics.hpp"
#include "regsched/model.hpp"
#include "regsched/regularizers.hpp"

namespace regsched {

struct LossBreakdown {
  double S = 0.0;
  double Ex = 0.0;
  double Ey = 0.0;
  std::vector<LambdaMatrix::Row> R;  // R[layer][regularizer]
};

// Optional per-layer reference weights w0 for the lasso and ridge terms.
using ReferenceWeights = std::vector<Matrix>;

namespace detail {

inline void check_objective_inputs(const LayeredModel& model, const StructureMask& mask, const Batch& batch,
                                   const LambdaMatrix& lambdas, const ReferenceWeights* reference) {
  if (batch.empty()) throw SizeError("empty batch");
  if (batch.x.rows() != batch.y.size()) throw DimensionError("batch inputs and targets differ in length");
  mask.check_compatible(model);
  if (lambdas.layers() != model.depth()) {
    throw DimensionError("lambda matrix has " + std::to_string(lambdas.layers()) + " rows, model has " +
                         std::to_string(model.depth()) + " layers");
  }
  if (reference != nullptr && reference->size() != model.depth()) {
    throw DimensionError("reference weights must provide one matrix per layer");
  }
}

inline const Matrix* reference_for(const ReferenceWeights* reference, std::size_t layer) {
  return reference == nullptr ? nullptr : &(*reference)[layer];
}

inline bool uses_reconstruction(const LayeredModel& model, const LambdaMatrix& lambdas) {
  return model.has_head() && lambdas.lambda_x() > 0.0;
}

}  // namespace detail

// Weighted regularizer sum for the given effective weights.
inline double regularization_term(const std::vector<Matrix>& effective, const LambdaMatrix& lambdas,
                                  std::vector<LambdaMatrix::Row>* values = nullptr,
                                  const ReferenceWeights* reference = nullptr) {
  const std::size_t k = effective.size();
  double total = 0.0;
  if (values) values->assign(k, LambdaMatrix::Row{});
  for (std::size_t i = 0; i < k; ++i) {
    for (Regularizer r : kAllRegularizers) {
      const double lam = lambdas.at(i, r);
      if (!regularizer_applicable(r, effective[i])) {
        if (lam > 0.0) reg_value(r, effective[i], k);  // throws the dimension error
        continue;
      }
      if (lam == 0.0 && values == nullptr) continue;
      const double v = reg_value(r, effective[i], k, detail::reference_for(reference, i));
      if (values) (*values)[i][index_of(r)] = v;
      total += lam * v;
    }
  }
  return total;
}

inline LossBreakdown composite_loss(const LayeredModel& model, const StructureMask& mask, const Batch& batch,
                                    const LambdaMatrix& lambdas, const ReferenceWeights* reference = nullptr) {
  detail::check_objective_inputs(model, mask, batch, lambdas, reference);
  const ForwardTrace trace = forward_trace(model, mask, batch.x, model.depth());
  LossBreakdown out;
  out.Ey = sum_squared_residuals(trace.post.back().span(), batch.y.span());
  if (detail::uses_reconstruction(model, lambdas)) {
    const Matrix r = decode(*model.head(), trace.post[model.head()->after_layer - 1]);
    out.Ex = sum_squared_residuals(r.span(), batch.x.span());
  }
  const double reg = regularization_term(trace.effective, lambdas, &out.R, reference);
  out.S = lambdas.lambda_x() * out.Ex + lambdas.lambda_y() * out.Ey + reg;
  return out;
}

// Only S, skipping the per-regularizer table for zero weights.
inline double composite_loss_value(const LayeredModel& model, const StructureMask& mask, const Batch& batch,
                                   const LambdaMatrix& lambdas, const ReferenceWeights* reference = nullptr) {
  detail::check_objective_inputs(model, mask, batch, lambdas, reference);
  const ForwardTrace trace = forward_trace(model, mask, batch.x, model.depth());
  double s = lambdas.lambda_y() * sum_squared_residuals(trace.post.back().span(), batch.y.span());
  if (detail::uses_reconstruction(model, lambdas)) {
    const Matrix r = decode(*model.head(), trace.post[model.head()->after_layer - 1]);
    s += lambdas.lambda_x() * sum_squared_residuals(r.span(), batch.x.span());
  }
  return s + regularization_term(trace.effective, lambdas, nullptr, reference);
}

// Gradient of composite_loss with respect to every model parameter. Masked
// weights receive exactly zero.
inline ModelGradient backward(const LayeredModel& model, const StructureMask& mask, const Batch& batch,
                              const LambdaMatrix& lambdas, const ReferenceWeights* reference = nullptr) {
  detail::check_objective_inputs(model, mask, batch, lambdas, reference);
  const std::size_t k = model.depth();
  const ForwardTrace trace = forward_trace(model, mask, batch.x, k);
  ModelGradient grad(model.architecture());

  // dS/df = 2 lambda_y (f - y)
  Matrix upstream(batch.size(), 1);
  {
    const auto f = trace.post.back().span();
    for (std::size_t n = 0; n < batch.size(); ++n) upstream(n, 0) = 2.0 * lambdas.lambda_y() * (f[n] - batch.y[n]);
  }

  const bool recon = detail::uses_reconstruction(model, lambdas);
  const std::size_t s = model.has_head() ? model.head()->after_layer : 0;

  for (std::size_t i = k; i-- > 0;) {
    if (recon && i + 1 == s) {
      const AutoencoderHead& head = *model.head();
      Matrix d_recon = decode(head, trace.post[i]);
      {
        auto d = d_recon.span();
        auto x = batch.x.span();
        for (std::size_t j = 0; j < d.size(); ++j) d[j] = 2.0 * lambdas.lambda_x() * (d[j] - x[j]);
      }
      auto& gh = *grad.head();
      gh.weight = matmul_tn(trace.post[i], d_recon);
      for (std::size_t n = 0; n < d_recon.rows(); ++n) {
        auto row = d_recon.row(n);
        for (std::size_t j = 0; j < row.size(); ++j) gh.bias[j] += row[j];
      }
      upstream = upstream + matmul_nt(d_recon, head.weight);
    }

    const Layer& layer = model.layer(i);
    Matrix dz = std::move(upstream);
    if (layer.activation != Activation::kIdentity) {
      auto d = dz.span();
      auto z = trace.pre[i].span();
      auto h = trace.post[i].span();
      for (std::size_t j = 0; j < d.size(); ++j) d[j] *= activation_slope(layer.activation, z[j], h[j]);
    }
    const Matrix& input = i == 0 ? batch.x : trace.post[i - 1];
    Matrix gw = matmul_tn(input, dz);
    for (Regularizer r : kAllRegularizers) {
      const double lam = lambdas.at(i, r);
      if (lam == 0.0 || r == Regularizer::kLayers) continue;
      axpy(lam, reg_grad(r, trace.effective[i], k, detail::reference_for(reference, i)), gw);
    }
    grad.layer(i).weight = hadamard(gw, mask.gammas[i]);
    for (std::size_t n = 0; n < dz.rows(); ++n) {
      auto row = dz.row(n);
      for (std::size_t j = 0; j < row.size(); ++j) grad.layer(i).bias[j] += row[j];
    }
    if (i > 0) upstream = matmul_nt(dz, trace.effective[i]);
  }
  return grad;
}

}  // namespace regsched
