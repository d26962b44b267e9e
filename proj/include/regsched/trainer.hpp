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


// Mini-batch gradient descent on the composite loss with per-iteration run
// records.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <numeric>
#include <vector>

#include "regsched/data.hpp"
#include "regsched/metrics.hpp"
#include "regsched/model.hpp"
#include "regsched/objective.hpp"
#include "regsched/rng.hpp"
#include "regsched/schedule.hpp"

namespace regsched {

struct TrainOptions {
  double learning_rate = 1e-2;
  std::size_t batch_size = 32;
  std::size_t robustness_window = 50;

  void validate() const {
    if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) throw ConfigError("learning_rate must be > 0");
    if (batch_size == 0) throw ConfigError("batch_size must be positive");
    if (robustness_window < 2) throw ConfigError("robustness_window must be >= 2");
  }
};

// Epoch-wise shuffled mini-batches over a fixed index set.
class BatchSampler {
 public:
  BatchSampler() = default;
  BatchSampler(std::vector<std::size_t> indices, std::size_t batch_size, Rng rng)
      : indices_(std::move(indices)), batch_size_(std::min(batch_size, indices_.size())), rng_(std::move(rng)) {
    if (indices_.empty()) throw SizeError("batch sampler over an empty index set");
    reshuffle();
  }

  std::vector<std::size_t> next() {
    std::vector<std::size_t> rows;
    rows.reserve(batch_size_);
    while (rows.size() < batch_size_) {
      if (pos_ == order_.size()) reshuffle();
      rows.push_back(order_[pos_++]);
    }
    return rows;
  }

 private:
  void reshuffle() {
    order_ = indices_;
    std::shuffle(order_.begin(), order_.end(), rng_);
    pos_ = 0;
  }

  std::vector<std::size_t> indices_;
  std::size_t batch_size_ = 1;
  Rng rng_;
  std::vector<std::size_t> order_;
  std::size_t pos_ = 0;
};

struct Evaluation {
  double S = 0.0;
  double mae = 0.0;
};

// S and MAE from a single forward pass.
inline Evaluation evaluate(const LayeredModel& model, const StructureMask& mask, const Batch& batch,
                           const LambdaMatrix& lambdas) {
  const ForwardTrace trace = forward_trace(model, mask, batch.x, model.depth());
  const auto f = trace.post.back().span();
  Evaluation e;
  e.mae = mae(f, batch.y.span());
  e.S = lambdas.lambda_y() * sum_squared_residuals(f, batch.y.span());
  if (model.has_head() && lambdas.lambda_x() > 0.0) {
    const Matrix r = decode(*model.head(), trace.post[model.head()->after_layer - 1]);
    e.S += lambdas.lambda_x() * sum_squared_residuals(r.span(), batch.x.span());
  }
  e.S += regularization_term(trace.effective, lambdas);
  return e;
}

inline double validation_mae(const LayeredModel& model, const StructureMask& mask, const Batch& val) {
  return mae(forward_batch(model, mask, val.x).span(), val.y.span());
}

// Owns a model, its mask, and the mini-batch stream. Copies are independent
// clones (used to score candidate metaparameters without touching the live
// run).
class Trainer {
 public:
  Trainer(const Dataset& data, LayeredModel model, StructureMask mask, TrainOptions opts, std::uint64_t seed)
      : data_(&data),
        val_(std::make_shared<const Batch>(data.batch(Split::kValidation))),
        model_(std::move(model)),
        mask_(std::move(mask)),
        opts_(opts),
        sampler_(data.train, opts.batch_size, make_stream(seed, {stream::kBatches})) {
    opts_.validate();
    mask_.check_compatible(model_);
    if (val_->empty()) throw ConfigError("validation split is empty");
  }

  // One gradient step. Appends a RunRecord when recording is on.
  void step(const LambdaMatrix& lambdas) {
    const Batch batch = data_->gather(sampler_.next());
    const ModelGradient grad = backward(model_, mask_, batch, lambdas);
    const double train_s = composite_loss_value(model_, mask_, batch, lambdas);
    // S sums over the batch; the step uses its per-sample average.
    sgd_step(model_, mask_, grad, opts_.learning_rate / static_cast<double>(batch.size()));
    if (!std::isfinite(train_s)) throw NumericError("training diverged at iteration " + std::to_string(iteration_));
    if (recording_) {
      const Evaluation ev = evaluate(model_, mask_, *val_, lambdas);
      if (!std::isfinite(ev.S)) throw NumericError("validation loss diverged at iteration " + std::to_string(iteration_));
      val_history_.push_back(ev.S);
      records_.push_back(RunRecord{iteration_, train_s, ev.mae, complexity(mask_),
                                   robustness(val_history_, opts_.robustness_window),
                                   parameter_variance(model_, mask_)});
    }
    ++iteration_;
  }

  // Replaces the mini-batch stream (candidate clones draw from their own).
  void reseed_batches(Rng rng) { sampler_ = BatchSampler(data_->train, opts_.batch_size, std::move(rng)); }

  void set_recording(bool on) { recording_ = on; }

  double validation_mae() const { return regsched::validation_mae(model_, mask_, *val_); }

  const LayeredModel& model() const { return model_; }
  LayeredModel& model() { return model_; }
  const StructureMask& mask() const { return mask_; }
  const Batch& validation() const { return *val_; }
  const Dataset& data() const { return *data_; }
  const TrainOptions& options() const { return opts_; }
  std::size_t iteration() const { return iteration_; }
  const std::vector<RunRecord>& records() const { return records_; }
  std::vector<RunRecord> take_records() { return std::move(records_); }

 private:
  const Dataset* data_;
  std::shared_ptr<const Batch> val_;
  LayeredModel model_;
  StructureMask mask_;
  TrainOptions opts_;
  BatchSampler sampler_;
  std::size_t iteration_ = 0;
  bool recording_ = true;
  std::vector<double> val_history_;
  std::vector<RunRecord> records_;
};

// Runs a full schedule (expert pretraining first, when present).
inline void train_with_schedule(Trainer& trainer, const ScheduleSpec& spec) {
  spec.validate();
  if (spec.mode == ScheduleMode::kExpert) {
    const LambdaMatrix pre = expert_pretrain_lambda(spec);
    for (std::size_t t = 0; t < spec.pretrain_iterations; ++t) trainer.step(pre);
  }
  for (std::size_t t = 0; t < spec.iterations; ++t) trainer.step(resolve_lambda(spec, t));
}

}  // namespace regsched
