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


// Structure search: evolves neuron-level masks over the hidden layers of a
// trained model to trade validation error against active parameter count.

#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "regsched/evolution.hpp"
#include "regsched/metrics.hpp"
#include "regsched/model.hpp"
#include "regsched/trainer.hpp"

namespace regsched {

// alive[i][j] is 1 when neuron j of hidden layer i (0-based) is kept.
struct NeuronMask {
  std::vector<std::vector<std::uint8_t>> alive;

  static NeuronMask all_alive(const LayeredModel& model) {
    NeuronMask m;
    for (std::size_t i = 0; i + 1 < model.depth(); ++i) m.alive.emplace_back(model.layer(i).outputs(), 1);
    return m;
  }

  std::size_t neuron_count() const {
    std::size_t n = 0;
    for (const auto& l : alive) n += l.size();
    return n;
  }

  bool has_dead_layer() const {
    for (const auto& l : alive) {
      bool any = false;
      for (auto b : l) any = any || b != 0;
      if (!any) return true;
    }
    return false;
  }

  BitGenome to_genome() const {
    BitGenome g;
    for (const auto& l : alive) g.bits.insert(g.bits.end(), l.begin(), l.end());
    return g;
  }

  static NeuronMask from_genome(const BitGenome& g, const LayeredModel& model) {
    NeuronMask m = all_alive(model);
    if (g.size() != m.neuron_count()) {
      throw GenomeError("neuron genome has " + std::to_string(g.size()) + " bits, model has " +
                        std::to_string(m.neuron_count()) + " hidden neurons");
    }
    std::size_t k = 0;
    for (auto& l : m.alive)
      for (auto& b : l) b = g.bits[k++];
    return m;
  }

  bool operator==(const NeuronMask&) const = default;
};

// Structure mask with every pruned neuron's incoming column and outgoing row
// zeroed, on top of `base`.
inline StructureMask expand(const NeuronMask& neurons, const LayeredModel& model, const StructureMask& base) {
  if (neurons.alive.size() + 1 != model.depth()) throw DimensionError("neuron mask depth does not match model");
  StructureMask out = base;
  for (std::size_t i = 0; i < neurons.alive.size(); ++i) {
    if (neurons.alive[i].size() != model.layer(i).outputs()) {
      throw DimensionError("neuron mask width does not match layer " + std::to_string(i + 1));
    }
    for (std::size_t j = 0; j < neurons.alive[i].size(); ++j) {
      if (neurons.alive[i][j]) continue;
      Matrix& in = out.gammas[i];
      for (std::size_t r = 0; r < in.rows(); ++r) in(r, j) = 0.0;
      auto row = out.gammas[i + 1].row(j);
      std::fill(row.begin(), row.end(), 0.0);
    }
  }
  return out;
}

inline StructureMask expand(const NeuronMask& neurons, const LayeredModel& model) {
  return expand(neurons, model, StructureMask::full(model));
}

struct NasObjective {
  double mu = 0.05;
  double lambda_layers = 0.0;  // weight of the layer-count penalty
};

// Validation MAE under the expanded mask + mu * active/total weights
// (+ lambda_layers * layers with an alive neuron). Dead layers are rejected.
inline double nas_fitness(const NeuronMask& neurons, const LayeredModel& model, const Batch& val,
                          const NasObjective& obj, const StructureMask& base) {
  if (!(obj.mu >= 0.0)) throw ConfigError("ga_nas.mu must be >= 0");
  if (neurons.has_dead_layer()) return std::numeric_limits<double>::infinity();
  const StructureMask mask = expand(neurons, model, base);
  if (mask.has_dead_layer()) return std::numeric_limits<double>::infinity();
  const double err = validation_mae(model, mask, val);
  const double ratio = static_cast<double>(complexity(mask)) / static_cast<double>(model.weight_count());
  double f = err + obj.mu * ratio;
  if (obj.lambda_layers > 0.0) f += obj.lambda_layers * static_cast<double>(model.depth());
  return f;
}

inline double nas_fitness(const NeuronMask& neurons, const LayeredModel& model, const Batch& val,
                          const NasObjective& obj) {
  return nas_fitness(neurons, model, val, obj, StructureMask::full(model));
}

// Variance of the approximation loss across consecutive validation
// mini-batches.
inline std::optional<double> batch_loss_variance(const LayeredModel& model, const StructureMask& mask,
                                                 const Batch& val, std::size_t batch_size) {
  const Vector f = forward_batch(model, mask, val.x);
  std::vector<double> losses;
  for (std::size_t start = 0; start + batch_size <= val.size(); start += batch_size) {
    double s = 0.0;
    for (std::size_t n = start; n < start + batch_size; ++n) s += (val.y[n] - f[n]) * (val.y[n] - f[n]);
    losses.push_back(s);
  }
  if (losses.size() < 2) return std::nullopt;
  return robustness(losses, losses.size());
}

struct PruneResult {
  NeuronMask best;
  StructureMask mask;
  double fitness = 0.0;
  std::vector<RunRecord> trajectory;  // one row per evaluated generation
};

inline constexpr double kInitialDropRate = 0.1;

// GA over neuron masks. Generation 0 holds the all-alive mask and p-1 copies
// with each bit dropped with probability 0.1.
// Pruning is applied on top of `base`, the mask the model was trained with.
inline PruneResult prune(const LayeredModel& model, const StructureMask& base, const Batch& val, const GAConfig& cfg,
                         const NasObjective& obj, std::size_t robustness_batch = 32) {
  cfg.validate("ga_nas");
  if (val.empty()) throw ConfigError("ga_nas: empty validation set");
  if (model.depth() < 2) throw ConfigError("ga_nas: model has no hidden neurons to prune");
  if (robustness_batch < 1) throw ConfigError("ga_nas.robustness_batch must be >= 1");
  base.check_compatible(model);
  const BitGenome full = NeuronMask::all_alive(model).to_genome();

  Rng rng = make_stream(cfg.rng_seed, {stream::kGaNas});
  std::vector<BitGenome> population{full};
  while (population.size() < cfg.population_size) {
    BitGenome g = full;
    for (auto& b : g.bits)
      if (uniform01(rng) < kInitialDropRate) b = 0;
    population.push_back(std::move(g));
  }

  auto fitness = [&](const BitGenome& g) {
    return nas_fitness(NeuronMask::from_genome(g, model), model, val, obj, base);
  };
  GAConfig run_cfg = cfg;
  run_cfg.rng_seed = splitmix64(cfg.rng_seed ^ stream::kGaNas);
  const auto run = run_ga(std::move(population), fitness, run_cfg);

  PruneResult out;
  out.best = NeuronMask::from_genome(run.best, model);
  out.mask = expand(out.best, model, base);
  out.fitness = run.best_fitness;
  for (const auto& h : run.history) {
    const StructureMask m = expand(NeuronMask::from_genome(h.best, model), model, base);
    out.trajectory.push_back(RunRecord{h.generation, h.best_fitness, validation_mae(model, m, val), complexity(m),
                                       batch_loss_variance(model, m, val, robustness_batch),
                                       parameter_variance(model, m)});
  }
  return out;
}

inline PruneResult prune(const LayeredModel& model, const Batch& val, const GAConfig& cfg, const NasObjective& obj,
                         std::size_t robustness_batch = 32) {
  return prune(model, StructureMask::full(model), val, cfg, obj, robustness_batch);
}

// Conventional bit-flip rate of one expected flip per genome.
inline double default_bit_mutation_rate(const LayeredModel& model) {
  const std::size_t m = NeuronMask::all_alive(model).neuron_count();
  return m == 0 ? 0.0 : 1.0 / static_cast<double>(m);
}

// generation,complexity,error,robustness
inline std::string trajectory_csv(std::span<const RunRecord> trajectory) {
  std::string out = "generation,complexity,error,robustness\n";
  for (const auto& r : trajectory) {
    out += std::to_string(r.iteration) + "," + std::to_string(r.complexity) + "," + nlohmann::json(r.val_MAE).dump() +
           "," + (r.robustness ? nlohmann::json(*r.robustness).dump() : std::string()) + "\n";
  }
  return out;
}

}  // namespace regsched
