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


// Metaparameter search interleaved with training. The T iterations are split
// into k equal segments; during segment i a population of candidate lambda
// vectors for layer i is evolved while the live model keeps training with the
// incumbent vector.

#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "regsched/evolution.hpp"
#include "regsched/parallel.hpp"
#include "regsched/regularizers.hpp"
#include "regsched/schedule.hpp"
#include "regsched/trainer.hpp"

namespace regsched {

enum class InitialPopulation {
  kDefault,  // one zero vector, the rest log-uniform in [1e-4, 1e1]
  kZeros,    // every candidate is the zero vector
};

struct GaRegOptions {
  GAConfig ga;
  std::size_t candidate_steps = 5;
  InitialPopulation initial = InitialPopulation::kDefault;
  // Explicit starting population; overrides `initial` when non-empty.
  std::vector<RealGenome> population;

  void validate() const {
    ga.validate("ga_reg");
    if (candidate_steps == 0) throw ConfigError("ga_reg.candidate_steps must be >= 1");
    for (const auto& g : population) {
      if (g.size() != kRegularizerCount) throw ConfigError("ga_reg.population vectors need 6 entries");
      for (double v : g.genes)
        if (!(v >= 0.0) || !std::isfinite(v)) throw ConfigError("ga_reg.population entries must be >= 0");
    }
  }
};

inline constexpr double kInitialLambdaLow = 1e-4;
inline constexpr double kInitialLambdaHigh = 1e1;

// One evaluated candidate (candidate >= 0) or the live vector in force after
// the acceptance decision (candidate == -1).
struct GaRegLogEntry {
  std::size_t iteration = 0;
  std::size_t layer = 0;  // 0-based
  long candidate = 0;
  LambdaMatrix::Row lambda{};
  double val_mae = 0.0;
  bool operator==(const GaRegLogEntry&) const = default;
};

struct GaRegResult {
  LambdaMatrix matrix;
  std::vector<GaRegLogEntry> log;
};

inline LambdaMatrix::Row to_row(const RealGenome& g) {
  LambdaMatrix::Row r{};
  std::copy(g.genes.begin(), g.genes.end(), r.begin());
  return r;
}

inline RealGenome to_genome(const LambdaMatrix::Row& r) { return RealGenome{{r.begin(), r.end()}}; }

inline std::vector<RealGenome> initial_lambda_population(const GaRegOptions& opts, Rng& rng) {
  if (!opts.population.empty()) return opts.population;
  const std::size_t p = opts.ga.population_size;
  std::vector<RealGenome> pop(p, RealGenome{std::vector<double>(kRegularizerCount, 0.0)});
  if (opts.initial == InitialPopulation::kZeros) return pop;
  std::uniform_real_distribution<double> log_gene(std::log(kInitialLambdaLow), std::log(kInitialLambdaHigh));
  for (std::size_t i = 1; i < p; ++i)
    for (double& v : pop[i].genes) v = std::exp(log_gene(rng));
  return pop;
}

// Validation MAE of a clone of `live` after `steps` updates with `lambdas`.
inline double score_candidate(const Trainer& live, const LambdaMatrix& lambdas, std::size_t steps, const Rng& batches) {
  Trainer clone = live;
  clone.set_recording(false);
  clone.reseed_batches(batches);
  for (std::size_t s = 0; s < steps; ++s) clone.step(lambdas);
  const double e = clone.validation_mae();
  return std::isfinite(e) ? e : std::numeric_limits<double>::infinity();
}

// Evolves the lambda vector of `layer` for `segment_iterations` live
// iterations and returns the incumbent. `base` supplies the other rows.
// A candidate replaces the incumbent only if its clone score is strictly
// below the incumbent's recorded score and no worse than the zero vector's.
inline LambdaMatrix::Row optimize_layer(Trainer& live, std::size_t layer, std::size_t segment_iterations,
                                        const GaRegOptions& opts, const LambdaMatrix& base,
                                        std::vector<GaRegLogEntry>* log = nullptr) {
  opts.validate();
  if (layer >= live.model().depth()) throw ConfigError("ga_reg: layer index outside model depth");
  if (segment_iterations == 0) throw ConfigError("ga_reg: segment needs at least one iteration");
  if (live.validation().empty()) throw ConfigError("ga_reg: empty validation set");

  const std::uint64_t seed = opts.ga.rng_seed;
  Rng init_rng = make_stream(seed, {stream::kGaReg, layer, 0xfffff});
  std::vector<RealGenome> population = initial_lambda_population(opts, init_rng);

  const std::size_t generations = std::min(std::max<std::size_t>(opts.ga.generations, 1), segment_iterations);
  const auto blocks = split_segments(segment_iterations, generations);

  LambdaMatrix::Row incumbent{};
  double incumbent_error = std::numeric_limits<double>::infinity();
  auto with_row = [&base, layer](const LambdaMatrix::Row& row) {
    LambdaMatrix m = base;
    m.set_row(layer, row);
    return m;
  };

  for (std::size_t g = 0; g < generations; ++g) {
    const Rng batches = make_stream(seed, {stream::kCandidate, layer, g});
    const LambdaMatrix::Row zero{};
    std::vector<double> scores(population.size() + 1);
    parallel_for(scores.size(), [&](std::size_t i) {
      const LambdaMatrix::Row row = i < population.size() ? to_row(population[i]) : zero;
      scores[i] = score_candidate(live, with_row(row), opts.candidate_steps, batches);
    });
    const double zero_score = scores.back();
    scores.pop_back();
    if (g == 0) incumbent_error = zero_score;

    const std::size_t best = rank_by_fitness(scores).front();
    if (scores[best] < incumbent_error && scores[best] <= zero_score) {
      incumbent = to_row(population[best]);
      incumbent_error = scores[best];
    }
    if (log) {
      for (std::size_t i = 0; i < population.size(); ++i) {
        log->push_back(GaRegLogEntry{live.iteration(), layer, static_cast<long>(i), to_row(population[i]), scores[i]});
      }
      log->push_back(GaRegLogEntry{live.iteration(), layer, -1, incumbent, incumbent_error});
    }

    const LambdaMatrix live_lambdas = with_row(incumbent);
    for (std::size_t t = blocks[g].begin; t < blocks[g].end; ++t) live.step(live_lambdas);

    Rng rng = make_stream(seed, {stream::kGaReg, layer, g});
    population = next_generation(population, scores, opts.ga, rng);
  }
  return incumbent;
}

// Trains `live` for T iterations while filling the k x 6 lambda matrix row by
// row. Rows of layers whose segments have not started stay zero.
inline GaRegResult run_ga_reg(Trainer& live, std::size_t T, const GaRegOptions& opts) {
  const std::size_t k = live.model().depth();
  if (T < k) throw ConfigError("ga_reg: T=" + std::to_string(T) + " must be >= k=" + std::to_string(k));
  GaRegResult out;
  out.matrix = LambdaMatrix(k, 0.0, 1.0);
  const auto segments = split_segments(T, k);
  for (std::size_t i = 0; i < k; ++i) {
    const LambdaMatrix::Row row = optimize_layer(live, i, segments[i].length(), opts, out.matrix, &out.log);
    out.matrix.set_row(i, row);
  }
  return out;
}

}  // namespace regsched
