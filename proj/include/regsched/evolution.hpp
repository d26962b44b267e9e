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


// Seeded genetic-algorithm engine shared by the metaparameter search and the
// structure search. Fitness is minimized.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <numeric>
#include <string>
#include <type_traits>
#include <variant>
#include <vector>

#include "regsched/errors.hpp"
#include "regsched/parallel.hpp"
#include "regsched/rng.hpp"

namespace regsched {

struct GAConfig {
  std::size_t population_size = 20;
  std::size_t generations = 15;
  double mutation_rate = 0.2;
  double crossover_rate = 0.7;
  std::size_t elite_count = 1;
  std::uint64_t rng_seed = 0;
  std::size_t tournament_size = 3;

  void validate(const std::string& where = "ga") const {
    if (population_size < 1) throw ConfigError(where + ".population_size must be >= 1");
    if (!(mutation_rate >= 0.0 && mutation_rate <= 1.0)) throw ConfigError(where + ".mutation_rate must be in [0, 1]");
    if (!(crossover_rate >= 0.0 && crossover_rate <= 1.0)) {
      throw ConfigError(where + ".crossover_rate must be in [0, 1]");
    }
    if (elite_count >= population_size && population_size > 1) {
      throw ConfigError(where + ".elite_count must be < population_size");
    }
    if (tournament_size < 1) throw ConfigError(where + ".tournament_size must be >= 1");
  }
};

// Non-negative real genes (a lambda vector).
struct RealGenome {
  std::vector<double> genes;
  std::size_t size() const { return genes.size(); }
  auto operator<=>(const RealGenome&) const = default;
};

// Binary genes (a neuron mask).
struct BitGenome {
  std::vector<std::uint8_t> bits;
  std::size_t size() const { return bits.size(); }
  auto operator<=>(const BitGenome&) const = default;
};

using Genome = std::variant<RealGenome, BitGenome>;

inline constexpr double kMutationLogSigma = 0.5;
inline constexpr double kMinGene = 1e-8;
inline constexpr double kMaxGene = 1e3;

// Each gene mutates with probability `rate`: real genes are scaled by
// exp(N(0, 0.5)) and clamped to [1e-8, 1e3]; a zero gene stays zero. Bits flip.
inline RealGenome mutate(RealGenome g, double rate, Rng& rng) {
  std::normal_distribution<double> step(0.0, kMutationLogSigma);
  for (double& v : g.genes) {
    if (uniform01(rng) >= rate) continue;
    const double factor = std::exp(step(rng));
    if (v != 0.0) v = std::clamp(v * factor, kMinGene, kMaxGene);
  }
  return g;
}

inline BitGenome mutate(BitGenome g, double rate, Rng& rng) {
  for (auto& b : g.bits)
    if (uniform01(rng) < rate) b = static_cast<std::uint8_t>(1 - b);
  return g;
}

inline Genome mutate(const Genome& g, double rate, Rng& rng) {
  return std::visit([&](const auto& v) -> Genome { return mutate(v, rate, rng); }, g);
}

namespace detail {
template <typename Seq>
void uniform_swap(Seq& a, Seq& b, Rng& rng) {
  if (a.size() != b.size()) {
    throw GenomeError("crossover of genomes with lengths " + std::to_string(a.size()) + " and " +
                      std::to_string(b.size()));
  }
  for (std::size_t i = 0; i < a.size(); ++i)
    if (uniform01(rng) < 0.5) std::swap(a[i], b[i]);
}
}  // namespace detail

// Uniform crossover: each position is swapped between the offspring with
// probability 1/2.
inline std::pair<RealGenome, RealGenome> crossover(RealGenome a, RealGenome b, Rng& rng) {
  detail::uniform_swap(a.genes, b.genes, rng);
  return {std::move(a), std::move(b)};
}

inline std::pair<BitGenome, BitGenome> crossover(BitGenome a, BitGenome b, Rng& rng) {
  detail::uniform_swap(a.bits, b.bits, rng);
  return {std::move(a), std::move(b)};
}

inline std::pair<Genome, Genome> crossover(const Genome& a, const Genome& b, Rng& rng) {
  if (a.index() != b.index()) throw GenomeError("crossover of a real genome with a bit genome");
  if (std::holds_alternative<RealGenome>(a)) {
    auto [x, y] = crossover(std::get<RealGenome>(a), std::get<RealGenome>(b), rng);
    return {Genome(std::move(x)), Genome(std::move(y))};
  }
  auto [x, y] = crossover(std::get<BitGenome>(a), std::get<BitGenome>(b), rng);
  return {Genome(std::move(x)), Genome(std::move(y))};
}

// Indices sorted by (fitness, index).
inline std::vector<std::size_t> rank_by_fitness(const std::vector<double>& fitness) {
  std::vector<std::size_t> order(fitness.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return fitness[a] < fitness[b]; });
  return order;
}

inline std::size_t tournament_select(const std::vector<double>& fitness, std::size_t size, Rng& rng) {
  std::uniform_int_distribution<std::size_t> pick(0, fitness.size() - 1);
  std::size_t best = pick(rng);
  for (std::size_t t = 1; t < size; ++t) {
    const std::size_t c = pick(rng);
    if (fitness[c] < fitness[best] || (fitness[c] == fitness[best] && c < best)) best = c;
  }
  return best;
}

// Fitness of every genome, evaluated in parallel.
template <typename G, typename Fitness>
std::vector<double> evaluate_population(const std::vector<G>& population, Fitness&& fitness) {
  std::vector<double> out(population.size());
  parallel_for(population.size(), [&](std::size_t i) { out[i] = fitness(population[i]); });
  return out;
}

// Elites carried over unchanged, then tournament -> crossover -> mutation.
template <typename G>
std::vector<G> next_generation(const std::vector<G>& population, const std::vector<double>& fitness,
                               const GAConfig& cfg, Rng& rng) {
  if (population.empty()) throw ConfigError("evolve: empty population");
  if (fitness.size() != population.size()) throw ConfigError("evolve: one fitness value per genome is required");
  const std::size_t p = population.size();
  std::vector<G> next;
  next.reserve(p);
  const auto order = rank_by_fitness(fitness);
  for (std::size_t e = 0; e < std::min(cfg.elite_count, p); ++e) next.push_back(population[order[e]]);
  while (next.size() < p) {
    G a = population[tournament_select(fitness, cfg.tournament_size, rng)];
    G b = population[tournament_select(fitness, cfg.tournament_size, rng)];
    if (uniform01(rng) < cfg.crossover_rate) std::tie(a, b) = crossover(std::move(a), std::move(b), rng);
    next.push_back(mutate(std::move(a), cfg.mutation_rate, rng));
    if (next.size() < p) next.push_back(mutate(std::move(b), cfg.mutation_rate, rng));
  }
  return next;
}

// One generation step with the generation's own RNG substream.
template <typename G, typename Fitness>
std::vector<G> evolve(const std::vector<G>& population, Fitness&& fitness, const GAConfig& cfg,
                      std::uint64_t generation = 0) {
  if (population.empty()) throw ConfigError("evolve: empty population");
  const auto values = evaluate_population(population, fitness);
  Rng rng = make_stream(cfg.rng_seed, {generation});
  return next_generation(population, values, cfg, rng);
}

template <typename G>
struct GenerationSummary {
  std::size_t generation = 0;
  G best;                 // best genome seen so far
  double best_fitness = 0.0;
  std::vector<double> fitness;  // this generation, by index
};

template <typename G>
struct GaRunResult {
  G best;
  double best_fitness = std::numeric_limits<double>::infinity();
  std::vector<G> final_population;
  std::vector<GenerationSummary<G>> history;  // generations 0..cfg.generations
};

// Evaluates generation 0 (the initial population) and cfg.generations
// offspring generations. Fitness must be a pure function of the genome; its
// values are memoized.
template <typename G, typename Fitness>
GaRunResult<G> run_ga(std::vector<G> population, Fitness&& fitness, const GAConfig& cfg) {
  if (population.empty()) throw ConfigError("run_ga: empty population");
  std::map<G, double> memo;
  GaRunResult<G> out;
  for (std::size_t gen = 0;; ++gen) {
    std::vector<std::size_t> pending;
    std::vector<double> values(population.size());
    for (std::size_t i = 0; i < population.size(); ++i) {
      auto it = memo.find(population[i]);
      if (it != memo.end()) values[i] = it->second;
      else pending.push_back(i);
    }
    std::vector<double> fresh(pending.size());
    parallel_for(pending.size(), [&](std::size_t j) { fresh[j] = fitness(population[pending[j]]); });
    for (std::size_t j = 0; j < pending.size(); ++j) {
      values[pending[j]] = fresh[j];
      memo.emplace(population[pending[j]], fresh[j]);
    }
    const std::size_t best = rank_by_fitness(values).front();
    if (gen == 0 || values[best] < out.best_fitness) {
      out.best = population[best];
      out.best_fitness = values[best];
    }
    out.history.push_back(GenerationSummary<G>{gen, out.best, out.best_fitness, values});
    if (gen == cfg.generations) break;
    Rng rng = make_stream(cfg.rng_seed, {gen});
    population = next_generation(population, values, cfg, rng);
  }
  out.final_population = std::move(population);
  return out;
}

}  // namespace regsched
