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


#include <cmath>

#include <gtest/gtest.h>

#include "regsched/data.hpp"
#include "regsched/ga_nas.hpp"
#include "regsched/ga_reg.hpp"
#include "support.hpp"

namespace regsched {
namespace {

class GaRegTest : public ::testing::Test {
 protected:
  Dataset data = synthesize(300, 6, 4);
  Architecture arch{6, {6, 4, 1}, {Activation::kRelu, Activation::kRelu, Activation::kIdentity}, 0};
  TrainOptions opts{1e-2, 16, 10};

  Trainer make(std::uint64_t seed = 7) {
    const LayeredModel m = init_model(arch, seed);
    return Trainer(data, m, StructureMask::full(m), opts, seed);
  }

  GaRegOptions options(std::uint64_t seed = 7) {
    GaRegOptions o;
    o.ga = GAConfig{6, 4, 0.3, 0.7, 1, seed, 3};
    o.candidate_steps = 3;
    return o;
  }
};

TEST_F(GaRegTest, ZeroPopulationReproducesBasicRunExactly) {
  Trainer basic = make();
  train_with_schedule(basic, basic_schedule(3, 60));
  Trainer seq = make();
  GaRegOptions o = options();
  o.initial = InitialPopulation::kZeros;
  const GaRegResult r = run_ga_reg(seq, 60, o);
  EXPECT_TRUE(r.matrix.regularizers_zero());
  EXPECT_EQ(seq.records(), basic.records());
  EXPECT_EQ(seq.model(), basic.model());
}

TEST_F(GaRegTest, LogShapeAndAcceptanceRule) {
  Trainer t = make();
  const GaRegOptions o = options();
  const GaRegResult r = run_ga_reg(t, 60, o);
  EXPECT_EQ(t.iteration(), 60u);
  EXPECT_EQ(r.log.size(), 3u * 4u * (o.ga.population_size + 1));
  for (std::size_t layer = 0; layer < 3; ++layer) {
    double previous = std::numeric_limits<double>::infinity();
    for (const auto& e : r.log) {
      if (e.layer != layer || e.candidate != -1) continue;
      // The incumbent error never increases within a layer.
      EXPECT_LE(e.val_mae, previous);
      previous = e.val_mae;
    }
  }
  // The final row of each layer is the last live row in the log.
  for (std::size_t layer = 0; layer < 3; ++layer) {
    LambdaMatrix::Row last{};
    for (const auto& e : r.log)
      if (e.layer == layer && e.candidate == -1) last = e.lambda;
    EXPECT_EQ(r.matrix.row(layer), last);
  }
}

TEST_F(GaRegTest, AcceptedRowsComeFromEvaluatedCandidates) {
  Trainer t = make();
  const GaRegResult r = run_ga_reg(t, 60, options(11));
  for (const auto& live : r.log) {
    if (live.candidate != -1) continue;
    bool zero = true;
    for (double v : live.lambda) zero = zero && v == 0.0;
    if (zero) continue;
    bool found = false;
    for (const auto& c : r.log)
      if (c.candidate >= 0 && c.layer == live.layer && c.lambda == live.lambda && c.val_mae == live.val_mae) found = true;
    EXPECT_TRUE(found);
  }
}

TEST_F(GaRegTest, DeterministicForSeed) {
  Trainer a = make(), b = make();
  const GaRegResult ra = run_ga_reg(a, 45, options());
  const GaRegResult rb = run_ga_reg(b, 45, options());
  EXPECT_EQ(ra.matrix, rb.matrix);
  EXPECT_EQ(ra.log, rb.log);
  EXPECT_EQ(a.records(), b.records());
}

TEST_F(GaRegTest, ScoringLeavesLiveTrainerUntouched) {
  Trainer t = make();
  const LayeredModel before = t.model();
  const double s1 = score_candidate(t, testing::uniform_lambdas(3, 0.1), 5, Rng(3));
  const double s2 = score_candidate(t, testing::uniform_lambdas(3, 0.1), 5, Rng(3));
  EXPECT_EQ(s1, s2);
  EXPECT_EQ(t.model(), before);
  EXPECT_EQ(t.iteration(), 0u);
  EXPECT_TRUE(t.records().empty());
}

TEST_F(GaRegTest, DefaultInitialPopulationShape) {
  GaRegOptions o = options();
  o.ga.population_size = 50;
  Rng rng(1);
  const auto pop = initial_lambda_population(o, rng);
  ASSERT_EQ(pop.size(), 50u);
  for (double v : pop[0].genes) EXPECT_EQ(v, 0.0);
  for (std::size_t i = 1; i < pop.size(); ++i) {
    ASSERT_EQ(pop[i].size(), kRegularizerCount);
    for (double v : pop[i].genes) {
      EXPECT_GE(v, kInitialLambdaLow);
      EXPECT_LE(v, kInitialLambdaHigh);
    }
  }
}

TEST_F(GaRegTest, InvalidOptions) {
  Trainer t = make();
  GaRegOptions o = options();
  EXPECT_THROW(run_ga_reg(t, 2, o), ConfigError);
  o.candidate_steps = 0;
  EXPECT_THROW(run_ga_reg(t, 30, o), ConfigError);
  o = options();
  o.population = {RealGenome{{1.0, 2.0}}};
  EXPECT_THROW(run_ga_reg(t, 30, o), ConfigError);
}

// Minimal-fitness neuron mask by enumerating every genome.
double exhaustive_minimum(const LayeredModel& model, const Batch& val, const NasObjective& obj) {
  const std::size_t m = NeuronMask::all_alive(model).neuron_count();
  double best = std::numeric_limits<double>::infinity();
  for (std::uint64_t code = 0; code < (1ull << m); ++code) {
    BitGenome g{std::vector<std::uint8_t>(m)};
    for (std::size_t b = 0; b < m; ++b) g.bits[b] = (code >> b) & 1u;
    best = std::min(best, nas_fitness(NeuronMask::from_genome(g, model), model, val, obj));
  }
  return best;
}

TEST(NeuronMaskType, GenomeRoundTripAndExpansion) {
  const LayeredModel m(Architecture{3, {4, 2, 1}, {Activation::kRelu, Activation::kRelu, Activation::kIdentity}, 0});
  NeuronMask n = NeuronMask::all_alive(m);
  EXPECT_EQ(n.neuron_count(), 6u);
  n.alive[0][1] = 0;
  n.alive[1][0] = 0;
  EXPECT_EQ(NeuronMask::from_genome(n.to_genome(), m), n);
  const StructureMask s = expand(n, m);
  for (std::size_t r = 0; r < 3; ++r) EXPECT_EQ(s.gammas[0](r, 1), 0.0);
  for (std::size_t c = 0; c < 2; ++c) EXPECT_EQ(s.gammas[1](1, c), 0.0);
  for (std::size_t r = 0; r < 4; ++r) EXPECT_EQ(s.gammas[1](r, 0), 0.0);
  EXPECT_EQ(s.gammas[2](0, 0), 0.0);
  // 22 weights in total. The first pruned neuron removes 3 + 2, the second
  // 4 + 1 with one entry shared between them.
  EXPECT_EQ(complexity(s), 13u);
  EXPECT_THROW(NeuronMask::from_genome(BitGenome{{1, 0}}, m), GenomeError);
}

TEST(NeuronMaskType, PrunedNeuronEqualsPhysicalRemoval) {
  std::mt19937_64 rng(2);
  LayeredModel m(Architecture{4, {5, 1}, {Activation::kTanh, Activation::kIdentity}, 0});
  m.layer(0).weight = testing::random_matrix(4, 5, rng);
  m.layer(0).bias = testing::random_vector(5, rng);
  m.layer(1).weight = testing::random_matrix(5, 1, rng);
  NeuronMask n = NeuronMask::all_alive(m);
  n.alive[0][2] = 0;
  // Remove neuron 2 by hand: a 4x4 hidden layer without that column.
  LayeredModel small(Architecture{4, {4, 1}, {Activation::kTanh, Activation::kIdentity}, 0});
  for (std::size_t c = 0, k = 0; c < 5; ++c) {
    if (c == 2) continue;
    for (std::size_t r = 0; r < 4; ++r) small.layer(0).weight(r, k) = m.layer(0).weight(r, c);
    small.layer(0).bias[k] = m.layer(0).bias[c];
    small.layer(1).weight(k, 0) = m.layer(1).weight(c, 0);
    ++k;
  }
  small.layer(1).bias = m.layer(1).bias;
  const Matrix x = testing::random_matrix(7, 4, rng);
  const Vector a = forward_batch(m, expand(n, m), x), b = forward_batch(small, StructureMask::full(small), x);
  for (std::size_t i = 0; i < 7; ++i) EXPECT_NEAR(a[i], b[i], 1e-12);
}

TEST(NasFitness, DeadLayerIsInfeasibleAndPenaltyIsLinearInMu) {
  const Dataset d = synthesize(200, 6, 1);
  const Batch val = d.batch(Split::kValidation);
  const LayeredModel m = init_model(Architecture{6, {4, 3, 1}, {Activation::kRelu, Activation::kRelu, Activation::kIdentity}, 0}, 1);
  NeuronMask n = NeuronMask::all_alive(m);
  const double f0 = nas_fitness(n, m, val, NasObjective{0.0, 0.0});
  EXPECT_DOUBLE_EQ(nas_fitness(n, m, val, NasObjective{0.05, 0.0}), f0 + 0.05);
  n.alive[1] = {0, 0, 0};
  EXPECT_TRUE(std::isinf(nas_fitness(n, m, val, NasObjective{})));
  EXPECT_THROW(nas_fitness(NeuronMask::all_alive(m), m, val, NasObjective{-1.0, 0.0}), ConfigError);
}

TEST(Prune, MatchesExhaustiveSearchOnSmallModels) {
  const Dataset d = synthesize(300, 6, 2);
  const Batch val = d.batch(Split::kValidation);
  const NasObjective obj{0.05, 0.0};
  int within = 0;
  const int seeds = 4;
  for (int seed = 0; seed < seeds; ++seed) {
    const Architecture a{6, {5, 4, 1}, {Activation::kRelu, Activation::kRelu, Activation::kIdentity}, 0};
    Trainer t(d, init_model(a, seed), StructureMask::full(init_model(a, seed)), TrainOptions{1e-2, 16, 10}, seed);
    train_with_schedule(t, basic_schedule(3, 200));
    const double best = exhaustive_minimum(t.model(), val, obj);
    const GAConfig cfg{20, 30, 1.0 / 9.0, 0.7, 1, static_cast<std::uint64_t>(seed), 3};
    const PruneResult r = prune(t.model(), val, cfg, obj);
    EXPECT_GE(r.fitness, best - 1e-12);
    within += r.fitness <= 1.05 * best;
  }
  EXPECT_GE(within, seeds - 1);
}

TEST(Prune, RemovesDeadNeurons) {
  // A trained two-neuron model is embedded in a four-neuron one whose extra
  // neurons 1 and 3 have no outgoing weight. Dropping them leaves the
  // predictions unchanged and lowers the complexity penalty, so no optimal
  // mask keeps them.
  const Dataset d = synthesize(300, 6, 3);
  const Batch val = d.batch(Split::kValidation);
  const Architecture small{6, {2, 1}, {Activation::kTanh, Activation::kIdentity}, 0};
  const LayeredModel init = init_model(small, 3);
  Trainer t(d, init, StructureMask::full(init), TrainOptions{1e-2, 16, 10}, 3);
  train_with_schedule(t, basic_schedule(2, 1500));
  const LayeredModel& trained = t.model();

  std::mt19937_64 rng(3);
  LayeredModel m(Architecture{6, {4, 1}, {Activation::kTanh, Activation::kIdentity}, 0});
  m.layer(0).weight = testing::random_matrix(6, 4, rng);
  for (std::size_t r = 0; r < 6; ++r) {
    m.layer(0).weight(r, 0) = trained.layer(0).weight(r, 0);
    m.layer(0).weight(r, 2) = trained.layer(0).weight(r, 1);
  }
  m.layer(0).bias = Vector{trained.layer(0).bias[0], 0.3, trained.layer(0).bias[1], -0.2};
  m.layer(1).weight = Matrix::from_rows({{trained.layer(1).weight(0, 0)}, {0.0}, {trained.layer(1).weight(1, 0)}, {0.0}});
  m.layer(1).bias = trained.layer(1).bias;

  const NasObjective obj{0.05, 0.0};
  const PruneResult r = prune(m, val, GAConfig{20, 30, 0.25, 0.7, 1, 1, 3}, obj);
  EXPECT_EQ(r.best.alive[0][1], 0);
  EXPECT_EQ(r.best.alive[0][3], 0);
  EXPECT_DOUBLE_EQ(r.fitness, exhaustive_minimum(m, val, obj));
  // Reviving a dead neuron changes no prediction.
  NeuronMask revived = r.best;
  revived.alive[0][1] = 1;
  EXPECT_EQ(forward_batch(m, expand(revived, m), val.x), forward_batch(m, r.mask, val.x));
}

TEST(Prune, TrajectoryAndBaseMask) {
  const Dataset d = synthesize(200, 6, 4);
  const Batch val = d.batch(Split::kValidation);
  const LayeredModel m = init_model(Architecture{6, {5, 4, 1}, {Activation::kRelu, Activation::kRelu, Activation::kIdentity}, 0}, 4);
  StructureMask base = StructureMask::full(m);
  base.gammas[0](0, 0) = 0.0;
  const GAConfig cfg{10, 8, 0.2, 0.7, 1, 4, 3};
  const PruneResult r = prune(m, base, val, cfg, NasObjective{}, 8);
  ASSERT_EQ(r.trajectory.size(), 9u);
  for (std::size_t g = 1; g < r.trajectory.size(); ++g) EXPECT_LE(r.trajectory[g].train_S, r.trajectory[g - 1].train_S);
  EXPECT_EQ(r.mask.gammas[0](0, 0), 0.0);
  for (std::size_t i = 0; i < base.gammas.size(); ++i)
    for (std::size_t j = 0; j < base.gammas[i].size(); ++j)
      if (base.gammas[i].span()[j] == 0.0) EXPECT_EQ(r.mask.gammas[i].span()[j], 0.0);
  const PruneResult again = prune(m, base, val, cfg, NasObjective{}, 8);
  EXPECT_EQ(again.best, r.best);
  EXPECT_EQ(again.trajectory, r.trajectory);
  const std::string csv = trajectory_csv(r.trajectory);
  EXPECT_EQ(csv.rfind("generation,complexity,error,robustness\n", 0), 0u);
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 10);
}

TEST(Prune, InvalidInputs) {
  const Dataset d = synthesize(200, 6, 5);
  const Batch val = d.batch(Split::kValidation);
  const LayeredModel flat(Architecture{6, {1}, {Activation::kIdentity}, 0});
  EXPECT_THROW(prune(flat, val, GAConfig{}, NasObjective{}), ConfigError);
  const LayeredModel m = init_model(Architecture{6, {3, 1}, {Activation::kRelu, Activation::kIdentity}, 0}, 1);
  EXPECT_THROW(prune(m, val, GAConfig{}, NasObjective{}, 0), ConfigError);
  EXPECT_DOUBLE_EQ(default_bit_mutation_rate(m), 1.0 / 3.0);
}

}  // namespace
}  // namespace regsched
