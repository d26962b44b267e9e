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


// Config-driven experiment runner: trains models under any schedule mode,
// runs the regularization and structure searches, compares modes across
// seeds and emits plot-ready CSV data. Every output is a pure function of the
// config and seeds, and every file is replaced atomically.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include <nlohmann/json.hpp>

#include "regsched/checkpoint.hpp"
#include "regsched/data.hpp"
#include "regsched/ga_nas.hpp"
#include "regsched/ga_reg.hpp"
#include "regsched/metrics.hpp"
#include "regsched/parallel.hpp"
#include "regsched/schedule.hpp"
#include "regsched/trainer.hpp"

namespace regsched {

namespace fs = std::filesystem;
using nlohmann::json;

// ---------------------------------------------------------------------------
// File helpers

// Writes to a sibling temporary file and renames it over `path`.
inline void write_file_atomic(const fs::path& path, const std::string& content) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot open " + tmp.string() + " for writing");
    out << content;
    out.flush();
    if (!out) throw Error("failed writing " + tmp.string());
  }
  fs::rename(tmp, path);
}

inline std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline json read_json_file(const fs::path& path) {
  try {
    return json::parse(read_file(path));
  } catch (const json::parse_error& e) {
    throw SchemaError(path.string() + ": " + e.what());
  }
}

// Shortest round-trip decimal form of a double ("null" for non-finite).
inline std::string fmt(double v) { return json(v).dump(); }

// ---------------------------------------------------------------------------
// Config

struct DatasetSpec {
  std::string name = "synthetic";
  std::string source = "synthetic";  // "synthetic" or a CSV path
  std::string target;                 // CSV target column
  std::size_t objects = 10000;        // synthetic only
  std::size_t features = 30;          // synthetic only

  bool synthetic() const { return source == "synthetic"; }
};

struct ArchitectureSpec {
  std::vector<std::size_t> hidden{32, 16, 8};
  std::vector<Activation> activations{Activation::kRelu};  // one entry, or one per hidden layer
  std::size_t autoencoder_depth = 1;

  std::size_t depth() const { return hidden.size() + 1; }

  // Hidden layers followed by a linear scalar output layer.
  Architecture build(std::size_t input_width) const {
    Architecture a;
    a.input_width = input_width;
    a.widths = hidden;
    a.widths.push_back(1);
    for (std::size_t i = 0; i < hidden.size(); ++i) {
      a.activations.push_back(activations.size() == 1 ? activations.front() : activations.at(i));
    }
    a.activations.push_back(Activation::kIdentity);
    a.autoencoder_depth = autoencoder_depth;
    return a;
  }
};

struct GaNasSettings {
  GAConfig ga{20, 100, 0.0, 0.7, 1, 0, 3};
  bool auto_mutation_rate = true;  // one expected bit flip per genome
  NasObjective objective;
  double fine_tune_fraction = 0.1;
  std::size_t robustness_batch = 32;
  std::optional<std::string> checkpoint;
};

struct ExperimentConfig {
  std::vector<DatasetSpec> datasets{DatasetSpec{}};
  ArchitectureSpec architecture;
  std::size_t iterations = 3000;
  std::vector<ScheduleMode> modes{ScheduleMode::kBasic};
  TrainOptions training;
  std::vector<std::uint64_t> seeds{1};
  std::optional<LambdaMatrix> lambda_matrix;
  std::optional<std::size_t> pretrain_iterations;
  GaRegOptions ga_reg;
  GaNasSettings ga_nas;
  fs::path output_dir = "runs";

  std::size_t fine_tune_iterations() const {
    return static_cast<std::size_t>(std::llround(ga_nas.fine_tune_fraction * static_cast<double>(iterations)));
  }

  bool has_mode(ScheduleMode m) const { return std::find(modes.begin(), modes.end(), m) != modes.end(); }

  // Checks every constraint of the referenced modules before any work runs.
  void validate() const {
    if (datasets.empty()) throw ConfigError("datasets: at least one dataset is required");
    std::set<std::string> names;
    for (std::size_t i = 0; i < datasets.size(); ++i) {
      const DatasetSpec& d = datasets[i];
      const std::string where = "datasets[" + std::to_string(i) + "]";
      if (d.name.empty() || d.name.find_first_of("/\\") != std::string::npos || d.name == "." || d.name == "..") {
        throw ConfigError(where + ".name: must be a non-empty plain file name");
      }
      if (!names.insert(d.name).second) throw ConfigError(where + ".name: duplicate dataset name '" + d.name + "'");
      if (d.synthetic()) {
        if (d.objects < 100) throw ConfigError(where + ".objects: must be >= 100");
        if (d.features < 6) throw ConfigError(where + ".features: must be >= 6");
      } else if (d.target.empty()) {
        throw ConfigError(where + ".target: required for CSV datasets");
      }
    }
    if (architecture.hidden.empty()) throw ConfigError("architecture.hidden: at least one hidden layer is required");
    for (std::size_t w : architecture.hidden)
      if (w == 0) throw ConfigError("architecture.hidden: widths must be positive");
    if (architecture.activations.size() != 1 && architecture.activations.size() != architecture.hidden.size()) {
      throw ConfigError("architecture.activations: give one activation or one per hidden layer");
    }
    if (architecture.autoencoder_depth >= architecture.depth()) {
      throw ConfigError("architecture.autoencoder_depth: must be < number of layers (" +
                        std::to_string(architecture.depth()) + ")");
    }
    const std::size_t k = architecture.depth();
    if (iterations < k) throw ConfigError("iterations: must be >= number of layers (" + std::to_string(k) + ")");
    if (modes.empty()) throw ConfigError("modes: at least one schedule mode is required");
    try {
      training.validate();
    } catch (const ConfigError& e) {
      throw ConfigError(std::string("training.") + e.what());
    }
    if (seeds.empty()) throw ConfigError("seeds: at least one seed is required");
    if (has_mode(ScheduleMode::kStatic) && !lambda_matrix) {
      throw ConfigError("lambda_matrix: required when mode 'static' is listed");
    }
    if (lambda_matrix && lambda_matrix->layers() != k) {
      throw ConfigError("lambda_matrix: expected " + std::to_string(k) + " rows, one per layer");
    }
    if (pretrain_iterations && !has_mode(ScheduleMode::kExpert)) {
      throw ConfigError("expert.pretrain_iterations: set but mode 'expert' is not listed");
    }
    ga_reg.validate();
    ga_nas.ga.validate("ga_nas");
    if (!(ga_nas.objective.mu >= 0.0) || !std::isfinite(ga_nas.objective.mu)) {
      throw ConfigError("ga_nas.mu: must be >= 0");
    }
    if (!(ga_nas.objective.lambda_layers >= 0.0)) throw ConfigError("ga_nas.lambda_layers: must be >= 0");
    if (!(ga_nas.fine_tune_fraction >= 0.0 && ga_nas.fine_tune_fraction <= 1.0)) {
      throw ConfigError("ga_nas.fine_tune_fraction: must be in [0, 1]");
    }
    if (ga_nas.robustness_batch < 1) throw ConfigError("ga_nas.robustness_batch: must be >= 1");
    if (ga_nas.checkpoint && (datasets.size() != 1 || seeds.size() != 1)) {
      throw ConfigError("ga_nas.checkpoint: an explicit checkpoint needs exactly one dataset and one seed");
    }
    // Full shape check on a representative input width.
    architecture.build(1).validate();
  }
};

namespace detail {

// Reads fields of one JSON object, tracking the dotted path for diagnostics
// and rejecting unknown keys.
class FieldReader {
 public:
  FieldReader(const json& obj, std::string path) : obj_(obj), path_(std::move(path)) {
    if (!obj.is_object()) throw ConfigError(label() + ": expected an object");
  }

  std::string at(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

  const json* raw(const std::string& key) {
    seen_.insert(key);
    auto it = obj_.find(key);
    if (it == obj_.end() || it->is_null()) return nullptr;
    return &*it;
  }

  std::optional<std::size_t> count(const std::string& key) {
    const json* v = raw(key);
    if (!v) return std::nullopt;
    return as_count(*v, at(key));
  }

  std::optional<double> real(const std::string& key) {
    const json* v = raw(key);
    if (!v) return std::nullopt;
    if (!v->is_number()) throw ConfigError(at(key) + ": expected a number");
    return v->get<double>();
  }

  std::optional<std::string> text(const std::string& key) {
    const json* v = raw(key);
    if (!v) return std::nullopt;
    if (!v->is_string()) throw ConfigError(at(key) + ": expected a string");
    return v->get<std::string>();
  }

  void finish() const {
    for (auto it = obj_.begin(); it != obj_.end(); ++it) {
      if (!seen_.count(it.key())) throw ConfigError(at(it.key()) + ": unknown field");
    }
  }

  static std::size_t as_count(const json& v, const std::string& where) {
    if (v.is_number_integer()) {
      if (v.get<std::int64_t>() < 0 && !v.is_number_unsigned()) throw ConfigError(where + ": must be >= 0");
      return v.get<std::size_t>();
    }
    throw ConfigError(where + ": expected a non-negative integer");
  }

 private:
  std::string label() const { return path_.empty() ? "config" : path_; }

  const json& obj_;
  std::string path_;
  std::set<std::string> seen_;
};

inline ScheduleMode parse_mode(const json& v, const std::string& where) {
  if (!v.is_string()) throw ConfigError(where + ": expected a mode name");
  try {
    return schedule_mode_from_name(v.get<std::string>());
  } catch (const ConfigError& e) {
    throw ConfigError(where + ": " + e.what());
  }
}

inline Activation parse_activation(const json& v, const std::string& where) {
  if (!v.is_string()) throw ConfigError(where + ": expected an activation name");
  try {
    return activation_from_name(v.get<std::string>());
  } catch (const ConfigError& e) {
    throw ConfigError(where + ": " + e.what());
  }
}

inline DatasetSpec parse_dataset(const json& j, const std::string& where) {
  FieldReader r(j, where);
  DatasetSpec d;
  if (auto v = r.text("source")) d.source = *v;
  d.name = r.text("name").value_or(d.synthetic() ? "synthetic" : fs::path(d.source).stem().string());
  if (auto v = r.text("target")) d.target = *v;
  if (auto v = r.count("objects")) d.objects = *v;
  if (auto v = r.count("features")) d.features = *v;
  r.finish();
  return d;
}

inline void parse_ga(FieldReader& r, GAConfig& g) {
  if (auto v = r.count("population_size")) g.population_size = *v;
  if (auto v = r.count("generations")) g.generations = *v;
  if (auto v = r.real("crossover_rate")) g.crossover_rate = *v;
  if (auto v = r.count("elite_count")) g.elite_count = *v;
  if (auto v = r.count("tournament_size")) g.tournament_size = *v;
}

inline std::vector<double> parse_reals(const json& v, const std::string& where) {
  if (!v.is_array()) throw ConfigError(where + ": expected an array of numbers");
  std::vector<double> out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!v[i].is_number()) throw ConfigError(where + "[" + std::to_string(i) + "]: expected a number");
    out.push_back(v[i].get<double>());
  }
  return out;
}

inline LambdaMatrix parse_lambda_matrix(const json& j, const std::string& where) {
  const json* rows = &j;
  double lx = 0.0, ly = 1.0;
  std::optional<FieldReader> r;
  if (j.is_object()) {
    r.emplace(j, where);
    rows = r->raw("rows");
    if (!rows) throw ConfigError(where + ".rows: required");
    lx = r->real("lambda_x").value_or(lx);
    ly = r->real("lambda_y").value_or(ly);
    r->finish();
  }
  const std::string rows_where = j.is_object() ? where + ".rows" : where;
  if (!rows->is_array() || rows->empty()) throw ConfigError(rows_where + ": expected a non-empty array of rows");
  try {
    LambdaMatrix m(rows->size(), lx, ly);
    for (std::size_t i = 0; i < rows->size(); ++i) {
      const std::string rw = rows_where + "[" + std::to_string(i) + "]";
      const auto vals = parse_reals((*rows)[i], rw);
      if (vals.size() != kRegularizerCount) {
        throw ConfigError(rw + ": expected " + std::to_string(kRegularizerCount) + " weights");
      }
      for (double v : vals)
        if (!(v >= 0.0) || !std::isfinite(v)) throw ConfigError(rw + ": weights must be finite and >= 0");
      m.set_row(i, vals);
    }
    return m;
  } catch (const ConfigError& e) {
    const std::string msg = e.what();
    if (msg.rfind(where, 0) == 0) throw;
    throw ConfigError(where + ": " + msg);
  }
}

}  // namespace detail

inline ExperimentConfig parse_config(const json& j) {
  using detail::FieldReader;
  ExperimentConfig cfg;
  FieldReader r(j, "");

  const json* ds = r.raw("datasets");
  const json* one = r.raw("dataset");
  if (ds && one) throw ConfigError("dataset: give either 'dataset' or 'datasets', not both");
  if (ds) {
    if (!ds->is_array()) throw ConfigError("datasets: expected an array");
    cfg.datasets.clear();
    for (std::size_t i = 0; i < ds->size(); ++i) {
      cfg.datasets.push_back(detail::parse_dataset((*ds)[i], "datasets[" + std::to_string(i) + "]"));
    }
  } else if (one) {
    cfg.datasets = {one->is_string() ? detail::parse_dataset(json{{"source", *one}}, "dataset")
                                     : detail::parse_dataset(*one, "dataset")};
  }

  if (const json* a = r.raw("architecture")) {
    FieldReader ar(*a, "architecture");
    if (const json* h = ar.raw("hidden")) {
      if (!h->is_array()) throw ConfigError("architecture.hidden: expected an array of widths");
      cfg.architecture.hidden.clear();
      for (std::size_t i = 0; i < h->size(); ++i) {
        cfg.architecture.hidden.push_back(
            FieldReader::as_count((*h)[i], "architecture.hidden[" + std::to_string(i) + "]"));
      }
    }
    const json* act = ar.raw("activation");
    const json* acts = ar.raw("activations");
    if (act && acts) throw ConfigError("architecture.activation: give either 'activation' or 'activations'");
    if (act) cfg.architecture.activations = {detail::parse_activation(*act, "architecture.activation")};
    if (acts) {
      if (!acts->is_array()) throw ConfigError("architecture.activations: expected an array");
      cfg.architecture.activations.clear();
      for (std::size_t i = 0; i < acts->size(); ++i) {
        cfg.architecture.activations.push_back(
            detail::parse_activation((*acts)[i], "architecture.activations[" + std::to_string(i) + "]"));
      }
    }
    if (auto v = ar.count("autoencoder_depth")) cfg.architecture.autoencoder_depth = *v;
    ar.finish();
  }

  if (auto v = r.count("iterations")) cfg.iterations = *v;

  const json* mode = r.raw("mode");
  const json* modes = r.raw("modes");
  if (mode && modes) throw ConfigError("mode: give either 'mode' or 'modes', not both");
  if (mode) cfg.modes = {detail::parse_mode(*mode, "mode")};
  if (modes) {
    if (!modes->is_array()) throw ConfigError("modes: expected an array of mode names");
    cfg.modes.clear();
    for (std::size_t i = 0; i < modes->size(); ++i) {
      cfg.modes.push_back(detail::parse_mode((*modes)[i], "modes[" + std::to_string(i) + "]"));
    }
  }

  if (const json* t = r.raw("training")) {
    FieldReader tr(*t, "training");
    if (auto v = tr.real("learning_rate")) cfg.training.learning_rate = *v;
    if (auto v = tr.count("batch_size")) cfg.training.batch_size = *v;
    if (auto v = tr.count("robustness_window")) cfg.training.robustness_window = *v;
    tr.finish();
  }

  if (const json* s = r.raw("seeds")) {
    if (!s->is_array()) throw ConfigError("seeds: expected an array of integers");
    cfg.seeds.clear();
    for (std::size_t i = 0; i < s->size(); ++i) {
      cfg.seeds.push_back(FieldReader::as_count((*s)[i], "seeds[" + std::to_string(i) + "]"));
    }
  }

  if (const json* lm = r.raw("lambda_matrix")) cfg.lambda_matrix = detail::parse_lambda_matrix(*lm, "lambda_matrix");

  if (const json* e = r.raw("expert")) {
    FieldReader er(*e, "expert");
    cfg.pretrain_iterations = er.count("pretrain_iterations");
    er.finish();
  }

  if (const json* g = r.raw("ga_reg")) {
    FieldReader gr(*g, "ga_reg");
    detail::parse_ga(gr, cfg.ga_reg.ga);
    if (auto v = gr.real("mutation_rate")) cfg.ga_reg.ga.mutation_rate = *v;
    if (auto v = gr.count("candidate_steps")) cfg.ga_reg.candidate_steps = *v;
    if (auto v = gr.text("initial_population")) {
      if (*v == "default") cfg.ga_reg.initial = InitialPopulation::kDefault;
      else if (*v == "zeros") cfg.ga_reg.initial = InitialPopulation::kZeros;
      else throw ConfigError("ga_reg.initial_population: expected 'default' or 'zeros'");
    }
    gr.finish();
  }

  if (const json* g = r.raw("ga_nas")) {
    FieldReader gr(*g, "ga_nas");
    detail::parse_ga(gr, cfg.ga_nas.ga);
    if (const json* m = gr.raw("mutation_rate")) {
      if (m->is_string() && m->get<std::string>() == "auto") {
        cfg.ga_nas.auto_mutation_rate = true;
      } else if (m->is_number()) {
        cfg.ga_nas.auto_mutation_rate = false;
        cfg.ga_nas.ga.mutation_rate = m->get<double>();
      } else {
        throw ConfigError("ga_nas.mutation_rate: expected a number or \"auto\"");
      }
    }
    if (auto v = gr.real("mu")) cfg.ga_nas.objective.mu = *v;
    if (auto v = gr.real("lambda_layers")) cfg.ga_nas.objective.lambda_layers = *v;
    if (auto v = gr.real("fine_tune_fraction")) cfg.ga_nas.fine_tune_fraction = *v;
    if (auto v = gr.count("robustness_batch")) cfg.ga_nas.robustness_batch = *v;
    cfg.ga_nas.checkpoint = gr.text("checkpoint");
    gr.finish();
  }

  if (auto v = r.text("output_dir")) cfg.output_dir = *v;
  r.finish();
  cfg.validate();
  return cfg;
}

inline ExperimentConfig load_config(const fs::path& path) {
  json j;
  try {
    j = json::parse(read_file(path));
  } catch (const json::parse_error& e) {
    throw ConfigError(path.string() + ": " + e.what());
  } catch (const Error& e) {
    throw ConfigError(e.what());
  }
  return parse_config(j);
}

// ---------------------------------------------------------------------------
// Runs

inline Dataset load_dataset(const DatasetSpec& spec, std::uint64_t seed) {
  Dataset d = spec.synthetic() ? synthesize(spec.objects, spec.features, seed) : load_csv(spec.source, spec.target, seed);
  d.name = spec.name;
  return d;
}

inline fs::path run_directory(const fs::path& out, const std::string& dataset, ScheduleMode mode, std::uint64_t seed) {
  return out / dataset / std::string(name_of(mode)) / ("seed_" + std::to_string(seed));
}

inline json lambda_matrix_json(const LambdaMatrix& m) {
  json rows = json::array();
  for (std::size_t i = 0; i < m.layers(); ++i) {
    const auto r = m.row(i);
    rows.push_back(std::vector<double>(r.begin(), r.end()));
  }
  json names = json::array();
  for (auto n : kRegularizerNames) names.push_back(std::string(n));
  return {{"regularizers", names}, {"rows", rows}, {"lambda_x", m.lambda_x()}, {"lambda_y", m.lambda_y()}};
}

inline std::string ga_reg_log_csv(const std::vector<GaRegLogEntry>& log) {
  std::string out = "iteration,layer,candidate";
  for (auto n : kRegularizerNames) out += "," + std::string(n);
  out += ",val_mae\n";
  for (const auto& e : log) {
    out += std::to_string(e.iteration) + "," + std::to_string(e.layer) + "," + std::to_string(e.candidate);
    for (double v : e.lambda) out += "," + fmt(v);
    out += "," + fmt(e.val_mae) + "\n";
  }
  return out;
}

inline double test_mae(const LayeredModel& model, const StructureMask& mask, const Dataset& data) {
  const Batch test = data.batch(Split::kTest);
  return mae(forward_batch(model, mask, test.x).span(), test.y.span());
}

inline std::optional<double> final_robustness(const std::vector<RunRecord>& records) {
  return records.empty() ? std::nullopt : records.back().robustness;
}

inline json optional_json(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

inline GaRegOptions ga_reg_options_for(const ExperimentConfig& cfg, std::uint64_t seed) {
  GaRegOptions o = cfg.ga_reg;
  o.ga.rng_seed = seed;
  return o;
}

// Trains one (dataset, mode, seed) run and writes its artifacts. Returns the
// summary document.
inline json train_run(const ExperimentConfig& cfg, const DatasetSpec& spec, ScheduleMode mode, std::uint64_t seed) {
  const Dataset data = load_dataset(spec, seed);
  const Architecture arch = cfg.architecture.build(data.feature_count());
  const std::size_t k = arch.depth();
  const std::size_t T = cfg.iterations;
  const LayeredModel init = init_model(arch, seed);
  const StructureMask full = StructureMask::full(init);

  Trainer trainer(data, init, full, cfg.training, seed);
  std::optional<GaRegResult> search;
  LambdaMatrix applied(k);

  switch (mode) {
    case ScheduleMode::kBasic:
      train_with_schedule(trainer, basic_schedule(k, T));
      break;
    case ScheduleMode::kStatic:
      applied = *cfg.lambda_matrix;
      train_with_schedule(trainer, static_schedule(applied, T));
      break;
    case ScheduleMode::kSequential:
      // The search run is itself the training run.
      search = run_ga_reg(trainer, T, ga_reg_options_for(cfg, seed));
      applied = search->matrix;
      break;
    case ScheduleMode::kCumulative:
    case ScheduleMode::kAccumulated:
    case ScheduleMode::kOrdinal: {
      // Search first, then retrain from the same initialization under the
      // found matrix.
      Trainer searcher(data, init, full, cfg.training, seed);
      searcher.set_recording(false);
      search = run_ga_reg(searcher, T, ga_reg_options_for(cfg, seed));
      applied = search->matrix;
      train_with_schedule(trainer, layerwise_schedule(mode, applied, T));
      break;
    }
    case ScheduleMode::kExpert: {
      const std::size_t s = arch.autoencoder_depth;
      const std::size_t pre = cfg.pretrain_iterations.value_or(T / k);
      const ScheduleSpec spec = expert_schedule(k, s, T, kRegularizerCount, pre);
      LambdaMatrix::Row ones;
      ones.fill(1.0);
      for (std::size_t i = s; i < k; ++i) applied.set_row(i, ones);
      train_with_schedule(trainer, spec);
      break;
    }
  }

  const fs::path dir = run_directory(cfg.output_dir, spec.name, mode, seed);
  write_file_atomic(dir / "records.jsonl", to_jsonl(trainer.records()));
  write_file_atomic(dir / "model.json", checkpoint_json(trainer.model(), trainer.mask()).dump(1) + "\n");
  write_file_atomic(dir / "lambda_matrix.json", lambda_matrix_json(applied).dump(2) + "\n");
  if (search) write_file_atomic(dir / "ga_reg_log.csv", ga_reg_log_csv(search->log));

  const auto& recs = trainer.records();
  json summary = {
      {"dataset", spec.name},
      {"mode", std::string(name_of(mode))},
      {"seed", seed},
      {"iterations", T},
      {"architecture", architecture_json(arch)},
      {"test_mae", test_mae(trainer.model(), trainer.mask(), data)},
      {"val_mae", trainer.validation_mae()},
      {"final_train_S", recs.empty() ? json(nullptr) : json(recs.back().train_S)},
      {"complexity", complexity(trainer.mask())},
      {"weight_count", trainer.model().weight_count()},
      {"robustness", optional_json(final_robustness(recs))},
      {"parameter_variance", parameter_variance(trainer.model(), trainer.mask())},
  };
  write_file_atomic(dir / "summary.json", summary.dump(2) + "\n");
  return summary;
}

struct RunKey {
  std::size_t dataset = 0;
  ScheduleMode mode = ScheduleMode::kBasic;
  std::uint64_t seed = 0;
};

// Distinct (dataset, mode, seed) jobs in config order.
inline std::vector<RunKey> run_keys(const ExperimentConfig& cfg) {
  std::vector<RunKey> keys;
  std::set<std::tuple<std::size_t, int, std::uint64_t>> seen;
  for (std::size_t d = 0; d < cfg.datasets.size(); ++d)
    for (ScheduleMode m : cfg.modes)
      for (std::uint64_t s : cfg.seeds)
        if (seen.emplace(d, static_cast<int>(m), s).second) keys.push_back(RunKey{d, m, s});
  return keys;
}

// Trains every configured run. Runs fan out over the worker pool; results are
// returned in config order.
inline std::vector<json> cmd_train(const ExperimentConfig& cfg) {
  cfg.validate();
  const auto keys = run_keys(cfg);
  std::vector<json> summaries(keys.size());
  parallel_for(keys.size(), [&](std::size_t i) {
    summaries[i] = train_run(cfg, cfg.datasets[keys[i].dataset], keys[i].mode, keys[i].seed);
  });
  return summaries;
}

// ---------------------------------------------------------------------------
// Compare

struct CommandReport {
  std::string output;                 // main text result (CSV for compare)
  std::vector<std::string> warnings;  // per-cell or per-file problems
  std::size_t files_written = 0;
};

inline CommandReport cmd_compare(const ExperimentConfig& cfg) {
  cfg.validate();
  if (cfg.modes.size() < 2) throw ConfigError("modes: compare needs at least two modes");
  CommandReport rep;
  const bool with_se = cfg.seeds.size() > 1;
  if (!with_se) rep.warnings.push_back("compare: single seed, standard errors omitted");
  else if (cfg.seeds.size() < 3) rep.warnings.push_back("compare: fewer than 3 seeds, standard errors are unreliable");

  std::string csv = "dataset";
  for (ScheduleMode m : cfg.modes) {
    csv += "," + std::string(name_of(m));
    if (with_se) csv += "," + std::string(name_of(m)) + "_se";
  }
  csv += ",best\n";

  for (const DatasetSpec& d : cfg.datasets) {
    csv += d.name;
    std::optional<double> best_mean;
    std::string best_mode;
    for (ScheduleMode m : cfg.modes) {
      std::vector<double> vals;
      for (std::uint64_t s : cfg.seeds) {
        const fs::path p = run_directory(cfg.output_dir, d.name, m, s) / "summary.json";
        if (!fs::exists(p)) {
          rep.warnings.push_back("compare: missing " + p.string());
          continue;
        }
        try {
          const json j = read_json_file(p);
          if (!j.contains("test_mae") || !j["test_mae"].is_number()) throw SchemaError("no numeric test_mae");
          vals.push_back(j["test_mae"].get<double>());
        } catch (const std::exception& e) {
          rep.warnings.push_back("compare: unreadable " + p.string() + ": " + e.what());
        }
      }
      if (vals.empty()) {
        csv += ",missing";
        if (with_se) csv += ",";
        continue;
      }
      double mean = 0.0;
      for (double v : vals) mean += v;
      mean /= static_cast<double>(vals.size());
      csv += "," + fmt(mean);
      if (with_se) {
        csv += ",";
        if (vals.size() > 1) csv += fmt(std::sqrt(sample_variance(vals) / static_cast<double>(vals.size())));
      }
      if (!best_mean || mean < *best_mean) {
        best_mean = mean;
        best_mode = std::string(name_of(m));
      }
    }
    csv += "," + best_mode + "\n";
  }
  write_file_atomic(cfg.output_dir / "compare.csv", csv);
  rep.output = csv;
  rep.files_written = 1;
  return rep;
}

// ---------------------------------------------------------------------------
// Prune

inline json neuron_mask_json(const NeuronMask& m) {
  json layers = json::array();
  for (const auto& l : m.alive) layers.push_back(std::vector<int>(l.begin(), l.end()));
  return layers;
}

// Runs the structure search on one checkpoint, fine-tunes the pruned model and
// writes mask, checkpoint, trajectory and summary into `dir`.
inline json prune_run(const ExperimentConfig& cfg, const DatasetSpec& spec, const std::string& mode, std::uint64_t seed,
                      const fs::path& checkpoint_path, const fs::path& dir) {
  const Dataset data = load_dataset(spec, seed);
  const Architecture arch = cfg.architecture.build(data.feature_count());
  if (!fs::exists(checkpoint_path)) throw Error("checkpoint not found: " + checkpoint_path.string());
  const Checkpoint ck = checkpoint_from_json(read_json_file(checkpoint_path), arch);

  GAConfig ga = cfg.ga_nas.ga;
  ga.rng_seed = seed;
  if (cfg.ga_nas.auto_mutation_rate) ga.mutation_rate = default_bit_mutation_rate(ck.model);
  const Batch val = data.batch(Split::kValidation);
  const PruneResult pr = prune(ck.model, ck.mask, val, ga, cfg.ga_nas.objective, cfg.ga_nas.robustness_batch);

  const std::uint64_t ft_seed = make_stream(seed, {stream::kFineTune})();
  Trainer ft(data, ck.model, pr.mask, cfg.training, ft_seed);
  const LambdaMatrix unregularized(arch.depth());
  for (std::size_t t = 0; t < cfg.fine_tune_iterations(); ++t) ft.step(unregularized);

  write_file_atomic(dir / "mask.json", json{{"neurons", neuron_mask_json(pr.best)},
                                            {"complexity", complexity(pr.mask)},
                                            {"weight_count", ck.model.weight_count()}}
                                               .dump(2) + "\n");
  write_file_atomic(dir / "model.json", checkpoint_json(ft.model(), ft.mask()).dump(1) + "\n");
  write_file_atomic(dir / "trajectory.csv", trajectory_csv(pr.trajectory));
  write_file_atomic(dir / "fine_tune_records.jsonl", to_jsonl(ft.records()));
  json summary = {
      {"dataset", spec.name},
      {"mode", mode},
      {"seed", seed},
      {"checkpoint", checkpoint_path.generic_string()},
      {"generations", ga.generations},
      {"mutation_rate", ga.mutation_rate},
      {"mu", cfg.ga_nas.objective.mu},
      {"fitness", pr.fitness},
      {"complexity_before", complexity(ck.mask)},
      {"complexity_after", complexity(pr.mask)},
      {"test_mae_before", test_mae(ck.model, ck.mask, data)},
      {"test_mae_pruned", test_mae(ck.model, pr.mask, data)},
      {"test_mae_fine_tuned", test_mae(ft.model(), ft.mask(), data)},
      {"fine_tune_iterations", cfg.fine_tune_iterations()},
  };
  write_file_atomic(dir / "summary.json", summary.dump(2) + "\n");
  return summary;
}

// Prunes the trained checkpoint of every configured run, or the explicit
// ga_nas.checkpoint when one is given.
inline std::vector<json> cmd_prune(const ExperimentConfig& cfg) {
  cfg.validate();
  if (cfg.ga_nas.checkpoint) {
    const DatasetSpec& d = cfg.datasets.front();
    const std::uint64_t s = cfg.seeds.front();
    const fs::path dir = cfg.output_dir / d.name / "external" / ("seed_" + std::to_string(s)) / "prune";
    return {prune_run(cfg, d, "external", s, *cfg.ga_nas.checkpoint, dir)};
  }
  const auto keys = run_keys(cfg);
  std::vector<json> out(keys.size());
  parallel_for(keys.size(), [&](std::size_t i) {
    const DatasetSpec& d = cfg.datasets[keys[i].dataset];
    const fs::path run = run_directory(cfg.output_dir, d.name, keys[i].mode, keys[i].seed);
    out[i] = prune_run(cfg, d, std::string(name_of(keys[i].mode)), keys[i].seed, run / "model.json", run / "prune");
  });
  return out;
}

// ---------------------------------------------------------------------------
// Report

namespace detail {

struct RunInfo {
  fs::path dir;
  std::string dataset;
  std::string mode;
  std::uint64_t seed = 0;
  json summary;
};

inline std::vector<std::string> split_commas(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

inline std::vector<std::vector<std::string>> read_csv_rows(const fs::path& p, std::vector<std::string>& header) {
  std::istringstream in(read_file(p));
  std::string line;
  std::vector<std::vector<std::string>> rows;
  if (!std::getline(in, line)) throw SchemaError(p.string() + ": empty file");
  header = split_commas(line);
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    auto r = split_commas(line);
    if (r.size() != header.size()) throw SchemaError(p.string() + ": ragged row");
    rows.push_back(std::move(r));
  }
  return rows;
}

inline std::vector<RunRecord> read_records(const fs::path& p) {
  std::istringstream in(read_file(p));
  std::string line;
  std::vector<RunRecord> out;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    try {
      out.push_back(json::parse(line).get<RunRecord>());
    } catch (const json::exception& e) {
      throw SchemaError(p.string() + ": " + e.what());
    }
  }
  return out;
}

// Discovers run directories (those holding a training summary) under `root`
// in sorted path order.
inline std::vector<RunInfo> discover_runs(const fs::path& root, std::vector<std::string>& warnings) {
  std::vector<fs::path> found;
  if (!fs::is_directory(root)) return {};
  for (const auto& e : fs::recursive_directory_iterator(root)) {
    if (!e.is_regular_file() || e.path().filename() != "summary.json") continue;
    const fs::path dir = e.path().parent_path();
    if (dir.filename() == "prune") continue;
    found.push_back(dir);
  }
  std::sort(found.begin(), found.end());
  std::vector<RunInfo> runs;
  for (const auto& dir : found) {
    try {
      json s = read_json_file(dir / "summary.json");
      RunInfo r{dir, s.at("dataset").get<std::string>(), s.at("mode").get<std::string>(),
                s.at("seed").get<std::uint64_t>(), s};
      runs.push_back(std::move(r));
    } catch (const std::exception& e) {
      warnings.push_back("report: skipping " + dir.string() + ": " + e.what());
    }
  }
  return runs;
}

struct Mean {
  double sum = 0.0;
  std::size_t n = 0;
  void add(double v) {
    sum += v;
    ++n;
  }
  double value() const { return sum / static_cast<double>(n); }
};

}  // namespace detail

inline constexpr const char* kReportDir = "report";

// Emits plot-ready CSV data from the runs under `run_dir` into
// `run_dir/report`. Files without inputs are skipped with a warning.
inline CommandReport cmd_report(const fs::path& run_dir) {
  CommandReport rep;
  const auto runs = detail::discover_runs(run_dir, rep.warnings);
  const fs::path out = run_dir / kReportDir;
  auto emit = [&](const std::string& name, const std::string& content, std::size_t rows) {
    if (rows == 0) {
      rep.warnings.push_back("report: no input data for " + name);
      return;
    }
    write_file_atomic(out / name, content);
    ++rep.files_written;
    rep.output += (out / name).generic_string() + "\n";
  };

  // CRES trajectory of the structure search.
  {
    std::string csv = "dataset,mode,seed,generation,complexity,error,robustness\n";
    std::size_t rows = 0;
    for (const auto& r : runs) {
      const fs::path p = r.dir / "prune" / "trajectory.csv";
      if (!fs::exists(p)) continue;
      try {
        std::vector<std::string> header;
        for (const auto& row : detail::read_csv_rows(p, header)) {
          csv += r.dataset + "," + r.mode + "," + std::to_string(r.seed);
          for (const auto& cell : row) csv += "," + cell;
          csv += "\n";
          ++rows;
        }
      } catch (const std::exception& e) {
        rep.warnings.push_back("report: " + std::string(e.what()));
      }
    }
    emit("cres_trajectory.csv", csv, rows);
  }

  // Live metaparameters of the regularization search.
  {
    std::string csv = "dataset,mode,seed,iteration,layer";
    for (auto n : kRegularizerNames) csv += "," + std::string(n);
    csv += "\n";
    std::size_t rows = 0;
    for (const auto& r : runs) {
      const fs::path p = r.dir / "ga_reg_log.csv";
      if (!fs::exists(p)) continue;
      try {
        std::vector<std::string> header;
        for (const auto& row : detail::read_csv_rows(p, header)) {
          if (row.size() != 4 + kRegularizerCount || row[2] != "-1") continue;
          csv += r.dataset + "," + r.mode + "," + std::to_string(r.seed) + "," + row[0] + "," + row[1];
          for (std::size_t c = 0; c < kRegularizerCount; ++c) csv += "," + row[3 + c];
          csv += "\n";
          ++rows;
        }
      } catch (const std::exception& e) {
        rep.warnings.push_back("report: " + std::string(e.what()));
      }
    }
    emit("metaparameters.csv", csv, rows);
  }

  // Seed-averaged per-iteration curves.
  std::map<std::tuple<std::string, std::string, std::size_t>, detail::Mean> val_curve, pvar_curve;
  for (const auto& r : runs) {
    const fs::path p = r.dir / "records.jsonl";
    if (!fs::exists(p)) {
      rep.warnings.push_back("report: missing " + p.string());
      continue;
    }
    try {
      for (const auto& rec : detail::read_records(p)) {
        val_curve[{r.dataset, r.mode, rec.iteration}].add(rec.val_MAE);
        pvar_curve[{r.dataset, r.mode, rec.iteration}].add(rec.parameter_variance);
      }
    } catch (const std::exception& e) {
      rep.warnings.push_back("report: " + std::string(e.what()));
    }
  }
  auto curve_csv = [](const auto& curve, const std::string& column) {
    std::string csv = "dataset,mode,iteration," + column + ",runs\n";
    for (const auto& [key, m] : curve) {
      csv += std::get<0>(key) + "," + std::get<1>(key) + "," + std::to_string(std::get<2>(key)) + "," +
             fmt(m.value()) + "," + std::to_string(m.n) + "\n";
    }
    return csv;
  };
  emit("validation_curves.csv", curve_csv(val_curve, "val_MAE"), val_curve.size());

  // Test error against network depth, and the expert surface over
  // (autoencoder layers, remaining layers).
  std::map<std::tuple<std::string, std::string, std::size_t>, detail::Mean> by_depth;
  std::map<std::tuple<std::string, std::string, std::size_t, std::size_t>, detail::Mean> surface;
  for (const auto& r : runs) {
    try {
      const Architecture a = architecture_from_json(r.summary.at("architecture"));
      const double e = r.summary.at("test_mae").get<double>();
      by_depth[{r.dataset, r.mode, a.depth()}].add(e);
      if (r.mode == "expert" || r.mode == "basic") {
        surface[{r.dataset, r.mode, a.autoencoder_depth, a.depth() - a.autoencoder_depth}].add(e);
      }
    } catch (const std::exception& e) {
      rep.warnings.push_back("report: " + r.dir.string() + ": " + e.what());
    }
  }
  {
    std::string csv = "dataset,mode,depth,test_mae,runs\n";
    for (const auto& [key, m] : by_depth) {
      csv += std::get<0>(key) + "," + std::get<1>(key) + "," + std::to_string(std::get<2>(key)) + "," +
             fmt(m.value()) + "," + std::to_string(m.n) + "\n";
    }
    emit("error_vs_depth.csv", csv, by_depth.size());
  }
  {
    std::string csv = "dataset,mode,autoencoder_layers,dense_layers,test_mae,runs\n";
    bool any_expert = false;
    for (const auto& [key, m] : surface) {
      any_expert = any_expert || std::get<1>(key) == "expert";
      csv += std::get<0>(key) + "," + std::get<1>(key) + "," + std::to_string(std::get<2>(key)) + "," +
             std::to_string(std::get<3>(key)) + "," + fmt(m.value()) + "," + std::to_string(m.n) + "\n";
    }
    emit("expert_surface.csv", csv, any_expert ? surface.size() : 0);
  }

  emit("parameter_variance_curves.csv", curve_csv(pvar_curve, "parameter_variance"), pvar_curve.size());
  return rep;
}

}  // namespace regsched
