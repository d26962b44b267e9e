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


// Command-line front end: regsched {train|compare|prune|report}.
// Exit codes: 0 success, 1 configuration error, 2 runtime error.

#include <cstdint>
#include <exception>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "regsched/experiment.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 1;
constexpr int kExitRuntime = 2;

struct Flags {
  std::string config;
  std::string out;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> threads;
};

void add_common_flags(CLI::App* cmd, Flags& f, bool config_required) {
  auto* c = cmd->add_option("--config", f.config, "experiment config (JSON)");
  if (config_required) c->required();
  cmd->add_option("--out", f.out, "output directory (overrides output_dir)");
  cmd->add_option("--seed", f.seed, "run a single seed (overrides seeds)");
  cmd->add_option("--threads", f.threads, "worker thread cap")->check(CLI::PositiveNumber);
}

regsched::ExperimentConfig load(const Flags& f) {
  regsched::ExperimentConfig cfg = regsched::load_config(f.config);
  if (!f.out.empty()) cfg.output_dir = f.out;
  if (f.seed) cfg.seeds = {*f.seed};
  cfg.validate();
  return cfg;
}

void print_warnings(const regsched::CommandReport& rep) {
  for (const auto& w : rep.warnings) std::cerr << "warning: " << w << "\n";
}

int run_train(const Flags& f) {
  const auto cfg = load(f);
  for (const auto& s : regsched::cmd_train(cfg)) {
    std::cout << s["dataset"].get<std::string>() << " " << s["mode"].get<std::string>() << " seed "
              << s["seed"].get<std::uint64_t>() << " test_mae " << regsched::fmt(s["test_mae"].get<double>())
              << "\n";
  }
  return kExitOk;
}

int run_compare(const Flags& f) {
  const auto cfg = load(f);
  const auto rep = regsched::cmd_compare(cfg);
  print_warnings(rep);
  std::cout << rep.output;
  return kExitOk;
}

int run_prune(const Flags& f) {
  const auto cfg = load(f);
  for (const auto& s : regsched::cmd_prune(cfg)) {
    std::cout << s["dataset"].get<std::string>() << " " << s["mode"].get<std::string>() << " seed "
              << s["seed"].get<std::uint64_t>() << " complexity "
              << s["complexity_before"].get<std::size_t>() << " -> " << s["complexity_after"].get<std::size_t>()
              << " test_mae " << regsched::fmt(s["test_mae_before"].get<double>()) << " -> "
              << regsched::fmt(s["test_mae_fine_tuned"].get<double>()) << "\n";
  }
  return kExitOk;
}

int run_report(const Flags& f, const std::string& positional) {
  std::string dir = positional.empty() ? f.out : positional;
  if (dir.empty()) {
    if (f.config.empty()) throw regsched::ConfigError("report: give a run directory, --out, or --config");
    dir = load(f).output_dir.string();
  }
  const auto rep = regsched::cmd_report(dir);
  print_warnings(rep);
  std::cout << rep.output;
  if (rep.files_written == 0) {
    std::cerr << "error: no report data found under " << dir << "\n";
    return kExitRuntime;
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Layer-wise regularization schedules and structure search for deep regression networks"};
  app.require_subcommand(1);
  Flags flags;
  std::string report_dir;

  auto* train = app.add_subcommand("train", "train every configured (dataset, mode, seed) run");
  add_common_flags(train, flags, true);
  auto* compare = app.add_subcommand("compare", "tabulate test MAE across modes and seeds");
  add_common_flags(compare, flags, true);
  auto* prune = app.add_subcommand("prune", "prune trained checkpoints with the structure search");
  add_common_flags(prune, flags, true);
  auto* report = app.add_subcommand("report", "write plot-ready CSV data from a run directory");
  add_common_flags(report, flags, false);
  report->add_option("run_dir", report_dir, "run directory (defaults to --out or the config output_dir)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (flags.threads) regsched::set_max_threads(*flags.threads);
    if (train->parsed()) return run_train(flags);
    if (compare->parsed()) return run_compare(flags);
    if (prune->parsed()) return run_prune(flags);
    return run_report(flags, report_dir);
  } catch (const regsched::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
}
