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


// Datasets: CSV ingestion, seeded 60/20/20 splits, train-split
// standardization, and the synthetic multicollinearity generator.

#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <fstream>
#include <numeric>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "regsched/core_math.hpp"
#include "regsched/errors.hpp"
#include "regsched/metrics.hpp"
#include "regsched/rng.hpp"

namespace regsched {

enum class Split { kTrain, kValidation, kTest };

struct Dataset {
  std::string name;
  std::vector<std::string> feature_names;
  Matrix features;  // objects x n, standardized with train statistics
  Vector targets;   // original units
  std::vector<std::size_t> train;
  std::vector<std::size_t> val;
  std::vector<std::size_t> test;

  std::size_t objects() const { return features.rows(); }
  std::size_t feature_count() const { return features.cols(); }

  const std::vector<std::size_t>& indices(Split s) const {
    switch (s) {
      case Split::kTrain: return train;
      case Split::kValidation: return val;
      case Split::kTest: return test;
    }
    return train;
  }

  Batch gather(std::span<const std::size_t> rows) const {
    Batch b{Matrix(rows.size(), feature_count()), Vector(rows.size())};
    for (std::size_t i = 0; i < rows.size(); ++i) {
      auto src = features.row(rows[i]);
      std::copy(src.begin(), src.end(), b.x.row(i).begin());
      b.y[i] = targets[rows[i]];
    }
    return b;
  }

  Batch batch(Split s) const { return gather(indices(s)); }
};

// Validation and test each take round(0.2 n) rows; training takes the rest.
struct SplitSizes {
  std::size_t train = 0;
  std::size_t val = 0;
  std::size_t test = 0;
};

inline SplitSizes split_sizes(std::size_t objects) {
  const auto holdout = static_cast<std::size_t>(std::llround(0.2 * static_cast<double>(objects)));
  return SplitSizes{objects - 2 * holdout, holdout, holdout};
}

inline constexpr std::size_t kMinObjects = 10;

namespace detail {

inline void assign_splits(Dataset& d, std::uint64_t seed) {
  const std::size_t n = d.objects();
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  Rng rng = make_stream(seed, {stream::kData});
  std::shuffle(perm.begin(), perm.end(), rng);
  const SplitSizes sz = split_sizes(n);
  d.train.assign(perm.begin(), perm.begin() + static_cast<std::ptrdiff_t>(sz.train));
  d.val.assign(perm.begin() + static_cast<std::ptrdiff_t>(sz.train),
               perm.begin() + static_cast<std::ptrdiff_t>(sz.train + sz.val));
  d.test.assign(perm.begin() + static_cast<std::ptrdiff_t>(sz.train + sz.val), perm.end());
}

// Zero mean, unit sample variance on the training rows. Constant columns are
// only centered.
inline void standardize(Dataset& d) {
  const std::size_t cols = d.feature_count();
  const auto m = static_cast<double>(d.train.size());
  for (std::size_t c = 0; c < cols; ++c) {
    double mean = 0.0;
    for (std::size_t r : d.train) mean += d.features(r, c);
    mean /= m;
    double ss = 0.0;
    for (std::size_t r : d.train) ss += (d.features(r, c) - mean) * (d.features(r, c) - mean);
    double sd = d.train.size() > 1 ? std::sqrt(ss / (m - 1.0)) : 0.0;
    if (sd == 0.0) sd = 1.0;
    for (std::size_t r = 0; r < d.objects(); ++r) d.features(r, c) = (d.features(r, c) - mean) / sd;
  }
}

inline std::vector<std::string_view> split_csv_line(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    const std::size_t comma = line.find(',', start);
    out.push_back(line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '"')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r' || s.back() == '"')) s.remove_suffix(1);
  return s;
}

}  // namespace detail

// Builds a dataset from raw rows: shuffles by seed, splits, standardizes.
inline Dataset make_dataset(std::string name, std::vector<std::string> feature_names, Matrix raw_features,
                            Vector targets, std::uint64_t seed) {
  if (raw_features.rows() != targets.size()) throw DimensionError("feature and target row counts differ");
  if (raw_features.rows() < kMinObjects) {
    throw SizeError("dataset needs at least " + std::to_string(kMinObjects) + " rows, got " +
                    std::to_string(raw_features.rows()));
  }
  Dataset d{std::move(name), std::move(feature_names), std::move(raw_features), std::move(targets), {}, {}, {}};
  detail::assign_splits(d, seed);
  detail::standardize(d);
  return d;
}

inline Dataset parse_csv(std::istream& in, std::string_view target_column, std::uint64_t seed,
                         std::string name = "csv") {
  std::string line;
  if (!std::getline(in, line)) throw SchemaError("CSV input is empty");
  if (line.size() >= 3 && static_cast<unsigned char>(line[0]) == 0xEF) line.erase(0, 3);  // UTF-8 BOM
  std::vector<std::string> header;
  for (auto cell : detail::split_csv_line(line)) header.emplace_back(detail::trim(cell));
  const auto target_it = std::find(header.begin(), header.end(), target_column);
  if (target_it == header.end()) {
    throw SchemaError("target column '" + std::string(target_column) + "' not found in CSV header");
  }
  const auto target_col = static_cast<std::size_t>(target_it - header.begin());

  std::vector<std::string> names;
  for (std::size_t c = 0; c < header.size(); ++c)
    if (c != target_col) names.push_back(header[c]);

  std::vector<double> values;
  std::vector<double> targets;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (detail::trim(line).empty()) continue;
    const auto cells = detail::split_csv_line(line);
    if (cells.size() != header.size()) {
      throw SchemaError("line " + std::to_string(line_no) + " has " + std::to_string(cells.size()) +
                        " cells, header has " + std::to_string(header.size()));
    }
    for (std::size_t c = 0; c < cells.size(); ++c) {
      const auto cell = detail::trim(cells[c]);
      double v = 0.0;
      const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
      if (cell.empty() || ec != std::errc() || ptr != cell.data() + cell.size() || !std::isfinite(v)) {
        throw ParseError("non-numeric cell '" + std::string(cell) + "'", line_no, c + 1);
      }
      (c == target_col ? targets : values).push_back(v);
    }
  }
  const std::size_t rows = targets.size();
  if (rows < kMinObjects) {
    throw SizeError("dataset needs at least " + std::to_string(kMinObjects) + " rows, got " + std::to_string(rows));
  }
  return make_dataset(std::move(name), std::move(names), Matrix(rows, header.size() - 1, std::move(values)),
                      Vector(std::move(targets)), seed);
}

inline Dataset load_csv(const std::string& path, std::string_view target_column, std::uint64_t seed) {
  std::ifstream in(path);
  if (!in) throw SchemaError("cannot open CSV file '" + path + "'");
  std::string name = path;
  if (const auto slash = name.find_last_of('/'); slash != std::string::npos) name.erase(0, slash + 1);
  if (const auto dot = name.find_last_of('.'); dot != std::string::npos) name.erase(dot);
  return parse_csv(in, target_column, seed, name);
}

inline constexpr double kSyntheticTargetNoise = 0.1;
inline constexpr double kSyntheticDuplicateNoise = 0.05;

// Sizes of the informative, multicollinear and orthogonal feature groups.
struct SyntheticGroups {
  std::size_t informative = 0;
  std::size_t collinear = 0;
  std::size_t orthogonal = 0;
};

inline SyntheticGroups synthetic_groups(std::size_t n_features) {
  const std::size_t g = n_features / 3;
  return SyntheticGroups{g, g, n_features - 2 * g};
}

// Three feature groups: (a) informative, with the target a linear
// combination of them plus N(0, 0.1^2) noise; (b) copies of (a) plus
// N(0, 0.05^2) noise; (c) independent standard normals.
inline Dataset synthesize(std::size_t objects = 10000, std::size_t n_features = 30, std::uint64_t seed = 0) {
  if (objects < 100) throw ConfigError("synthesize: objects must be >= 100");
  if (n_features < 6) throw ConfigError("synthesize: n_features must be >= 6");
  const SyntheticGroups g = synthetic_groups(n_features);
  Rng rng = make_stream(seed, {stream::kData, 1});
  std::normal_distribution<double> normal(0.0, 1.0);

  std::vector<double> coef(g.informative);
  for (double& c : coef) c = normal(rng);

  Matrix x(objects, n_features);
  Vector y(objects);
  for (std::size_t r = 0; r < objects; ++r) {
    double target = 0.0;
    for (std::size_t j = 0; j < g.informative; ++j) {
      x(r, j) = normal(rng);
      target += coef[j] * x(r, j);
    }
    for (std::size_t j = 0; j < g.collinear; ++j) {
      x(r, g.informative + j) = x(r, j) + kSyntheticDuplicateNoise * normal(rng);
    }
    for (std::size_t j = 0; j < g.orthogonal; ++j) x(r, g.informative + g.collinear + j) = normal(rng);
    y[r] = target + kSyntheticTargetNoise * normal(rng);
  }
  std::vector<std::string> names;
  for (std::size_t j = 0; j < n_features; ++j) {
    const char group = j < g.informative ? 'a' : (j < g.informative + g.collinear ? 'b' : 'c');
    names.push_back(std::string(1, group) + std::to_string(j));
  }
  return make_dataset("synthetic", std::move(names), std::move(x), std::move(y), seed);
}

}  // namespace regsched
