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


#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace regsched {

using Rng = std::mt19937_64;

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Independent generator for the substream named by `path` under `seed`.
// Streams with different paths never share state, so evaluation order of
// parallel work cannot perturb any other stream.
inline Rng make_stream(std::uint64_t seed, std::initializer_list<std::uint64_t> path) {
  std::uint64_t h = splitmix64(seed);
  for (std::uint64_t p : path) h = splitmix64(h ^ splitmix64(p + 0x632be59bd9b4e019ULL));
  return Rng(h);
}

// Stream tags.
namespace stream {
inline constexpr std::uint64_t kInit = 1;
inline constexpr std::uint64_t kBatches = 2;
inline constexpr std::uint64_t kGaReg = 3;
inline constexpr std::uint64_t kGaNas = 4;
inline constexpr std::uint64_t kData = 5;
inline constexpr std::uint64_t kCandidate = 6;
inline constexpr std::uint64_t kFineTune = 7;
}  // namespace stream

inline double uniform01(Rng& rng) {
  return std::uniform_real_distribution<double>(0.0, 1.0)(rng);
}

}  // namespace regsched
