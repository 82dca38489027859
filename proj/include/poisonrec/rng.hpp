// Copyright 2026 the poisonrec authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstdint>
#include <random>

namespace poisonrec {

using Rng = std::mt19937_64;

// splitmix64 mixer; the basis for deriving independent seed streams.
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Derives a child seed for (stream, index) under a root seed. Replications,
// per-row fake-profile generation and per-(cluster, item) sampling each get
// their own stream so tasks can run in any order without sharing RNG state.
inline std::uint64_t derive_seed(std::uint64_t root, std::uint64_t stream,
                                 std::uint64_t index = 0) {
  return splitmix64(splitmix64(root ^ splitmix64(stream + 0x632be59bd9b4e019ULL)) + index);
}

// Stream tags. Values are arbitrary but fixed: changing them changes every
// derived seed and therefore every reported result.
namespace seed_stream {
inline constexpr std::uint64_t kBaseline = 1;
inline constexpr std::uint64_t kFactorInit = 2;
inline constexpr std::uint64_t kKmeansInit = 3;
inline constexpr std::uint64_t kReplication = 4;
inline constexpr std::uint64_t kTargetSelect = 5;
inline constexpr std::uint64_t kGenerateUsers = 6;
inline constexpr std::uint64_t kPlaceTarget = 7;
inline constexpr std::uint64_t kAttackRows = 8;
inline constexpr std::uint64_t kDemoData = 9;
}  // namespace seed_stream

inline Rng make_rng(std::uint64_t seed) { return Rng(seed); }

inline double uniform_unit(Rng& rng) {
  return std::uniform_real_distribution<double>(0.0, 1.0)(rng);
}

}  // namespace poisonrec
