// Copyright 2026 The qbudget Authors
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
#include <string_view>

namespace qbudget {

/// SplitMix64 finalizer. Used for seed derivation only.
std::uint64_t splitmix64(std::uint64_t x) noexcept;

/// Seed of the independent stream `stream` split off from `seed`.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) noexcept;

/// 64-bit FNV-1a. Stable across platforms, unlike std::hash.
std::uint64_t stable_hash(std::string_view text) noexcept;

/// Seeded generator used everywhere randomness enters the pipeline.
///
/// The engine is std::mt19937_64, whose output sequence is fixed by the
/// standard. Conversions to reals and bounded integers are done here rather
/// than through <random> distributions, whose outputs are
/// implementation-defined, so runs replay bit-for-bit on any toolchain.
/// Independent streams come from `Rng::derive(seed, stream)`.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(splitmix64(seed)) {}

  static Rng derive(std::uint64_t seed, std::uint64_t stream) {
    return Rng(derive_seed(seed, stream));
  }

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform on the open interval (0, 1), 53-bit resolution.
  double uniform_open();

  /// Uniform on [0, 1), 53-bit resolution.
  double uniform01();

  /// Uniform integer in [0, n). n must be positive.
  std::uint64_t below(std::uint64_t n);

  /// Uniform integer in [lo, hi].
  std::uint64_t between(std::uint64_t lo, std::uint64_t hi);

 private:
  std::mt19937_64 engine_;
};

}  // namespace qbudget
