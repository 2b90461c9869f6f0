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

#include <array>
#include <string>

#include "qbudget/random.hpp"

namespace qbudget {

/// Split of a total error budget over the three error sinks: logical qubit
/// implementation, T-state production and rotation synthesis.
struct BudgetDistribution {
  double logical = 0.0;
  double t_states = 0.0;
  double rotations = 0.0;
  double total = 0.0;

  std::array<double, 3> components() const noexcept { return {logical, t_states, rotations}; }

  friend bool operator==(const BudgetDistribution&, const BudgetDistribution&) = default;
};

/// Smallest admissible component for a given total.
inline constexpr double kFloorFraction = 1e-9;
inline double budget_floor(double total) noexcept { return kFloorFraction * total; }

/// Relative tolerance on `logical + t_states + rotations == total`.
inline constexpr double kSimplexTolerance = 1e-9;

/// Throws InvariantViolation (module `module`) unless 0 < total < 1, the
/// components sum to total within kSimplexTolerance and each is >= floor.
void validate(const BudgetDistribution& b, const std::string& module = "budget-sampler");
bool on_simplex(const BudgetDistribution& b) noexcept;

BudgetDistribution uniform_distribution(double total);

/// Proportional rescaling of a non-negative triple onto the simplex of
/// `total`, followed by the floor clamp. Throws DegenerateInput when no
/// component is positive.
BudgetDistribution normalize(const std::array<double, 3>& raw, double total);

/// Draws x_L, x_T, x_R i.i.d. uniform on (0,1) and rescales them to sum to
/// `total`. Consumes exactly three draws from `rng` per call.
BudgetDistribution sample_distribution(Rng& rng, double total);

}  // namespace qbudget
