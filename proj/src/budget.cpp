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

#include "qbudget/budget.hpp"

#include <cmath>

#include "qbudget/errors.hpp"

namespace qbudget {

namespace {

void check_total(double total) {
  if (!(total > 0.0 && total < 1.0)) {
    throw InvariantViolation("budget-sampler", "total budget must lie in (0, 1), got " + std::to_string(total));
  }
}

// Raises components below the floor to the floor and removes the surplus
// proportionally from the rest. Repeats until no component is below floor.
std::array<double, 3> clamp_to_floor(std::array<double, 3> x, double total) {
  const double floor = budget_floor(total);
  for (int pass = 0; pass < 4; ++pass) {
    double clamped = 0.0;
    double free_mass = 0.0;
    bool any_below = false;
    std::array<bool, 3> pinned{};
    for (std::size_t i = 0; i < 3; ++i) {
      if (x[i] <= floor) {
        pinned[i] = true;
        any_below = any_below || x[i] < floor;
        clamped += floor;
      } else {
        free_mass += x[i];
      }
    }
    if (!any_below) break;
    const double scale = (total - clamped) / free_mass;
    for (std::size_t i = 0; i < 3; ++i) x[i] = pinned[i] ? floor : x[i] * scale;
  }
  return x;
}

BudgetDistribution from_components(const std::array<double, 3>& x, double total) {
  return {x[0], x[1], x[2], total};
}

}  // namespace

bool on_simplex(const BudgetDistribution& b) noexcept {
  if (!(b.total > 0.0 && b.total < 1.0)) return false;
  const double floor = budget_floor(b.total);
  for (double c : b.components()) {
    if (!std::isfinite(c) || c < floor) return false;
  }
  const double sum = b.logical + b.t_states + b.rotations;
  return std::fabs(sum - b.total) <= kSimplexTolerance * b.total;
}

void validate(const BudgetDistribution& b, const std::string& module) {
  if (!on_simplex(b)) {
    throw InvariantViolation(module, "budget distribution (" + std::to_string(b.logical) + ", " +
                                         std::to_string(b.t_states) + ", " + std::to_string(b.rotations) +
                                         ") is not on the simplex of total " + std::to_string(b.total));
  }
}

BudgetDistribution uniform_distribution(double total) {
  check_total(total);
  const double third = total / 3.0;
  return {third, third, third, total};
}

BudgetDistribution normalize(const std::array<double, 3>& raw, double total) {
  check_total(total);
  double sum = 0.0;
  for (double r : raw) {
    if (!std::isfinite(r)) throw DegenerateInput("raw budget components must be finite");
    if (r > 0.0) sum += r;
  }
  if (!(sum > 0.0)) throw DegenerateInput("all raw budget components are <= 0");
  std::array<double, 3> x{};
  for (std::size_t i = 0; i < 3; ++i) x[i] = raw[i] > 0.0 ? raw[i] / sum * total : 0.0;
  return from_components(clamp_to_floor(x, total), total);
}

BudgetDistribution sample_distribution(Rng& rng, double total) {
  check_total(total);
  std::array<double, 3> x{};
  for (auto& v : x) v = rng.uniform_open();
  const double sum = x[0] + x[1] + x[2];
  for (auto& v : x) v = v / sum * total;
  return from_components(clamp_to_floor(x, total), total);
}

}  // namespace qbudget
