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
#include <filesystem>
#include <string>
#include <string_view>

#include "qbudget/budget.hpp"
#include "qbudget/circuit.hpp"

namespace qbudget {

/// Hardware and code assumptions of the resource model. A surface-code tile
/// costs 2 d^2 physical qubits; that formula is fixed.
struct PhysicalParams {
  double p_phys = 1e-3;        ///< physical error rate per operation
  double p_threshold = 1e-2;   ///< surface-code threshold
  double prefactor_a = 0.03;   ///< prefactor of the logical error rate
  double t_phys = 100e-9;      ///< physical cycle time, seconds
  double cycle_factor = 6.0;   ///< physical cycles per logical cycle per unit distance
  double p_injection = 1e-2;   ///< error of a raw injected T state

  friend bool operator==(const PhysicalParams&, const PhysicalParams&) = default;
};

/// Throws InvariantViolation unless 0 < p_phys < p_threshold < 1,
/// prefactor_a > 0, t_phys > 0, cycle_factor >= 1 and 0 < p_injection < 1.
void validate(const PhysicalParams& p);

/// JSON object with any subset of the PhysicalParams field names; missing
/// fields keep their defaults. `t_phys` is in seconds. Unknown fields raise
/// SchemaError unless `lenient`.
PhysicalParams load_physical_params(std::string_view json_text, bool lenient = false);
PhysicalParams read_params_file(const std::filesystem::path& path, bool lenient = false);
std::string save_physical_params(const PhysicalParams& p);

// Model constants.
inline constexpr double kSynthesisSlope = 0.53;      // T gates per bit of rotation precision
inline constexpr double kSynthesisOffset = 5.3;
inline constexpr std::uint64_t kToffoliTStates = 4;
inline constexpr std::uint64_t kToffoliCycles = 3;
inline constexpr int kMaxCodeDistance = 99;
inline constexpr int kMaxDistillationRounds = 10;
inline constexpr double kDistillationCoefficient = 35.0;  // 15-to-1: e' = 35 e^3
inline constexpr double kFactoryCliffordOps = 31.0;
inline constexpr std::uint64_t kFactoryTilesPerRound = 16;
inline constexpr double kFactoryCyclesPerRound = 11.0;  // times the factory distance

/// Physical qubits of one surface-code tile at distance d.
constexpr std::uint64_t qubits_per_tile(std::uint64_t d) noexcept { return 2 * d * d; }

/// Per-qubit, per-logical-cycle logical error at distance d.
double logical_error_rate(int d, const PhysicalParams& p) noexcept;

struct TFactoryDesign {
  int rounds = 0;
  int factory_distance = 3;
  double output_error = 0.0;
  std::uint64_t physical_qubits_per_factory = 0;
  double seconds_per_tstate = 0.0;

  friend bool operator==(const TFactoryDesign&, const TFactoryDesign&) = default;
};

struct ResourceEstimate {
  std::uint64_t physical_qubits = 0;
  double runtime_seconds = 0.0;
  double space_time_cost = 0.0;
  int code_distance = 0;
  std::uint64_t logical_cycles = 0;
  std::uint64_t algorithmic_qubits = 0;
  std::uint64_t t_per_rotation = 0;
  std::uint64_t total_t_states = 0;
  std::uint64_t factory_count = 0;
  TFactoryDesign factory_design;
  double achieved_logical_error = 0.0;
  double achieved_tstate_error = 0.0;
  double achieved_rotation_error = 0.0;

  friend bool operator==(const ResourceEstimate&, const ResourceEstimate&) = default;
};

struct RotationSynthesis {
  std::uint64_t t_per_rotation = 0;
  double achieved_error = 0.0;
};

struct DistanceChoice {
  int distance = 3;
  double achieved_error = 0.0;
};

/// Logical qubits after routing overhead: 2Q + ceil(sqrt(8Q)) + 1.
std::uint64_t algorithmic_qubits(const LogicalCounts& c) noexcept;

/// Equal per-rotation split of `eps_rotations`; T count per rotation is
/// ceil(0.53 log2(1/eps_r) + 5.3). Throws BudgetTooSmall on underflow.
RotationSynthesis rotation_synthesis(const LogicalCounts& c, double eps_rotations);

std::uint64_t total_t_states(const LogicalCounts& c, std::uint64_t t_per_rotation) noexcept;

/// Critical-path length in logical cycles, floored at 1.
std::uint64_t logical_cycles(const LogicalCounts& c, std::uint64_t t_per_rotation) noexcept;

/// Smallest odd d >= 3 with q_alg * cycles * p_L(d) <= eps_logical.
/// Throws DistanceOverflow past d = 99.
DistanceChoice select_code_distance(std::uint64_t q_alg, std::uint64_t cycles, double eps_logical,
                                    const PhysicalParams& p);

/// 15-to-1 distillation factory meeting `target_error` per output T state.
/// Throws TargetUnreachable past 10 rounds and DistanceOverflow past d = 99.
TFactoryDesign design_t_factory(double target_error, const PhysicalParams& p);

/// Factories needed so T-state supply keeps up with the algorithm.
std::uint64_t count_factories(std::uint64_t total_t, std::uint64_t cycles, int distance, const TFactoryDesign& f,
                              const PhysicalParams& p);

/// Full estimate for one circuit under one budget distribution. Pure and
/// deterministic.
ResourceEstimate estimate(const LogicalCounts& c, const BudgetDistribution& b, const PhysicalParams& p);

std::string to_json(const ResourceEstimate& e);

}  // namespace qbudget
