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

#include "qbudget/estimator.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "qbudget/errors.hpp"

namespace qbudget {

namespace {

constexpr const char* kModule = "ftqc-estimator";

std::uint64_t ceil_sqrt(std::uint64_t n) {
  auto s = static_cast<std::uint64_t>(std::sqrt(static_cast<double>(n)));
  while (s * s < n) ++s;
  while (s > 0 && (s - 1) * (s - 1) >= n) --s;
  return s;
}

double* param_slot(PhysicalParams& p, std::string_view name) {
  if (name == "p_phys") return &p.p_phys;
  if (name == "p_threshold") return &p.p_threshold;
  if (name == "prefactor_a") return &p.prefactor_a;
  if (name == "t_phys") return &p.t_phys;
  if (name == "cycle_factor") return &p.cycle_factor;
  if (name == "p_injection") return &p.p_injection;
  return nullptr;
}

}  // namespace

void validate(const PhysicalParams& p) {
  auto fail = [](const std::string& why) { throw InvariantViolation(kModule, "physical params: " + why); };
  if (!(p.p_phys > 0.0 && p.p_phys < p.p_threshold && p.p_threshold < 1.0)) {
    fail("require 0 < p_phys < p_threshold < 1");
  }
  if (!(p.prefactor_a > 0.0) || !std::isfinite(p.prefactor_a)) fail("prefactor_a must be positive");
  if (!(p.t_phys > 0.0) || !std::isfinite(p.t_phys)) fail("t_phys must be positive");
  if (!(p.cycle_factor >= 1.0) || !std::isfinite(p.cycle_factor)) fail("cycle_factor must be >= 1");
  if (!(p.p_injection > 0.0 && p.p_injection < 1.0)) fail("p_injection must lie in (0, 1)");
}

PhysicalParams load_physical_params(std::string_view json_text, bool lenient) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::parse_error& e) {
    throw SchemaError(kModule, "document", e.what());
  }
  if (!doc.is_object()) throw SchemaError(kModule, "document", "expected a JSON object");
  PhysicalParams p;
  for (const auto& [key, value] : doc.items()) {
    double* slot = param_slot(p, key);
    if (slot == nullptr) {
      if (lenient) continue;
      throw SchemaError(kModule, key, "unknown field");
    }
    if (!value.is_number()) throw SchemaError(kModule, key, "expected a number");
    *slot = value.get<double>();
  }
  validate(p);
  return p;
}

PhysicalParams read_params_file(const std::filesystem::path& path, bool lenient) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(kModule, path.string(), "cannot open file");
  std::ostringstream text;
  text << in.rdbuf();
  return load_physical_params(text.str(), lenient);
}

std::string save_physical_params(const PhysicalParams& p) {
  nlohmann::ordered_json doc;
  doc["p_phys"] = p.p_phys;
  doc["p_threshold"] = p.p_threshold;
  doc["prefactor_a"] = p.prefactor_a;
  doc["t_phys"] = p.t_phys;
  doc["cycle_factor"] = p.cycle_factor;
  doc["p_injection"] = p.p_injection;
  return doc.dump(2);
}

double logical_error_rate(int d, const PhysicalParams& p) noexcept {
  return p.prefactor_a * std::pow(p.p_phys / p.p_threshold, (d + 1) / 2);
}

std::uint64_t algorithmic_qubits(const LogicalCounts& c) noexcept {
  return 2 * c.qubits + ceil_sqrt(8 * c.qubits) + 1;
}

RotationSynthesis rotation_synthesis(const LogicalCounts& c, double eps_rotations) {
  if (c.rotation_count == 0) return {};
  if (!(eps_rotations > 0.0)) throw BudgetTooSmall("rotations", "budget must be positive");
  const double per_rotation = eps_rotations / static_cast<double>(c.rotation_count);
  if (!(per_rotation > 0.0)) throw BudgetTooSmall("rotations", "per-rotation error underflows to zero");

  const double bits = -std::log2(per_rotation);
  double t = std::ceil(kSynthesisSlope * bits + kSynthesisOffset);
  if (!std::isfinite(t) || t > 1e15) throw BudgetTooSmall("rotations", "synthesis T count overflows");

  auto achieved_for = [&](double tc) {
    return static_cast<double>(c.rotation_count) * std::exp2(-(tc - kSynthesisOffset) / kSynthesisSlope);
  };
  // Rounding at the ceil boundary can leave the product an ulp above budget.
  while (achieved_for(t) > eps_rotations) t += 1.0;
  return {static_cast<std::uint64_t>(t), achieved_for(t)};
}

std::uint64_t total_t_states(const LogicalCounts& c, std::uint64_t t_per_rotation) noexcept {
  return c.t_count + kToffoliTStates * c.toffoli_count + c.rotation_count * t_per_rotation;
}

std::uint64_t logical_cycles(const LogicalCounts& c, std::uint64_t t_per_rotation) noexcept {
  const std::uint64_t cycles =
      c.measurement_count + c.t_count + kToffoliCycles * c.toffoli_count + c.rotation_depth * t_per_rotation;
  return std::max<std::uint64_t>(cycles, 1);
}

DistanceChoice select_code_distance(std::uint64_t q_alg, std::uint64_t cycles, double eps_logical,
                                    const PhysicalParams& p) {
  if (!(eps_logical > 0.0)) throw BudgetTooSmall("logical", "budget must be positive");
  const double volume = static_cast<double>(q_alg) * static_cast<double>(cycles);
  for (int d = 3; d <= kMaxCodeDistance; d += 2) {
    const double achieved = volume * logical_error_rate(d, p);
    if (achieved <= eps_logical) return {d, achieved};
  }
  throw DistanceOverflow("logical", "no code distance up to " + std::to_string(kMaxCodeDistance) +
                                        " reaches " + std::to_string(eps_logical));
}

TFactoryDesign design_t_factory(double target_error, const PhysicalParams& p) {
  if (!(target_error > 0.0)) throw TargetUnreachable("t_states", "per-T-state target must be positive");

  TFactoryDesign f;
  double e = p.p_injection;
  while (e > target_error) {
    if (f.rounds == kMaxDistillationRounds) {
      throw TargetUnreachable("t_states", "more than " + std::to_string(kMaxDistillationRounds) +
                                              " distillation rounds needed for " + std::to_string(target_error));
    }
    e = kDistillationCoefficient * e * e * e;
    ++f.rounds;
  }
  f.output_error = e;

  if (f.rounds > 0) {
    const double clifford_budget = 0.1 * target_error;
    int d = 3;
    while (kFactoryCliffordOps * f.rounds * logical_error_rate(d, p) > clifford_budget) {
      d += 2;
      if (d > kMaxCodeDistance) {
        throw DistanceOverflow("t_states", "factory distance exceeds " + std::to_string(kMaxCodeDistance));
      }
    }
    f.factory_distance = d;
  }

  const auto df = static_cast<std::uint64_t>(f.factory_distance);
  f.physical_qubits_per_factory =
      kFactoryTilesPerRound * qubits_per_tile(df) * static_cast<std::uint64_t>(std::max(f.rounds, 1));
  // A raw injected state takes one physical cycle.
  f.seconds_per_tstate =
      f.rounds == 0 ? p.t_phys : f.rounds * kFactoryCyclesPerRound * f.factory_distance * p.t_phys;
  return f;
}

std::uint64_t count_factories(std::uint64_t total_t, std::uint64_t cycles, int distance, const TFactoryDesign& f,
                              const PhysicalParams& p) {
  if (total_t == 0) return 0;
  const double wall = static_cast<double>(cycles) * p.cycle_factor * distance * p.t_phys;
  const double needed = std::ceil(static_cast<double>(total_t) * f.seconds_per_tstate / wall);
  return std::max<std::uint64_t>(static_cast<std::uint64_t>(needed), 1);
}

ResourceEstimate estimate(const LogicalCounts& c, const BudgetDistribution& b, const PhysicalParams& p) {
  validate(b, kModule);

  ResourceEstimate r;
  const RotationSynthesis synth = rotation_synthesis(c, b.rotations);
  r.t_per_rotation = synth.t_per_rotation;
  r.achieved_rotation_error = synth.achieved_error;
  r.total_t_states = total_t_states(c, r.t_per_rotation);
  r.logical_cycles = logical_cycles(c, r.t_per_rotation);
  r.algorithmic_qubits = algorithmic_qubits(c);

  const DistanceChoice dist = select_code_distance(r.algorithmic_qubits, r.logical_cycles, b.logical, p);
  r.code_distance = dist.distance;
  r.achieved_logical_error = dist.achieved_error;

  const double t_states = static_cast<double>(r.total_t_states);
  double target = b.t_states / std::max(t_states, 1.0);
  r.factory_design = design_t_factory(target, p);
  // total_t * (b / total_t) may round above b; tighten by ulps if so.
  for (int guard = 0; guard < 64 && t_states * r.factory_design.output_error > b.t_states; ++guard) {
    target = std::nextafter(target, 0.0);
    r.factory_design = design_t_factory(target, p);
  }
  r.achieved_tstate_error = t_states * r.factory_design.output_error;

  r.factory_count = count_factories(r.total_t_states, r.logical_cycles, r.code_distance, r.factory_design, p);
  const auto d = static_cast<std::uint64_t>(r.code_distance);
  r.physical_qubits =
      r.algorithmic_qubits * qubits_per_tile(d) + r.factory_count * r.factory_design.physical_qubits_per_factory;
  r.runtime_seconds = static_cast<double>(r.logical_cycles) * p.cycle_factor * r.code_distance * p.t_phys;
  r.space_time_cost = static_cast<double>(r.physical_qubits) * r.runtime_seconds;
  return r;
}

std::string to_json(const ResourceEstimate& e) {
  nlohmann::ordered_json f;
  f["rounds"] = e.factory_design.rounds;
  f["factory_distance"] = e.factory_design.factory_distance;
  f["output_error"] = e.factory_design.output_error;
  f["physical_qubits_per_factory"] = e.factory_design.physical_qubits_per_factory;
  f["seconds_per_tstate"] = e.factory_design.seconds_per_tstate;

  nlohmann::ordered_json doc;
  doc["physical_qubits"] = e.physical_qubits;
  doc["runtime_seconds"] = e.runtime_seconds;
  doc["space_time_cost"] = e.space_time_cost;
  doc["code_distance"] = e.code_distance;
  doc["logical_cycles"] = e.logical_cycles;
  doc["algorithmic_qubits"] = e.algorithmic_qubits;
  doc["t_per_rotation"] = e.t_per_rotation;
  doc["total_t_states"] = e.total_t_states;
  doc["factory_count"] = e.factory_count;
  doc["factory_design"] = f;
  doc["achieved_logical_error"] = e.achieved_logical_error;
  doc["achieved_tstate_error"] = e.achieved_tstate_error;
  doc["achieved_rotation_error"] = e.achieved_rotation_error;
  return doc.dump(2);
}

}  // namespace qbudget
