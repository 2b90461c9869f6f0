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
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "qbudget/budget.hpp"
#include "qbudget/circuit.hpp"
#include "qbudget/estimator.hpp"

namespace qbudget {

/// What "best" means when comparing budget distributions.
enum class CostMetric : std::uint8_t { SpaceTime, QubitsOnly, TimeOnly };

std::string_view metric_name(CostMetric m) noexcept;
std::optional<CostMetric> metric_from_name(std::string_view name) noexcept;

/// Value minimized by `m`: physical_qubits * runtime_seconds, physical_qubits,
/// or runtime_seconds.
double cost(const ResourceEstimate& e, CostMetric m) noexcept;

struct CircuitInput {
  std::string id;
  LogicalCounts counts;
};

/// One circuit's best-found budget distribution. Costs are values of
/// `metric`, so records of different metrics are not comparable.
struct DatasetRecord {
  std::string circuit_id;
  LogicalCounts counts;
  BudgetDistribution best_distribution;
  double best_cost = 0.0;
  double uniform_cost = 0.0;
  double total_budget = 0.0;
  CostMetric metric = CostMetric::SpaceTime;
  std::uint64_t n_samples = 0;
  std::uint64_t seed = 0;

  friend bool operator==(const DatasetRecord&, const DatasetRecord&) = default;
};

void validate(const DatasetRecord& r);

struct AccumulateOptions {
  std::uint64_t n_samples = 1000;
  double total_budget = 0.01;
  CostMetric metric = CostMetric::SpaceTime;
  std::uint64_t seed = 0;
  PhysicalParams params;
  unsigned jobs = 1;
};

struct SkippedCircuit {
  std::string circuit_id;
  std::string error;
};

struct AccumulationResult {
  std::vector<DatasetRecord> records;
  std::vector<SkippedCircuit> skipped;
  /// Infeasible candidates dropped inside otherwise successful circuits.
  std::uint64_t skipped_candidates = 0;
};

/// Candidate list of one circuit: the uniform distribution at index 0, then
/// `n_samples` draws from the stream derived from (seed, hash(circuit_id)).
/// The list for n is a prefix of the list for any larger n.
std::vector<BudgetDistribution> candidate_distributions(std::string_view circuit_id, std::uint64_t n_samples,
                                                        double total_budget, std::uint64_t seed);

/// Evaluates every candidate of one circuit and keeps the cheapest (lowest
/// index on ties). Throws the estimator's error when the uniform candidate
/// is infeasible, since the baseline cost would be undefined.
DatasetRecord accumulate_circuit(const CircuitInput& circuit, const AccumulateOptions& options,
                                 std::uint64_t* skipped_candidates = nullptr);

/// Runs `accumulate_circuit` over all circuits, in parallel when
/// options.jobs > 1; records keep input order. Throws AccumulationFailed
/// when every circuit is skipped.
AccumulationResult accumulate(const std::vector<CircuitInput>& circuits, const AccumulateOptions& options);

/// JSON-lines codec. Reals are written with 17 significant digits.
std::string format_record(const DatasetRecord& r);
DatasetRecord parse_record(std::string_view line, std::size_t line_number);

void save_dataset(const std::vector<DatasetRecord>& records, const std::filesystem::path& path);
std::vector<DatasetRecord> load_dataset(const std::filesystem::path& path);

}  // namespace qbudget
