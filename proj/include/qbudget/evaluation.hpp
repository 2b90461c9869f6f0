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
#include <utility>
#include <vector>

#include "qbudget/dataset.hpp"
#include "qbudget/estimator.hpp"
#include "qbudget/forest.hpp"

namespace qbudget {

/// Seeded Fisher-Yates shuffle, then the first floor(ratio * N) records
/// become the training side. Throws DatasetTooSmall for N < 4 or when a
/// side would be empty.
std::pair<std::vector<DatasetRecord>, std::vector<DatasetRecord>> split(const std::vector<DatasetRecord>& dataset,
                                                                      double ratio, std::uint64_t seed);

struct EvaluationRow {
  std::string circuit_id;
  double uniform_cost = 0.0;
  double predicted_cost = 0.0;  ///< equals uniform_cost when the prediction fell back
  double chosen_cost = 0.0;     ///< min(predicted_cost, uniform_cost)
  double improvement_fraction = 0.0;
  bool fallback = false;
  BudgetDistribution predicted;
  // Dataset label (best sampled distribution), re-estimated under the same
  // params, for the label-versus-model comparison.
  BudgetDistribution label;
  double label_cost = 0.0;
  double label_improvement_fraction = 0.0;

  friend bool operator==(const EvaluationRow&, const EvaluationRow&) = default;
};

struct Aggregates {
  double fraction_improved = 0.0;
  double mean_improvement = 0.0;
  double max_improvement = 0.0;
  double mean_logical_fraction = 0.0;
  double mean_tstates_fraction = 0.0;
  double mean_rotations_fraction = 0.0;

  friend bool operator==(const Aggregates&, const Aggregates&) = default;
};

/// Equal-width bins over [lo, hi]; the last bin is closed on the right and
/// out-of-range values are clamped into the end bins.
struct Histogram {
  double lo = 0.0;
  double hi = 1.0;
  std::vector<std::uint64_t> counts;

  friend bool operator==(const Histogram&, const Histogram&) = default;
};

Histogram make_histogram(const std::vector<double>& values, double lo, double hi, std::size_t bins);

/// One series (model predictions or dataset labels) of the report.
struct SeriesHistograms {
  Histogram improvement_percent;  ///< 25 bins over [0, 100]
  Histogram logical;              ///< 30 bins over [0, total_budget] each
  Histogram t_states;
  Histogram rotations;

  friend bool operator==(const SeriesHistograms&, const SeriesHistograms&) = default;
};

struct ReportMetadata {
  double total_budget = 0.0;
  CostMetric metric = CostMetric::SpaceTime;
  std::uint64_t split_seed = 0;
  std::uint64_t model_seed = 0;
  double split_ratio = 0.75;
  std::uint64_t n_train = 0;
  std::uint64_t n_test = 0;
  std::uint64_t fallback_count = 0;

  friend bool operator==(const ReportMetadata&, const ReportMetadata&) = default;
};

struct EvaluationReport {
  std::vector<EvaluationRow> rows;
  Aggregates model;   ///< statistics of the model's predictions
  Aggregates labels;  ///< same statistics for the dataset's best distributions
  SeriesHistograms model_histograms;
  SeriesHistograms label_histograms;
  ReportMetadata metadata;

  friend bool operator==(const EvaluationReport&, const EvaluationReport&) = default;
};

inline constexpr std::size_t kImprovementBins = 25;
inline constexpr std::size_t kBudgetBins = 30;

/// Re-estimates every test record under the model's prediction and the
/// uniform distribution and keeps the cheaper one. A prediction the
/// estimator rejects falls back to uniform and is counted. Rows are
/// independent and may run on `jobs` threads; output does not depend on it.
EvaluationReport evaluate(const ForestModel& model, const std::vector<DatasetRecord>& test,
                          const PhysicalParams& params, unsigned jobs = 1);

std::string report_to_json(const EvaluationReport& report);
EvaluationReport report_from_json(std::string_view json_text);

enum class ReportFormat : std::uint8_t { Json, Csv };

/// Json writes one file at `path`. Csv treats `path` as a directory and
/// writes rows.csv, aggregates.csv, histogram_improvement.csv and
/// histogram_budget.csv.
void export_report(const EvaluationReport& report, const std::filesystem::path& path, ReportFormat format);
EvaluationReport read_report(const std::filesystem::path& path);

}  // namespace qbudget
