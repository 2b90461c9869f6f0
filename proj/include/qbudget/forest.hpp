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
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "qbudget/budget.hpp"
#include "qbudget/circuit.hpp"
#include "qbudget/dataset.hpp"

namespace qbudget {

inline constexpr std::size_t kFeatureCount = 12;

/// The six logical counts followed by log2(1 + x) of each.
using FeatureVector = std::array<double, kFeatureCount>;

/// Label and prediction vector: (logical, t_states, rotations).
using BudgetVector = std::array<double, 3>;

FeatureVector featurize(const LogicalCounts& c) noexcept;

struct ForestParams {
  std::uint32_t n_trees = 100;
  std::int32_t max_depth = 12;  ///< negative means unlimited
  std::uint32_t min_leaf = 2;
  bool bootstrap = true;
  std::uint32_t features_per_split = 4;

  friend bool operator==(const ForestParams&, const ForestParams&) = default;
};

struct ForestMetadata {
  double total_budget = 0.01;
  CostMetric metric = CostMetric::SpaceTime;
  std::uint64_t seed = 0;
  std::uint64_t n_train = 0;

  friend bool operator==(const ForestMetadata&, const ForestMetadata&) = default;
};

struct TreeNode {
  bool leaf = true;
  std::uint32_t feature = 0;
  double threshold = 0.0;  ///< rows with x[feature] <= threshold go left
  std::uint32_t left = 0;
  std::uint32_t right = 0;
  BudgetVector value{};    ///< leaf mean label
  std::uint32_t rows = 0;  ///< training rows in the leaf, with bootstrap multiplicity

  friend bool operator==(const TreeNode&, const TreeNode&) = default;
};

/// Flat CART tree; node 0 is the root and children follow their parent.
class RegressionTree {
 public:
  RegressionTree() = default;
  explicit RegressionTree(std::vector<TreeNode> nodes) : nodes_(std::move(nodes)) {}

  const BudgetVector& predict(const FeatureVector& x) const;
  const std::vector<TreeNode>& nodes() const noexcept { return nodes_; }
  std::size_t depth() const;

  friend bool operator==(const RegressionTree&, const RegressionTree&) = default;

 private:
  std::vector<TreeNode> nodes_;
};

/// Bagged multi-output regression forest. Immutable once trained.
struct ForestModel {
  ForestParams params;
  ForestMetadata metadata;
  std::vector<RegressionTree> trees;

  /// Arithmetic mean of the tree outputs, before normalization.
  BudgetVector predict_raw(const FeatureVector& x) const;

  friend bool operator==(const ForestModel&, const ForestModel&) = default;
};

/// Throws InvariantViolation on a structurally invalid model.
void validate(const ForestModel& model);

/// Trains on raw feature/label rows. Each tree t draws its bootstrap sample
/// and split features from the stream derived from (seed, t), so the result
/// does not depend on `jobs`.
ForestModel train_rows(const std::vector<FeatureVector>& features, const std::vector<BudgetVector>& labels,
                       const ForestParams& params, std::uint64_t seed, ForestMetadata metadata,
                       unsigned jobs = 1);

/// Trains on accumulated records (features from counts, labels from the
/// best distributions). Throws DatasetTooSmall or MixedBudgets.
ForestModel train(const std::vector<DatasetRecord>& dataset, const ForestParams& params, std::uint64_t seed,
                  unsigned jobs = 1);

/// Mean tree output normalized onto the model's total-budget simplex.
BudgetDistribution predict(const ForestModel& model, const LogicalCounts& c);

struct PredictionSpread {
  BudgetVector mean{};
  BudgetVector variance{};  ///< population variance across trees
};

PredictionSpread prediction_spread(const ForestModel& model, const LogicalCounts& c);

/// Binary model format, all integers and IEEE doubles little-endian:
///
///   "QBFOREST"  u8 version
///   u32 n_trees  i32 max_depth  u32 min_leaf  u8 bootstrap  u32 features_per_split
///   f64 total_budget  u8 metric  u64 seed  u64 n_train
///   u32 tree_count, then per tree: u32 node_count, then per node
///     u8 0 (leaf):  f64 value[3]  u32 rows
///     u8 1 (split): u32 feature  f64 threshold  u32 left  u32 right
///   u64 FNV-1a of every preceding byte
inline constexpr std::uint8_t kModelFormatVersion = 1;

std::string serialize_model(const ForestModel& model);
/// Throws VersionMismatch or CorruptModel.
ForestModel deserialize_model(std::string_view bytes);

void save_model(const ForestModel& model, const std::filesystem::path& path);
ForestModel load_model(const std::filesystem::path& path);

}  // namespace qbudget
