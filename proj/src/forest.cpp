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

#include "qbudget/forest.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include "qbudget/errors.hpp"
#include "qbudget/parallel.hpp"
#include "qbudget/random.hpp"

namespace qbudget {

namespace {

constexpr const char* kModule = "forest-predictor";
constexpr std::string_view kMagic = "QBFOREST";

struct TrainingSet {
  const std::vector<FeatureVector>& x;
  const std::vector<BudgetVector>& y;
};

class TreeBuilder {
 public:
  TreeBuilder(TrainingSet data, const ForestParams& params, Rng rng)
      : data_(data), params_(params), rng_(std::move(rng)) {}

  RegressionTree build(std::vector<std::uint32_t> rows) {
    grow(rows, 0);
    return RegressionTree(std::move(nodes_));
  }

 private:
  struct Split {
    bool found = false;
    double score = 0.0;
    std::uint32_t feature = 0;
    double threshold = 0.0;
  };

  bool depth_exhausted(std::size_t depth) const {
    return params_.max_depth >= 0 && depth >= static_cast<std::size_t>(params_.max_depth);
  }

  bool pure(const std::vector<std::uint32_t>& rows) const {
    const BudgetVector& first = data_.y[rows.front()];
    return std::all_of(rows.begin(), rows.end(), [&](std::uint32_t r) { return data_.y[r] == first; });
  }

  BudgetVector mean(const std::vector<std::uint32_t>& rows) const {
    BudgetVector sum{};
    for (auto r : rows) {
      for (std::size_t o = 0; o < 3; ++o) sum[o] += data_.y[r][o];
    }
    for (auto& s : sum) s /= static_cast<double>(rows.size());
    return sum;
  }

  // Best split on one feature. Maximizing sum_o (S_L^2/n_L + S_R^2/n_R)
  // minimizes the summed within-child squared error over all outputs.
  void scan_feature(std::vector<std::uint32_t>& rows, std::uint32_t f, Split& best) const {
    std::sort(rows.begin(), rows.end(), [&](std::uint32_t a, std::uint32_t b) {
      const double xa = data_.x[a][f];
      const double xb = data_.x[b][f];
      return xa < xb || (xa == xb && a < b);
    });
    const std::size_t n = rows.size();
    BudgetVector total{};
    for (auto r : rows) {
      for (std::size_t o = 0; o < 3; ++o) total[o] += data_.y[r][o];
    }
    BudgetVector left{};
    const std::size_t min_leaf = params_.min_leaf;
    for (std::size_t i = 1; i < n; ++i) {
      for (std::size_t o = 0; o < 3; ++o) left[o] += data_.y[rows[i - 1]][o];
      if (i < min_leaf || n - i < min_leaf) continue;
      const double lo = data_.x[rows[i - 1]][f];
      const double hi = data_.x[rows[i]][f];
      if (!(lo < hi)) continue;
      double score = 0.0;
      for (std::size_t o = 0; o < 3; ++o) {
        const double right = total[o] - left[o];
        score += left[o] * left[o] / static_cast<double>(i) + right * right / static_cast<double>(n - i);
      }
      if (!best.found || score > best.score) {
        double threshold = lo + (hi - lo) / 2.0;
        if (!(threshold < hi)) threshold = lo;
        best = {true, score, f, threshold};
      }
    }
  }

  std::uint32_t make_leaf(const std::vector<std::uint32_t>& rows) {
    TreeNode leaf;
    leaf.leaf = true;
    leaf.value = mean(rows);
    leaf.rows = static_cast<std::uint32_t>(rows.size());
    nodes_.push_back(leaf);
    return static_cast<std::uint32_t>(nodes_.size() - 1);
  }

  std::uint32_t grow(std::vector<std::uint32_t>& rows, std::size_t depth) {
    if (depth_exhausted(depth) || rows.size() < 2 * static_cast<std::size_t>(params_.min_leaf) || pure(rows)) {
      return make_leaf(rows);
    }

    // Random feature order; the first features_per_split are candidates, the
    // rest are consulted only if none of those admits a valid split.
    std::array<std::uint32_t, kFeatureCount> order{};
    std::iota(order.begin(), order.end(), 0u);
    for (std::size_t i = kFeatureCount - 1; i > 0; --i) {
      std::swap(order[i], order[rng_.below(i + 1)]);
    }
    Split best;
    for (std::size_t k = 0; k < kFeatureCount; ++k) {
      if (k >= params_.features_per_split && best.found) break;
      scan_feature(rows, order[k], best);
    }
    if (!best.found) return make_leaf(rows);

    std::vector<std::uint32_t> left_rows;
    std::vector<std::uint32_t> right_rows;
    for (auto r : rows) {
      (data_.x[r][best.feature] <= best.threshold ? left_rows : right_rows).push_back(r);
    }
    rows.clear();
    rows.shrink_to_fit();

    const auto index = static_cast<std::uint32_t>(nodes_.size());
    TreeNode split;
    split.leaf = false;
    split.feature = best.feature;
    split.threshold = best.threshold;
    nodes_.push_back(split);
    const std::uint32_t l = grow(left_rows, depth + 1);
    const std::uint32_t r = grow(right_rows, depth + 1);
    nodes_[index].left = l;
    nodes_[index].right = r;
    return index;
  }

  TrainingSet data_;
  const ForestParams& params_;
  Rng rng_;
  std::vector<TreeNode> nodes_;
};

void check_params(const ForestParams& p) {
  if (p.n_trees == 0) throw InvariantViolation(kModule, "n_trees must be >= 1");
  if (p.min_leaf == 0) throw InvariantViolation(kModule, "min_leaf must be >= 1");
  if (p.features_per_split == 0 || p.features_per_split > kFeatureCount) {
    throw InvariantViolation(kModule, "features_per_split must lie in [1, 12]");
  }
}

// Little-endian byte codec.
class ByteWriter {
 public:
  void u8(std::uint8_t v) { out_.push_back(static_cast<char>(v)); }
  void u32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i) u8(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void u64(std::uint64_t v) {
    for (int i = 0; i < 8; ++i) u8(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }
  void raw(std::string_view s) { out_.append(s); }
  std::string take() { return std::move(out_); }
  const std::string& bytes() const { return out_; }

 private:
  std::string out_;
};

class ByteReader {
 public:
  explicit ByteReader(std::string_view in) : in_(in) {}

  std::uint8_t u8() {
    need(1);
    return static_cast<std::uint8_t>(in_[pos_++]);
  }
  std::uint32_t u32() {
    need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(static_cast<std::uint8_t>(in_[pos_++])) << (8 * i);
    return v;
  }
  std::uint64_t u64() {
    need(8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(static_cast<std::uint8_t>(in_[pos_++])) << (8 * i);
    return v;
  }
  double f64() { return std::bit_cast<double>(u64()); }
  std::size_t remaining() const { return in_.size() - pos_; }

 private:
  void need(std::size_t n) const {
    if (in_.size() - pos_ < n) throw CorruptModel("truncated model data");
  }

  std::string_view in_;
  std::size_t pos_ = 0;
};

}  // namespace

FeatureVector featurize(const LogicalCounts& c) noexcept {
  const std::array<std::uint64_t, 6> raw = {c.qubits,        c.t_count,       c.rotation_count,
                                            c.rotation_depth, c.toffoli_count, c.measurement_count};
  FeatureVector f{};
  for (std::size_t i = 0; i < raw.size(); ++i) {
    f[i] = static_cast<double>(raw[i]);
    f[i + raw.size()] = std::log2(1.0 + static_cast<double>(raw[i]));
  }
  return f;
}

const BudgetVector& RegressionTree::predict(const FeatureVector& x) const {
  std::size_t i = 0;
  while (!nodes_[i].leaf) {
    const TreeNode& n = nodes_[i];
    i = x[n.feature] <= n.threshold ? n.left : n.right;
  }
  return nodes_[i].value;
}

std::size_t RegressionTree::depth() const {
  if (nodes_.empty()) return 0;
  std::vector<std::size_t> depth(nodes_.size(), 0);
  std::size_t deepest = 0;
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    deepest = std::max(deepest, depth[i]);
    if (!nodes_[i].leaf) {
      depth[nodes_[i].left] = depth[i] + 1;
      depth[nodes_[i].right] = depth[i] + 1;
    }
  }
  return deepest;
}

BudgetVector ForestModel::predict_raw(const FeatureVector& x) const {
  BudgetVector sum{};
  for (const auto& tree : trees) {
    const BudgetVector& v = tree.predict(x);
    for (std::size_t o = 0; o < 3; ++o) sum[o] += v[o];
  }
  for (auto& s : sum) s /= static_cast<double>(trees.size());
  return sum;
}

void validate(const ForestModel& model) {
  auto fail = [](const std::string& why) { throw InvariantViolation(kModule, why); };
  check_params(model.params);
  if (!(model.metadata.total_budget > 0.0 && model.metadata.total_budget < 1.0)) fail("total_budget outside (0, 1)");
  if (model.trees.size() != model.params.n_trees) fail("tree count differs from n_trees");
  for (std::size_t t = 0; t < model.trees.size(); ++t) {
    const auto& nodes = model.trees[t].nodes();
    const std::string where = "tree " + std::to_string(t) + ": ";
    if (nodes.empty()) fail(where + "no nodes");
    std::vector<int> parents(nodes.size(), 0);
    for (std::size_t i = 0; i < nodes.size(); ++i) {
      const TreeNode& n = nodes[i];
      if (n.leaf) {
        for (double v : n.value) {
          if (!std::isfinite(v) || v < 0.0) fail(where + "leaf value negative or non-finite");
        }
        if (n.rows < model.params.min_leaf) fail(where + "leaf holds fewer than min_leaf rows");
        continue;
      }
      if (n.feature >= kFeatureCount) fail(where + "feature index out of range");
      if (!std::isfinite(n.threshold)) fail(where + "non-finite threshold");
      if (n.left <= i || n.right <= i || n.left >= nodes.size() || n.right >= nodes.size() || n.left == n.right) {
        fail(where + "child index out of order");
      }
      ++parents[n.left];
      ++parents[n.right];
    }
    for (std::size_t i = 1; i < nodes.size(); ++i) {
      if (parents[i] != 1) fail(where + "node " + std::to_string(i) + " is not referenced exactly once");
    }
    if (model.params.max_depth >= 0 && model.trees[t].depth() > static_cast<std::size_t>(model.params.max_depth)) {
      fail(where + "depth exceeds max_depth");
    }
  }
}

ForestModel train_rows(const std::vector<FeatureVector>& features, const std::vector<BudgetVector>& labels,
                       const ForestParams& params, std::uint64_t seed, ForestMetadata metadata, unsigned jobs) {
  check_params(params);
  if (features.size() != labels.size()) throw InvariantViolation(kModule, "feature and label row counts differ");
  const std::size_t n = features.size();
  if (n < 2 * static_cast<std::size_t>(params.min_leaf) || n == 0) {
    throw DatasetTooSmall(kModule, "need at least " + std::to_string(2 * params.min_leaf) + " rows, got " +
                                       std::to_string(n));
  }
  for (const auto& y : labels) {
    for (double v : y) {
      if (!std::isfinite(v) || v < 0.0) throw InvariantViolation(kModule, "labels must be finite and non-negative");
    }
  }

  ForestModel model;
  model.params = params;
  metadata.seed = seed;
  metadata.n_train = n;
  model.metadata = metadata;
  model.trees.resize(params.n_trees);

  const TrainingSet data{features, labels};
  parallel_for(params.n_trees, jobs, [&](std::size_t t) {
    Rng rng = Rng::derive(seed, t);
    std::vector<std::uint32_t> rows(n);
    if (params.bootstrap) {
      for (auto& r : rows) r = static_cast<std::uint32_t>(rng.below(n));
    } else {
      std::iota(rows.begin(), rows.end(), 0u);
    }
    model.trees[t] = TreeBuilder(data, params, std::move(rng)).build(std::move(rows));
  });
  return model;
}

ForestModel train(const std::vector<DatasetRecord>& dataset, const ForestParams& params, std::uint64_t seed,
                  unsigned jobs) {
  if (dataset.empty()) throw DatasetTooSmall(kModule, "empty dataset");
  const double total = dataset.front().total_budget;
  const CostMetric metric = dataset.front().metric;
  std::vector<FeatureVector> x;
  std::vector<BudgetVector> y;
  x.reserve(dataset.size());
  y.reserve(dataset.size());
  for (const auto& r : dataset) {
    if (r.total_budget != total || r.metric != metric) {
      throw MixedBudgets("record '" + r.circuit_id + "' has total_budget/metric differing from the first record");
    }
    x.push_back(featurize(r.counts));
    y.push_back(r.best_distribution.components());
  }
  ForestMetadata meta;
  meta.total_budget = total;
  meta.metric = metric;
  return train_rows(x, y, params, seed, meta, jobs);
}

BudgetDistribution predict(const ForestModel& model, const LogicalCounts& c) {
  return normalize(model.predict_raw(featurize(c)), model.metadata.total_budget);
}

PredictionSpread prediction_spread(const ForestModel& model, const LogicalCounts& c) {
  const FeatureVector x = featurize(c);
  PredictionSpread s;
  s.mean = model.predict_raw(x);
  for (const auto& tree : model.trees) {
    const BudgetVector& v = tree.predict(x);
    for (std::size_t o = 0; o < 3; ++o) s.variance[o] += (v[o] - s.mean[o]) * (v[o] - s.mean[o]);
  }
  for (auto& v : s.variance) v /= static_cast<double>(model.trees.size());
  return s;
}

std::string serialize_model(const ForestModel& model) {
  ByteWriter w;
  w.raw(kMagic);
  w.u8(kModelFormatVersion);
  w.u32(model.params.n_trees);
  w.u32(static_cast<std::uint32_t>(model.params.max_depth));
  w.u32(model.params.min_leaf);
  w.u8(model.params.bootstrap ? 1 : 0);
  w.u32(model.params.features_per_split);
  w.f64(model.metadata.total_budget);
  w.u8(static_cast<std::uint8_t>(model.metadata.metric));
  w.u64(model.metadata.seed);
  w.u64(model.metadata.n_train);
  w.u32(static_cast<std::uint32_t>(model.trees.size()));
  for (const auto& tree : model.trees) {
    w.u32(static_cast<std::uint32_t>(tree.nodes().size()));
    for (const auto& n : tree.nodes()) {
      if (n.leaf) {
        w.u8(0);
        for (double v : n.value) w.f64(v);
        w.u32(n.rows);
      } else {
        w.u8(1);
        w.u32(n.feature);
        w.f64(n.threshold);
        w.u32(n.left);
        w.u32(n.right);
      }
    }
  }
  w.u64(stable_hash(w.bytes()));
  return w.take();
}

ForestModel deserialize_model(std::string_view bytes) {
  if (bytes.size() < kMagic.size() + 1 || bytes.substr(0, kMagic.size()) != kMagic) {
    throw CorruptModel("missing model magic bytes");
  }
  const auto version = static_cast<std::uint8_t>(bytes[kMagic.size()]);
  if (version != kModelFormatVersion) throw VersionMismatch(version, kModelFormatVersion);
  if (bytes.size() < kMagic.size() + 1 + 8) throw CorruptModel("truncated model data");

  const std::string_view body = bytes.substr(0, bytes.size() - 8);
  ByteReader trailer(bytes.substr(bytes.size() - 8));
  if (trailer.u64() != stable_hash(body)) throw CorruptModel("checksum mismatch (truncated or modified file)");

  ByteReader r(body.substr(kMagic.size() + 1));
  ForestModel model;
  model.params.n_trees = r.u32();
  model.params.max_depth = static_cast<std::int32_t>(r.u32());
  model.params.min_leaf = r.u32();
  const std::uint8_t bootstrap = r.u8();
  if (bootstrap > 1) throw CorruptModel("bad bootstrap flag");
  model.params.bootstrap = bootstrap == 1;
  model.params.features_per_split = r.u32();
  model.metadata.total_budget = r.f64();
  const std::uint8_t metric = r.u8();
  if (metric > static_cast<std::uint8_t>(CostMetric::TimeOnly)) throw CorruptModel("unknown metric tag");
  model.metadata.metric = static_cast<CostMetric>(metric);
  model.metadata.seed = r.u64();
  model.metadata.n_train = r.u64();

  const std::uint32_t tree_count = r.u32();
  // Smallest possible tree (one leaf) is 33 bytes; reject absurd counts early.
  if (tree_count > r.remaining() / 33 + 1) throw CorruptModel("tree count exceeds file size");
  model.trees.reserve(tree_count);
  for (std::uint32_t t = 0; t < tree_count; ++t) {
    const std::uint32_t count = r.u32();
    // A split node is 21 bytes, a leaf 29.
    if (count == 0 || count > r.remaining() / 21 + 1) throw CorruptModel("node count exceeds file size");
    std::vector<TreeNode> nodes(count);
    for (auto& n : nodes) {
      const std::uint8_t kind = r.u8();
      if (kind == 0) {
        n.leaf = true;
        for (auto& v : n.value) v = r.f64();
        n.rows = r.u32();
      } else if (kind == 1) {
        n.leaf = false;
        n.feature = r.u32();
        n.threshold = r.f64();
        n.left = r.u32();
        n.right = r.u32();
      } else {
        throw CorruptModel("unknown node kind " + std::to_string(kind));
      }
    }
    model.trees.emplace_back(std::move(nodes));
  }
  if (r.remaining() != 0) throw CorruptModel("trailing bytes after tree data");
  try {
    validate(model);
  } catch (const InvariantViolation& e) {
    throw CorruptModel(e.detail());
  }
  return model;
}

void save_model(const ForestModel& model, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError(kModule, path.string(), "cannot open for writing");
  const std::string bytes = serialize_model(model);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError(kModule, path.string(), "write failed");
}

ForestModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(kModule, path.string(), "cannot open file");
  std::ostringstream buf;
  buf << in.rdbuf();
  return deserialize_model(buf.str());
}

}  // namespace qbudget
