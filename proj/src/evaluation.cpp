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

#include "qbudget/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "qbudget/errors.hpp"
#include "qbudget/parallel.hpp"
#include "qbudget/random.hpp"

namespace qbudget {

namespace {

constexpr const char* kModule = "evaluation-pipeline";

using Json = nlohmann::ordered_json;

struct Outcome {
  double cost = 0.0;
  bool ok = false;
};

Outcome try_estimate(const LogicalCounts& c, const BudgetDistribution& b, const PhysicalParams& p, CostMetric m) {
  try {
    return {cost(estimate(c, b, p), m), true};
  } catch (const BudgetTooSmall&) {
  } catch (const DistanceOverflow&) {
  } catch (const TargetUnreachable&) {
  } catch (const InvariantViolation&) {
  }
  return {};
}

Aggregates summarize(const std::vector<double>& improvements, const std::vector<BudgetDistribution>& dists) {
  Aggregates a;
  if (improvements.empty()) return a;
  const auto n = static_cast<double>(improvements.size());
  std::size_t improved = 0;
  for (double v : improvements) {
    if (v > 0.0) ++improved;
    a.mean_improvement += v;
    a.max_improvement = std::max(a.max_improvement, v);
  }
  a.fraction_improved = static_cast<double>(improved) / n;
  a.mean_improvement /= n;
  for (const auto& d : dists) {
    a.mean_logical_fraction += d.logical / d.total;
    a.mean_tstates_fraction += d.t_states / d.total;
    a.mean_rotations_fraction += d.rotations / d.total;
  }
  a.mean_logical_fraction /= n;
  a.mean_tstates_fraction /= n;
  a.mean_rotations_fraction /= n;
  return a;
}

SeriesHistograms histograms(const std::vector<double>& improvements, const std::vector<BudgetDistribution>& dists,
                            double total) {
  std::vector<double> percent;
  std::vector<double> logical;
  std::vector<double> t_states;
  std::vector<double> rotations;
  for (double v : improvements) percent.push_back(100.0 * v);
  for (const auto& d : dists) {
    logical.push_back(d.logical);
    t_states.push_back(d.t_states);
    rotations.push_back(d.rotations);
  }
  return {make_histogram(percent, 0.0, 100.0, kImprovementBins), make_histogram(logical, 0.0, total, kBudgetBins),
          make_histogram(t_states, 0.0, total, kBudgetBins), make_histogram(rotations, 0.0, total, kBudgetBins)};
}

Json dist_json(const BudgetDistribution& b) {
  Json j;
  j["logical"] = b.logical;
  j["t_states"] = b.t_states;
  j["rotations"] = b.rotations;
  j["total"] = b.total;
  return j;
}

BudgetDistribution dist_from(const Json& j) {
  return {j.at("logical").get<double>(), j.at("t_states").get<double>(), j.at("rotations").get<double>(),
          j.at("total").get<double>()};
}

Json aggregates_json(const Aggregates& a) {
  Json j;
  j["fraction_improved"] = a.fraction_improved;
  j["mean_improvement"] = a.mean_improvement;
  j["max_improvement"] = a.max_improvement;
  j["mean_logical_fraction"] = a.mean_logical_fraction;
  j["mean_tstates_fraction"] = a.mean_tstates_fraction;
  j["mean_rotations_fraction"] = a.mean_rotations_fraction;
  return j;
}

Aggregates aggregates_from(const Json& j) {
  Aggregates a;
  a.fraction_improved = j.at("fraction_improved").get<double>();
  a.mean_improvement = j.at("mean_improvement").get<double>();
  a.max_improvement = j.at("max_improvement").get<double>();
  a.mean_logical_fraction = j.at("mean_logical_fraction").get<double>();
  a.mean_tstates_fraction = j.at("mean_tstates_fraction").get<double>();
  a.mean_rotations_fraction = j.at("mean_rotations_fraction").get<double>();
  return a;
}

Json histogram_json(const Histogram& h) {
  Json j;
  j["lo"] = h.lo;
  j["hi"] = h.hi;
  j["counts"] = h.counts;
  return j;
}

Histogram histogram_from(const Json& j) {
  return {j.at("lo").get<double>(), j.at("hi").get<double>(), j.at("counts").get<std::vector<std::uint64_t>>()};
}

Json series_json(const SeriesHistograms& s) {
  Json j;
  j["improvement_percent"] = histogram_json(s.improvement_percent);
  j["logical"] = histogram_json(s.logical);
  j["t_states"] = histogram_json(s.t_states);
  j["rotations"] = histogram_json(s.rotations);
  return j;
}

SeriesHistograms series_from(const Json& j) {
  return {histogram_from(j.at("improvement_percent")), histogram_from(j.at("logical")),
          histogram_from(j.at("t_states")), histogram_from(j.at("rotations"))};
}

std::string real(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError(kModule, path.string(), "cannot open for writing");
  out << text;
  if (!out) throw IoError(kModule, path.string(), "write failed");
}

}  // namespace

std::pair<std::vector<DatasetRecord>, std::vector<DatasetRecord>> split(const std::vector<DatasetRecord>& dataset,
                                                                      double ratio, std::uint64_t seed) {
  if (!(ratio > 0.0 && ratio < 1.0)) throw InvariantViolation(kModule, "split ratio must lie in (0, 1)");
  const std::size_t n = dataset.size();
  if (n < 4) throw DatasetTooSmall(kModule, "need at least 4 records to split, got " + std::to_string(n));
  const auto n_train = static_cast<std::size_t>(std::floor(ratio * static_cast<double>(n)));
  if (n_train == 0 || n_train == n) {
    throw DatasetTooSmall(kModule, "ratio " + std::to_string(ratio) + " leaves one side of the split empty");
  }

  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  Rng rng(seed);
  for (std::size_t i = n - 1; i > 0; --i) std::swap(order[i], order[rng.below(i + 1)]);

  std::pair<std::vector<DatasetRecord>, std::vector<DatasetRecord>> out;
  out.first.reserve(n_train);
  out.second.reserve(n - n_train);
  for (std::size_t i = 0; i < n; ++i) (i < n_train ? out.first : out.second).push_back(dataset[order[i]]);
  return out;
}

Histogram make_histogram(const std::vector<double>& values, double lo, double hi, std::size_t bins) {
  Histogram h{lo, hi, std::vector<std::uint64_t>(bins, 0)};
  if (bins == 0 || !(hi > lo)) return h;
  const double width = (hi - lo) / static_cast<double>(bins);
  for (double v : values) {
    double pos = std::floor((v - lo) / width);
    if (!(pos >= 0.0)) pos = 0.0;
    auto bin = static_cast<std::size_t>(pos);
    if (bin >= bins) bin = bins - 1;
    ++h.counts[bin];
  }
  return h;
}

EvaluationReport evaluate(const ForestModel& model, const std::vector<DatasetRecord>& test,
                          const PhysicalParams& params, unsigned jobs) {
  validate(params);
  const double total = model.metadata.total_budget;
  const CostMetric metric = model.metadata.metric;
  for (const auto& r : test) {
    if (r.total_budget != total) {
      throw InvariantViolation(kModule, "record '" + r.circuit_id + "' has total_budget " +
                                            std::to_string(r.total_budget) + " but the model was trained for " +
                                            std::to_string(total));
    }
  }

  const BudgetDistribution uniform = uniform_distribution(total);
  std::vector<EvaluationRow> rows(test.size());
  parallel_for(test.size(), jobs, [&](std::size_t i) {
    const DatasetRecord& rec = test[i];
    EvaluationRow& row = rows[i];
    row.circuit_id = rec.circuit_id;
    row.uniform_cost = cost(estimate(rec.counts, uniform, params), metric);

    row.predicted = predict(model, rec.counts);
    const Outcome pred = try_estimate(rec.counts, row.predicted, params, metric);
    row.fallback = !pred.ok;
    row.predicted_cost = pred.ok ? pred.cost : row.uniform_cost;
    row.chosen_cost = std::min(row.predicted_cost, row.uniform_cost);
    row.improvement_fraction = 1.0 - row.chosen_cost / row.uniform_cost;

    row.label = rec.best_distribution;
    const Outcome label = try_estimate(rec.counts, row.label, params, metric);
    row.label_cost = label.ok ? label.cost : row.uniform_cost;
    row.label_improvement_fraction = 1.0 - std::min(row.label_cost, row.uniform_cost) / row.uniform_cost;
  });

  EvaluationReport report;
  std::vector<double> model_impr;
  std::vector<double> label_impr;
  std::vector<BudgetDistribution> model_dists;
  std::vector<BudgetDistribution> label_dists;
  for (const auto& row : rows) {
    model_impr.push_back(row.improvement_fraction);
    label_impr.push_back(row.label_improvement_fraction);
    model_dists.push_back(row.predicted);
    label_dists.push_back(row.label);
    if (row.fallback) ++report.metadata.fallback_count;
  }
  report.model = summarize(model_impr, model_dists);
  report.labels = summarize(label_impr, label_dists);
  report.model_histograms = histograms(model_impr, model_dists, total);
  report.label_histograms = histograms(label_impr, label_dists, total);
  report.metadata.total_budget = total;
  report.metadata.metric = metric;
  report.metadata.model_seed = model.metadata.seed;
  report.metadata.n_train = model.metadata.n_train;
  report.metadata.n_test = rows.size();
  report.rows = std::move(rows);
  return report;
}

std::string report_to_json(const EvaluationReport& report) {
  Json doc;
  const ReportMetadata& m = report.metadata;
  Json meta;
  meta["total_budget"] = m.total_budget;
  meta["metric"] = std::string(metric_name(m.metric));
  meta["split_seed"] = m.split_seed;
  meta["model_seed"] = m.model_seed;
  meta["split_ratio"] = m.split_ratio;
  meta["n_train"] = m.n_train;
  meta["n_test"] = m.n_test;
  meta["fallback_count"] = m.fallback_count;
  doc["metadata"] = meta;
  doc["aggregates"] = aggregates_json(report.model);
  doc["label_aggregates"] = aggregates_json(report.labels);
  doc["histograms"] = series_json(report.model_histograms);
  doc["label_histograms"] = series_json(report.label_histograms);

  Json rows = Json::array();
  for (const auto& r : report.rows) {
    Json row;
    row["circuit_id"] = r.circuit_id;
    row["uniform_cost"] = r.uniform_cost;
    row["predicted_cost"] = r.predicted_cost;
    row["chosen_cost"] = r.chosen_cost;
    row["improvement_fraction"] = r.improvement_fraction;
    row["fallback"] = r.fallback;
    row["predicted"] = dist_json(r.predicted);
    row["label"] = dist_json(r.label);
    row["label_cost"] = r.label_cost;
    row["label_improvement_fraction"] = r.label_improvement_fraction;
    rows.push_back(std::move(row));
  }
  doc["rows"] = std::move(rows);
  return doc.dump(2) + "\n";
}

EvaluationReport report_from_json(std::string_view json_text) {
  try {
    const Json doc = Json::parse(json_text);
    EvaluationReport report;
    const Json& meta = doc.at("metadata");
    ReportMetadata& m = report.metadata;
    m.total_budget = meta.at("total_budget").get<double>();
    const auto metric = metric_from_name(meta.at("metric").get<std::string>());
    if (!metric) throw SchemaError(kModule, "metadata.metric", "unknown metric");
    m.metric = *metric;
    m.split_seed = meta.at("split_seed").get<std::uint64_t>();
    m.model_seed = meta.at("model_seed").get<std::uint64_t>();
    m.split_ratio = meta.at("split_ratio").get<double>();
    m.n_train = meta.at("n_train").get<std::uint64_t>();
    m.n_test = meta.at("n_test").get<std::uint64_t>();
    m.fallback_count = meta.at("fallback_count").get<std::uint64_t>();
    report.model = aggregates_from(doc.at("aggregates"));
    report.labels = aggregates_from(doc.at("label_aggregates"));
    report.model_histograms = series_from(doc.at("histograms"));
    report.label_histograms = series_from(doc.at("label_histograms"));
    for (const auto& row : doc.at("rows")) {
      EvaluationRow r;
      r.circuit_id = row.at("circuit_id").get<std::string>();
      r.uniform_cost = row.at("uniform_cost").get<double>();
      r.predicted_cost = row.at("predicted_cost").get<double>();
      r.chosen_cost = row.at("chosen_cost").get<double>();
      r.improvement_fraction = row.at("improvement_fraction").get<double>();
      r.fallback = row.at("fallback").get<bool>();
      r.predicted = dist_from(row.at("predicted"));
      r.label = dist_from(row.at("label"));
      r.label_cost = row.at("label_cost").get<double>();
      r.label_improvement_fraction = row.at("label_improvement_fraction").get<double>();
      report.rows.push_back(std::move(r));
    }
    return report;
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError(kModule, "report", e.what());
  }
}

void export_report(const EvaluationReport& report, const std::filesystem::path& path, ReportFormat format) {
  if (format == ReportFormat::Json) {
    write_file(path, report_to_json(report));
    return;
  }

  std::error_code ec;
  std::filesystem::create_directories(path, ec);
  if (ec) throw IoError(kModule, path.string(), ec.message());

  std::ostringstream rows;
  rows << "circuit_id,uniform_cost,predicted_cost,chosen_cost,improvement_fraction,fallback,"
          "predicted_logical,predicted_t_states,predicted_rotations,label_logical,label_t_states,"
          "label_rotations,label_cost,label_improvement_fraction\n";
  for (const auto& r : report.rows) {
    rows << csv_field(r.circuit_id) << ',' << real(r.uniform_cost) << ',' << real(r.predicted_cost) << ','
         << real(r.chosen_cost) << ',' << real(r.improvement_fraction) << ',' << (r.fallback ? 1 : 0) << ','
         << real(r.predicted.logical) << ',' << real(r.predicted.t_states) << ',' << real(r.predicted.rotations)
         << ',' << real(r.label.logical) << ',' << real(r.label.t_states) << ',' << real(r.label.rotations) << ','
         << real(r.label_cost) << ',' << real(r.label_improvement_fraction) << '\n';
  }
  write_file(path / "rows.csv", rows.str());

  std::ostringstream agg;
  agg << "series,fraction_improved,mean_improvement,max_improvement,mean_logical_fraction,"
         "mean_tstates_fraction,mean_rotations_fraction\n";
  auto agg_line = [&](const char* name, const Aggregates& a) {
    agg << name << ',' << real(a.fraction_improved) << ',' << real(a.mean_improvement) << ','
        << real(a.max_improvement) << ',' << real(a.mean_logical_fraction) << ','
        << real(a.mean_tstates_fraction) << ',' << real(a.mean_rotations_fraction) << '\n';
  };
  agg_line("model", report.model);
  agg_line("labels", report.labels);
  write_file(path / "aggregates.csv", agg.str());

  auto bins = [](std::ostringstream& out, const std::string& prefix, const Histogram& model, const Histogram& label) {
    const std::size_t n = model.counts.size();
    const double width = n ? (model.hi - model.lo) / static_cast<double>(n) : 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      out << prefix << real(model.lo + width * static_cast<double>(i)) << ','
          << real(model.lo + width * static_cast<double>(i + 1)) << ',' << model.counts[i] << ','
          << (i < label.counts.size() ? label.counts[i] : 0) << '\n';
    }
  };
  std::ostringstream impr;
  impr << "bin_lo_percent,bin_hi_percent,model_count,label_count\n";
  bins(impr, "", report.model_histograms.improvement_percent, report.label_histograms.improvement_percent);
  write_file(path / "histogram_improvement.csv", impr.str());

  std::ostringstream budget;
  budget << "component,bin_lo,bin_hi,model_count,label_count\n";
  bins(budget, "logical,", report.model_histograms.logical, report.label_histograms.logical);
  bins(budget, "t_states,", report.model_histograms.t_states, report.label_histograms.t_states);
  bins(budget, "rotations,", report.model_histograms.rotations, report.label_histograms.rotations);
  write_file(path / "histogram_budget.csv", budget.str());
}

EvaluationReport read_report(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(kModule, path.string(), "cannot open file");
  std::ostringstream text;
  text << in.rdbuf();
  return report_from_json(text.str());
}

}  // namespace qbudget
