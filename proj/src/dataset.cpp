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

#include "qbudget/dataset.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>

#include "json.hpp"
#include "qbudget/errors.hpp"
#include "qbudget/parallel.hpp"
#include "qbudget/random.hpp"

namespace qbudget {

namespace {

constexpr const char* kModule = "dataset-accumulator";

std::string real(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

const std::set<std::string>& record_fields() {
  static const std::set<std::string> fields = {
      "circuit_id", "counts", "best_distribution", "best_cost", "uniform_cost",
      "total_budget", "metric", "n_samples", "seed",
  };
  return fields;
}

class RecordReader {
 public:
  RecordReader(const nlohmann::json& doc, std::size_t line) : doc_(doc), line_(line) {}

  [[noreturn]] void fail(const std::string& field, const std::string& why) const {
    throw SchemaError(kModule, "line " + std::to_string(line_) + ": " + field, why);
  }

  const nlohmann::json& at(const nlohmann::json& obj, const std::string& field) const {
    auto it = obj.find(field);
    if (it == obj.end()) fail(field, "missing field");
    return *it;
  }

  double number(const nlohmann::json& obj, const std::string& field) const {
    const auto& v = at(obj, field);
    if (!v.is_number()) fail(field, "expected a number");
    return v.get<double>();
  }

  std::uint64_t integer(const nlohmann::json& obj, const std::string& field) const {
    const auto& v = at(obj, field);
    if (!v.is_number_unsigned()) fail(field, "expected a non-negative integer");
    return v.get<std::uint64_t>();
  }

  DatasetRecord read() const {
    if (!doc_.is_object()) fail("record", "expected a JSON object");
    for (const auto& [key, value] : doc_.items()) {
      if (!record_fields().count(key)) fail(key, "unknown field");
    }
    DatasetRecord r;
    const auto& id = at(doc_, "circuit_id");
    if (!id.is_string()) fail("circuit_id", "expected a string");
    r.circuit_id = id.get<std::string>();

    const auto& counts = at(doc_, "counts");
    if (!counts.is_object()) fail("counts", "expected an object");
    try {
      r.counts = load_logical_counts(counts.dump());
    } catch (const SchemaError& e) {
      fail("counts." + e.where(), "invalid logical counts");
    } catch (const InvariantViolation& e) {
      throw InvariantViolation(kModule, "record '" + r.circuit_id + "': " + e.detail());
    }

    const auto& dist = at(doc_, "best_distribution");
    if (!dist.is_object()) fail("best_distribution", "expected an object");
    for (const auto& [key, value] : dist.items()) {
      if (key != "logical" && key != "t_states" && key != "rotations" && key != "total") {
        fail("best_distribution." + key, "unknown field");
      }
    }
    r.best_distribution = {number(dist, "logical"), number(dist, "t_states"), number(dist, "rotations"),
                           number(dist, "total")};
    r.best_cost = number(doc_, "best_cost");
    r.uniform_cost = number(doc_, "uniform_cost");
    r.total_budget = number(doc_, "total_budget");
    const auto& metric = at(doc_, "metric");
    if (!metric.is_string()) fail("metric", "expected a string");
    const auto m = metric_from_name(metric.get<std::string>());
    if (!m) fail("metric", "unknown metric '" + metric.get<std::string>() + "'");
    r.metric = *m;
    r.n_samples = integer(doc_, "n_samples");
    r.seed = integer(doc_, "seed");
    return r;
  }

 private:
  const nlohmann::json& doc_;
  std::size_t line_;
};

}  // namespace

std::string_view metric_name(CostMetric m) noexcept {
  switch (m) {
    case CostMetric::SpaceTime: return "spacetime";
    case CostMetric::QubitsOnly: return "qubits";
    case CostMetric::TimeOnly: return "time";
  }
  return "spacetime";
}

std::optional<CostMetric> metric_from_name(std::string_view name) noexcept {
  if (name == "spacetime") return CostMetric::SpaceTime;
  if (name == "qubits") return CostMetric::QubitsOnly;
  if (name == "time") return CostMetric::TimeOnly;
  return std::nullopt;
}

double cost(const ResourceEstimate& e, CostMetric m) noexcept {
  switch (m) {
    case CostMetric::SpaceTime: return e.space_time_cost;
    case CostMetric::QubitsOnly: return static_cast<double>(e.physical_qubits);
    case CostMetric::TimeOnly: return e.runtime_seconds;
  }
  return e.space_time_cost;
}

void validate(const DatasetRecord& r) {
  const std::string who = "record '" + r.circuit_id + "': ";
  try {
    validate(r.counts);
  } catch (const InvariantViolation& e) {
    throw InvariantViolation(kModule, who + e.detail());
  }
  if (!(r.total_budget > 0.0 && r.total_budget < 1.0)) throw InvariantViolation(kModule, who + "total_budget outside (0, 1)");
  if (r.best_distribution.total != r.total_budget) {
    throw InvariantViolation(kModule, who + "best_distribution total differs from total_budget");
  }
  if (!on_simplex(r.best_distribution)) throw InvariantViolation(kModule, who + "best_distribution is off the simplex");
  if (!std::isfinite(r.best_cost) || !std::isfinite(r.uniform_cost) || r.best_cost < 0.0) {
    throw InvariantViolation(kModule, who + "costs must be finite and non-negative");
  }
  if (r.best_cost > r.uniform_cost) throw InvariantViolation(kModule, who + "best_cost exceeds uniform_cost");
  if (r.n_samples == 0) throw InvariantViolation(kModule, who + "n_samples must be >= 1");
}

std::vector<BudgetDistribution> candidate_distributions(std::string_view circuit_id, std::uint64_t n_samples,
                                                        double total_budget, std::uint64_t seed) {
  std::vector<BudgetDistribution> out;
  out.reserve(n_samples + 1);
  out.push_back(uniform_distribution(total_budget));
  Rng rng = Rng::derive(seed, stable_hash(circuit_id));
  for (std::uint64_t i = 0; i < n_samples; ++i) out.push_back(sample_distribution(rng, total_budget));
  return out;
}

DatasetRecord accumulate_circuit(const CircuitInput& circuit, const AccumulateOptions& options,
                                 std::uint64_t* skipped_candidates) {
  if (options.n_samples == 0) throw InvariantViolation(kModule, "n_samples must be >= 1");

  DatasetRecord r;
  r.circuit_id = circuit.id;
  r.counts = circuit.counts;
  r.total_budget = options.total_budget;
  r.metric = options.metric;
  r.n_samples = options.n_samples;
  r.seed = options.seed;

  r.best_distribution = uniform_distribution(options.total_budget);
  r.uniform_cost = cost(estimate(circuit.counts, r.best_distribution, options.params), options.metric);
  r.best_cost = r.uniform_cost;

  Rng rng = Rng::derive(options.seed, stable_hash(circuit.id));
  std::uint64_t skipped = 0;
  for (std::uint64_t i = 0; i < options.n_samples; ++i) {
    const BudgetDistribution candidate = sample_distribution(rng, options.total_budget);
    double value = 0.0;
    try {
      value = cost(estimate(circuit.counts, candidate, options.params), options.metric);
    } catch (const BudgetTooSmall&) {
      ++skipped;
      continue;
    } catch (const DistanceOverflow&) {
      ++skipped;
      continue;
    } catch (const TargetUnreachable&) {
      ++skipped;
      continue;
    }
    if (value < r.best_cost) {
      r.best_cost = value;
      r.best_distribution = candidate;
    }
  }
  if (skipped_candidates != nullptr) *skipped_candidates = skipped;
  return r;
}

AccumulationResult accumulate(const std::vector<CircuitInput>& circuits, const AccumulateOptions& options) {
  if (circuits.empty()) throw AccumulationFailed("no circuits given");
  if (options.n_samples == 0) throw InvariantViolation(kModule, "n_samples must be >= 1");
  validate(options.params);

  struct Slot {
    std::optional<DatasetRecord> record;
    std::string error;
    std::uint64_t skipped = 0;
  };
  std::vector<Slot> slots(circuits.size());
  parallel_for(circuits.size(), options.jobs, [&](std::size_t i) {
    try {
      slots[i].record = accumulate_circuit(circuits[i], options, &slots[i].skipped);
    } catch (const Error& e) {
      slots[i].error = e.name() + ": " + e.detail();
    }
  });

  AccumulationResult result;
  for (std::size_t i = 0; i < slots.size(); ++i) {
    if (slots[i].record) {
      result.records.push_back(std::move(*slots[i].record));
      result.skipped_candidates += slots[i].skipped;
    } else {
      result.skipped.push_back({circuits[i].id, slots[i].error});
    }
  }
  if (result.records.empty()) {
    throw AccumulationFailed("all " + std::to_string(circuits.size()) + " circuits failed; first: " +
                             result.skipped.front().error);
  }
  return result;
}

std::string format_record(const DatasetRecord& r) {
  const BudgetDistribution& b = r.best_distribution;
  std::string out;
  out += "{\"circuit_id\":" + nlohmann::json(r.circuit_id).dump();
  out += ",\"counts\":" + save_logical_counts(r.counts);
  out += ",\"best_distribution\":{\"logical\":" + real(b.logical) + ",\"t_states\":" + real(b.t_states) +
         ",\"rotations\":" + real(b.rotations) + ",\"total\":" + real(b.total) + "}";
  out += ",\"best_cost\":" + real(r.best_cost);
  out += ",\"uniform_cost\":" + real(r.uniform_cost);
  out += ",\"total_budget\":" + real(r.total_budget);
  out += ",\"metric\":\"" + std::string(metric_name(r.metric)) + "\"";
  out += ",\"n_samples\":" + std::to_string(r.n_samples);
  out += ",\"seed\":" + std::to_string(r.seed);
  out += "}";
  return out;
}

DatasetRecord parse_record(std::string_view line, std::size_t line_number) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(line);
  } catch (const nlohmann::json::parse_error& e) {
    throw SchemaError(kModule, "line " + std::to_string(line_number), e.what());
  }
  DatasetRecord r = RecordReader(doc, line_number).read();
  validate(r);
  return r;
}

void save_dataset(const std::vector<DatasetRecord>& records, const std::filesystem::path& path) {
  for (const auto& r : records) validate(r);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError(kModule, path.string(), "cannot open for writing");
  for (const auto& r : records) out << format_record(r) << '\n';
  if (!out) throw IoError(kModule, path.string(), "write failed");
}

std::vector<DatasetRecord> load_dataset(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(kModule, path.string(), "cannot open file");
  std::vector<DatasetRecord> records;
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    records.push_back(parse_record(line, number));
  }
  return records;
}

}  // namespace qbudget
