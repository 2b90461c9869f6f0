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

#include "qbudget/circuit.hpp"

#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include "json.hpp"
#include "qbudget/errors.hpp"
#include "qbudget/random.hpp"

namespace qbudget {

namespace {

constexpr std::array<std::string_view, kGateKinds> kGateNames = {
    "h", "s", "sdg", "x", "y", "z", "cx", "cz", "t", "tdg", "rx", "ry", "rz", "ccx", "measure",
};

constexpr std::array<std::string_view, 6> kCountFields = {
    "qubits", "t_count", "rotation_count", "rotation_depth", "toffoli_count", "measurement_count",
};

std::uint64_t* field_slot(LogicalCounts& c, std::string_view name) {
  if (name == "qubits") return &c.qubits;
  if (name == "t_count") return &c.t_count;
  if (name == "rotation_count") return &c.rotation_count;
  if (name == "rotation_depth") return &c.rotation_depth;
  if (name == "toffoli_count") return &c.toffoli_count;
  if (name == "measurement_count") return &c.measurement_count;
  return nullptr;
}

// k + 1 log-uniform on [1, hi + 2), truncated.
std::uint64_t log_uniform_count(Rng& rng, std::uint64_t hi) {
  const double y = std::exp(rng.uniform01() * std::log(static_cast<double>(hi) + 2.0));
  const auto k = static_cast<std::uint64_t>(std::floor(y)) - 1;
  return k > hi ? hi : k;
}

}  // namespace

std::string_view gate_name(Gate g) noexcept { return kGateNames[static_cast<std::size_t>(g)]; }

std::optional<Gate> gate_from_name(std::string_view name) noexcept {
  for (std::size_t i = 0; i < kGateNames.size(); ++i) {
    if (kGateNames[i] == name) return static_cast<Gate>(i);
  }
  return std::nullopt;
}

std::uint64_t GateCounts::total() const noexcept {
  std::uint64_t sum = 0;
  for (auto v : tally) sum += v;
  return sum;
}

void validate(const LogicalCounts& c) {
  if (c.qubits == 0) throw InvariantViolation("circuit-frontend", "qubits must be >= 1");
  if (c.rotation_depth > c.rotation_count) {
    throw InvariantViolation("circuit-frontend", "rotation_depth (" + std::to_string(c.rotation_depth) +
                                                     ") exceeds rotation_count (" +
                                                     std::to_string(c.rotation_count) + ")");
  }
  if ((c.rotation_depth == 0) != (c.rotation_count == 0)) {
    throw InvariantViolation("circuit-frontend", "rotation_depth is zero iff rotation_count is zero");
  }
}

bool is_clifford_angle(double angle) noexcept {
  constexpr double kQuarterTurn = std::numbers::pi / 2;
  constexpr double kTolerance = 1e-12;
  if (!std::isfinite(angle)) return false;
  const double r = std::fabs(std::fmod(angle, kQuarterTurn));
  return r <= kTolerance || kQuarterTurn - r <= kTolerance;
}

LogicalCounts derive_logical_counts(const GateCounts& g) {
  std::uint64_t clifford_rotations = 0;
  for (double a : g.rotation_angles) {
    if (is_clifford_angle(a)) ++clifford_rotations;
  }
  const std::uint64_t rotations = g[Gate::RX] + g[Gate::RY] + g[Gate::RZ];

  LogicalCounts c;
  c.qubits = g.qubit_count;
  c.t_count = g[Gate::T] + g[Gate::Tdg];
  c.rotation_count = rotations >= clifford_rotations ? rotations - clifford_rotations : 0;
  c.rotation_depth = g.rotation_layer_count;
  c.toffoli_count = g[Gate::CCX];
  c.measurement_count = g[Gate::Measure];
  return c;
}

LogicalCounts load_logical_counts(std::string_view json_text, bool lenient) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::parse_error& e) {
    throw SchemaError("circuit-frontend", "document", e.what());
  }
  if (!doc.is_object()) throw SchemaError("circuit-frontend", "document", "expected a JSON object");

  LogicalCounts c;
  for (auto name : kCountFields) {
    auto it = doc.find(std::string(name));
    if (it == doc.end()) throw SchemaError("circuit-frontend", std::string(name), "missing field");
    if (!it->is_number_unsigned()) {
      throw SchemaError("circuit-frontend", std::string(name), "expected a non-negative integer");
    }
    *field_slot(c, name) = it->get<std::uint64_t>();
  }
  if (!lenient) {
    for (const auto& [key, value] : doc.items()) {
      if (field_slot(c, key) == nullptr) throw SchemaError("circuit-frontend", key, "unknown field");
    }
  }
  validate(c);
  return c;
}

std::string save_logical_counts(const LogicalCounts& c) {
  nlohmann::ordered_json doc;
  doc["qubits"] = c.qubits;
  doc["t_count"] = c.t_count;
  doc["rotation_count"] = c.rotation_count;
  doc["rotation_depth"] = c.rotation_depth;
  doc["toffoli_count"] = c.toffoli_count;
  doc["measurement_count"] = c.measurement_count;
  return doc.dump();
}

LogicalCounts read_counts_file(const std::filesystem::path& path, bool lenient) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("circuit-frontend", path.string(), "cannot open file");
  std::ostringstream text;
  text << in.rdbuf();
  if (path.extension() == ".qasm") return derive_logical_counts(parse_qasm(text.str()));
  return load_logical_counts(text.str(), lenient);
}

std::string_view size_class_name(SizeClass c) noexcept {
  switch (c) {
    case SizeClass::Small: return "small";
    case SizeClass::Medium: return "medium";
    case SizeClass::Large: return "large";
  }
  return "small";
}

std::optional<SizeClass> size_class_from_name(std::string_view name) noexcept {
  if (name == "small") return SizeClass::Small;
  if (name == "medium") return SizeClass::Medium;
  if (name == "large") return SizeClass::Large;
  return std::nullopt;
}

std::pair<std::uint64_t, std::uint64_t> qubit_range(SizeClass c) noexcept {
  switch (c) {
    case SizeClass::Small: return {2, 50};
    case SizeClass::Medium: return {50, 500};
    case SizeClass::Large: return {500, 5000};
  }
  return {2, 50};
}

LogicalCounts generate_synthetic_circuit(std::uint64_t seed, SizeClass size_class) {
  Rng rng = Rng::derive(seed, static_cast<std::uint64_t>(size_class));
  const auto [lo, hi] = qubit_range(size_class);

  LogicalCounts c;
  c.qubits = rng.between(lo, hi);
  const std::uint64_t q2 = c.qubits * c.qubits;
  c.t_count = log_uniform_count(rng, 10 * q2);
  c.rotation_count = log_uniform_count(rng, 2 * q2);
  if (c.rotation_count > 0) {
    const std::uint64_t min_depth = std::max<std::uint64_t>(1, (c.rotation_count + c.qubits - 1) / c.qubits);
    c.rotation_depth = rng.between(min_depth, c.rotation_count);
  }
  c.toffoli_count = log_uniform_count(rng, q2);
  c.measurement_count = log_uniform_count(rng, 10 * q2);
  return c;
}

}  // namespace qbudget
