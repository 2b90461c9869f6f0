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
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace qbudget {

/// Gate mnemonics accepted by the QASM frontend.
enum class Gate : std::uint8_t {
  H, S, Sdg, X, Y, Z, CX, CZ, T, Tdg, RX, RY, RZ, CCX, Measure,
};

inline constexpr std::size_t kGateKinds = 15;

std::string_view gate_name(Gate g) noexcept;
std::optional<Gate> gate_from_name(std::string_view name) noexcept;

/// Raw per-mnemonic tallies of a parsed circuit.
///
/// `rotation_angles` holds the angle of every rx/ry/rz application in
/// program order; tallies for rotations may exceed its length when counts
/// are assembled by hand, in which case the unlisted rotations are treated
/// as arbitrary-angle. `rotation_layer_count` counts greedy layers of
/// arbitrary-angle rotations only.
struct GateCounts {
  std::array<std::uint64_t, kGateKinds> tally{};
  std::vector<double> rotation_angles;
  std::uint64_t qubit_count = 0;
  std::uint64_t rotation_layer_count = 0;

  std::uint64_t& operator[](Gate g) { return tally[static_cast<std::size_t>(g)]; }
  std::uint64_t operator[](Gate g) const { return tally[static_cast<std::size_t>(g)]; }

  std::uint64_t total() const noexcept;

  friend bool operator==(const GateCounts&, const GateCounts&) = default;
};

/// The six-tally featurization shared by the estimator and the regressor.
struct LogicalCounts {
  std::uint64_t qubits = 1;
  std::uint64_t t_count = 0;
  std::uint64_t rotation_count = 0;
  std::uint64_t rotation_depth = 0;
  std::uint64_t toffoli_count = 0;
  std::uint64_t measurement_count = 0;

  friend bool operator==(const LogicalCounts&, const LogicalCounts&) = default;
};

/// Throws InvariantViolation if qubits == 0, rotation_depth > rotation_count,
/// or exactly one of rotation_depth / rotation_count is zero.
void validate(const LogicalCounts& counts);

/// True when `angle` is a multiple of pi/2 within 1e-12 absolute.
bool is_clifford_angle(double angle) noexcept;

/// Parses the supported OpenQASM 2.0 subset. Throws SyntaxError,
/// UnsupportedGate or EmptyCircuit.
GateCounts parse_qasm(std::string_view source);

LogicalCounts derive_logical_counts(const GateCounts& gates);

/// Strict mode rejects fields other than the six LogicalCounts names.
LogicalCounts load_logical_counts(std::string_view json_text, bool lenient = false);
std::string save_logical_counts(const LogicalCounts& counts);

/// Reads a `.qasm` file (parsed and reduced) or a logical-counts JSON file.
LogicalCounts read_counts_file(const std::filesystem::path& path, bool lenient = false);

enum class SizeClass : std::uint8_t { Small, Medium, Large };

std::string_view size_class_name(SizeClass c) noexcept;
std::optional<SizeClass> size_class_from_name(std::string_view name) noexcept;

/// Inclusive qubit range of a size class.
std::pair<std::uint64_t, std::uint64_t> qubit_range(SizeClass c) noexcept;

/// Deterministic synthetic circuit. Qubits are uniform over the class range.
/// With Q qubits, each count k below is drawn so that k + 1 is log-uniform
/// on [1, hi + 2) and truncated to an integer, giving k in [0, hi]:
///   t_count, measurement_count: hi = 10 Q^2
///   rotation_count:             hi = 2 Q^2
///   toffoli_count:              hi = Q^2
/// rotation_depth is uniform on [max(1, ceil(rotation_count / Q)), rotation_count].
LogicalCounts generate_synthetic_circuit(std::uint64_t seed, SizeClass size_class);

}  // namespace qbudget
