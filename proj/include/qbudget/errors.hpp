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

#include <cstddef>
#include <stdexcept>
#include <string>

namespace qbudget {

/// Base of every error raised by the library. Carries the owning module
/// (e.g. "ftqc-estimator") and a short error name (e.g. "DistanceOverflow")
/// so the CLI can report both without string parsing.
class Error : public std::runtime_error {
 public:
  Error(std::string module, std::string name, const std::string& detail);

  const std::string& module() const noexcept { return module_; }
  const std::string& name() const noexcept { return name_; }
  const std::string& detail() const noexcept { return detail_; }

 private:
  std::string module_;
  std::string name_;
  std::string detail_;
};

// circuit-frontend

class UnsupportedGate : public Error {
 public:
  UnsupportedGate(const std::string& gate, std::size_t line);
  const std::string& gate() const noexcept { return gate_; }
  std::size_t line() const noexcept { return line_; }

 private:
  std::string gate_;
  std::size_t line_;
};

class SyntaxError : public Error {
 public:
  SyntaxError(std::size_t line, const std::string& reason);
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

class EmptyCircuit : public Error {
 public:
  EmptyCircuit();
};

/// Malformed input document. `where` names the offending field, or a
/// "line N" locator for line-oriented files.
class SchemaError : public Error {
 public:
  SchemaError(std::string module, const std::string& where, const std::string& reason);
  const std::string& where() const noexcept { return where_; }

 private:
  std::string where_;
};

class InvariantViolation : public Error {
 public:
  InvariantViolation(std::string module, const std::string& reason);
};

// ftqc-estimator. `component` is one of "logical", "t_states", "rotations".

class BudgetTooSmall : public Error {
 public:
  BudgetTooSmall(const std::string& component, const std::string& reason);
  const std::string& component() const noexcept { return component_; }

 private:
  std::string component_;
};

class DistanceOverflow : public Error {
 public:
  DistanceOverflow(const std::string& component, const std::string& reason);
  const std::string& component() const noexcept { return component_; }

 private:
  std::string component_;
};

class TargetUnreachable : public Error {
 public:
  TargetUnreachable(const std::string& component, const std::string& reason);
  const std::string& component() const noexcept { return component_; }

 private:
  std::string component_;
};

// budget-sampler

class DegenerateInput : public Error {
 public:
  explicit DegenerateInput(const std::string& reason);
};

// dataset-accumulator

class AccumulationFailed : public Error {
 public:
  explicit AccumulationFailed(const std::string& reason);
};

// forest-predictor / evaluation-pipeline

class DatasetTooSmall : public Error {
 public:
  DatasetTooSmall(std::string module, const std::string& reason);
};

class MixedBudgets : public Error {
 public:
  explicit MixedBudgets(const std::string& reason);
};

class VersionMismatch : public Error {
 public:
  VersionMismatch(unsigned found, unsigned expected);
};

class CorruptModel : public Error {
 public:
  explicit CorruptModel(const std::string& reason);
};

class IoError : public Error {
 public:
  IoError(std::string module, const std::string& path, const std::string& reason);
  const std::string& path() const noexcept { return path_; }

 private:
  std::string path_;
};

}  // namespace qbudget
