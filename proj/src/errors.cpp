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

#include "qbudget/errors.hpp"

#include <utility>

namespace qbudget {

namespace {

std::string compose(const std::string& module, const std::string& name, const std::string& detail) {
  return "[" + module + "] " + name + ": " + detail;
}

}  // namespace

Error::Error(std::string module, std::string name, const std::string& detail)
    : std::runtime_error(compose(module, name, detail)),
      module_(std::move(module)),
      name_(std::move(name)),
      detail_(detail) {}

UnsupportedGate::UnsupportedGate(const std::string& gate, std::size_t line)
    : Error("circuit-frontend", "UnsupportedGate",
            "gate '" + gate + "' on line " + std::to_string(line) + " is not supported"),
      gate_(gate),
      line_(line) {}

SyntaxError::SyntaxError(std::size_t line, const std::string& reason)
    : Error("circuit-frontend", "SyntaxError", "line " + std::to_string(line) + ": " + reason),
      line_(line) {}

EmptyCircuit::EmptyCircuit()
    : Error("circuit-frontend", "EmptyCircuit", "no qreg declared") {}

SchemaError::SchemaError(std::string module, const std::string& where, const std::string& reason)
    : Error(std::move(module), "SchemaError", where + ": " + reason), where_(where) {}

InvariantViolation::InvariantViolation(std::string module, const std::string& reason)
    : Error(std::move(module), "InvariantViolation", reason) {}

BudgetTooSmall::BudgetTooSmall(const std::string& component, const std::string& reason)
    : Error("ftqc-estimator", "BudgetTooSmall", component + " budget: " + reason),
      component_(component) {}

DistanceOverflow::DistanceOverflow(const std::string& component, const std::string& reason)
    : Error("ftqc-estimator", "DistanceOverflow", component + " budget: " + reason),
      component_(component) {}

TargetUnreachable::TargetUnreachable(const std::string& component, const std::string& reason)
    : Error("ftqc-estimator", "TargetUnreachable", component + " budget: " + reason),
      component_(component) {}

DegenerateInput::DegenerateInput(const std::string& reason)
    : Error("budget-sampler", "DegenerateInput", reason) {}

AccumulationFailed::AccumulationFailed(const std::string& reason)
    : Error("dataset-accumulator", "AccumulationFailed", reason) {}

DatasetTooSmall::DatasetTooSmall(std::string module, const std::string& reason)
    : Error(std::move(module), "DatasetTooSmall", reason) {}

MixedBudgets::MixedBudgets(const std::string& reason)
    : Error("forest-predictor", "MixedBudgets", reason) {}

VersionMismatch::VersionMismatch(unsigned found, unsigned expected)
    : Error("forest-predictor", "VersionMismatch",
            "model format version " + std::to_string(found) + ", expected " + std::to_string(expected)) {}

CorruptModel::CorruptModel(const std::string& reason)
    : Error("forest-predictor", "CorruptModel", reason) {}

IoError::IoError(std::string module, const std::string& path, const std::string& reason)
    : Error(std::move(module), "IoError", path + ": " + reason), path_(path) {}

}  // namespace qbudget
