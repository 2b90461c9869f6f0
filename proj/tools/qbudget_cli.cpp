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

// qbudget: error-budget distribution toolkit.
//
//   qbudget estimate   --counts FILE --budget-total T [--budget L,TS,R] [--params FILE] [--metric M]
//   qbudget sample     --budget-total T --n N --seed S
//   qbudget accumulate --circuits DIR|FILE --n N --budget-total T --metric M --seed S --out FILE
//   qbudget train      --dataset FILE --out FILE --seed S [--trees K --max-depth D --min-leaf L]
//   qbudget predict    --model FILE --counts FILE
//   qbudget evaluate   --model FILE --dataset FILE --split R --seed S --out FILE [--retrain]
//   qbudget report     --in FILE --format csv|json --out PATH
//   qbudget synth      --n N --seed S --class small|medium|large --out DIR
//
// Exit codes: 0 success, 1 runtime error, 2 usage error.

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "qbudget/budget.hpp"
#include "qbudget/circuit.hpp"
#include "qbudget/dataset.hpp"
#include "qbudget/errors.hpp"
#include "qbudget/estimator.hpp"
#include "qbudget/evaluation.hpp"
#include "qbudget/forest.hpp"
#include "qbudget/random.hpp"

namespace fs = std::filesystem;
using namespace qbudget;

namespace {

constexpr const char* kParamsEnv = "QBUDGET_PARAMS";

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

PhysicalParams resolve_params(const std::string& path, bool lenient) {
  if (!path.empty()) return read_params_file(path, lenient);
  if (const char* env = std::getenv(kParamsEnv); env != nullptr && *env != '\0') {
    return read_params_file(env, lenient);
  }
  return PhysicalParams{};
}

CostMetric parse_metric(const std::string& name) {
  const auto m = metric_from_name(name);
  if (!m) throw UsageError("unknown metric '" + name + "' (expected spacetime, qubits or time)");
  return *m;
}

nlohmann::ordered_json distribution_json(const BudgetDistribution& b) {
  nlohmann::ordered_json j;
  j["logical"] = b.logical;
  j["t_states"] = b.t_states;
  j["rotations"] = b.rotations;
  j["total"] = b.total;
  return j;
}

std::vector<CircuitInput> read_circuits(const fs::path& source, bool lenient) {
  std::vector<fs::path> files;
  if (fs::is_directory(source)) {
    for (const auto& entry : fs::directory_iterator(source)) {
      const auto ext = entry.path().extension();
      if (entry.is_regular_file() && (ext == ".json" || ext == ".qasm")) files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());
  } else {
    files.push_back(source);
  }
  std::vector<CircuitInput> circuits;
  for (const auto& f : files) circuits.push_back({f.stem().string(), read_counts_file(f, lenient)});
  if (circuits.empty()) throw UsageError("no .json or .qasm circuits found in " + source.string());
  return circuits;
}

struct Options {
  std::string counts, params, metric = "spacetime", budget, circuits, out, dataset, model, model_out, in,
      format = "csv", size_class = "small";
  double total = 0.01;
  double split_ratio = 0.75;
  std::uint64_t n = 0;
  std::uint64_t seed = 0;
  unsigned jobs = 1;
  bool lenient = false;
  bool retrain = false;
  bool no_bootstrap = false;
  ForestParams forest;
};

int run_estimate(const Options& o) {
  const LogicalCounts counts = read_counts_file(o.counts, o.lenient);
  const PhysicalParams params = resolve_params(o.params, o.lenient);
  const CostMetric metric = parse_metric(o.metric);
  BudgetDistribution b = uniform_distribution(o.total);
  if (!o.budget.empty()) {
    std::array<double, 3> raw{};
    std::size_t start = 0;
    for (std::size_t i = 0; i < 3; ++i) {
      const auto comma = o.budget.find(',', start);
      if ((i < 2) == (comma == std::string::npos)) throw UsageError("--budget expects three values L,TS,R");
      try {
        raw[i] = std::stod(o.budget.substr(start, comma - start));
      } catch (const std::exception&) {
        throw UsageError("--budget component '" + o.budget.substr(start, comma - start) + "' is not a number");
      }
      start = comma + 1;
    }
    b = normalize(raw, o.total);
  }
  const ResourceEstimate e = estimate(counts, b, params);
  auto doc = nlohmann::ordered_json::parse(to_json(e));
  doc["budget"] = distribution_json(b);
  doc["metric"] = std::string(metric_name(metric));
  doc["cost"] = cost(e, metric);
  std::cout << doc.dump(2) << '\n';
  return 0;
}

int run_sample(const Options& o) {
  Rng rng(o.seed);
  for (std::uint64_t i = 0; i < o.n; ++i) std::cout << distribution_json(sample_distribution(rng, o.total)).dump() << '\n';
  return 0;
}

int run_accumulate(const Options& o) {
  AccumulateOptions opts;
  opts.n_samples = o.n;
  opts.total_budget = o.total;
  opts.metric = parse_metric(o.metric);
  opts.seed = o.seed;
  opts.params = resolve_params(o.params, o.lenient);
  opts.jobs = o.jobs;
  if (opts.n_samples == 0) throw UsageError("--n must be >= 1");
  const AccumulationResult result = accumulate(read_circuits(o.circuits, o.lenient), opts);
  for (const auto& s : result.skipped) std::cerr << "skipped " << s.circuit_id << ": " << s.error << '\n';
  save_dataset(result.records, o.out);
  std::cerr << "wrote " << result.records.size() << " records to " << o.out << " (" << result.skipped.size()
            << " circuits skipped, " << result.skipped_candidates << " infeasible candidates)\n";
  return 0;
}

ForestParams forest_params(const Options& o) {
  ForestParams p = o.forest;
  p.bootstrap = !o.no_bootstrap;
  return p;
}

int run_train(const Options& o) {
  const ForestModel model = train(load_dataset(o.dataset), forest_params(o), o.seed, o.jobs);
  save_model(model, o.out);
  std::cerr << "trained " << model.trees.size() << " trees on " << model.metadata.n_train << " records\n";
  return 0;
}

int run_predict(const Options& o) {
  const ForestModel model = load_model(o.model);
  std::cout << distribution_json(predict(model, read_counts_file(o.counts, o.lenient))).dump(2) << '\n';
  return 0;
}

int run_evaluate(const Options& o) {
  if (!o.retrain && o.model.empty()) throw UsageError("evaluate needs --model unless --retrain is given");
  const PhysicalParams params = resolve_params(o.params, o.lenient);
  const auto [train_side, test_side] = split(load_dataset(o.dataset), o.split_ratio, o.seed);

  ForestModel model;
  if (o.retrain) {
    model = train(train_side, forest_params(o), o.seed, o.jobs);
    if (!o.model_out.empty()) save_model(model, o.model_out);
  } else {
    model = load_model(o.model);
  }
  EvaluationReport report = evaluate(model, test_side, params, o.jobs);
  report.metadata.split_seed = o.seed;
  report.metadata.split_ratio = o.split_ratio;
  export_report(report, o.out, ReportFormat::Json);
  std::cerr << "test rows " << report.rows.size() << ", improved " << report.model.fraction_improved * 100.0
            << "%, mean improvement " << report.model.mean_improvement * 100.0 << "%\n";
  return 0;
}

int run_report(const Options& o) {
  ReportFormat format;
  if (o.format == "csv") format = ReportFormat::Csv;
  else if (o.format == "json") format = ReportFormat::Json;
  else throw UsageError("unknown format '" + o.format + "' (expected csv or json)");
  export_report(read_report(o.in), o.out, format);
  return 0;
}

int run_synth(const Options& o) {
  const auto cls = size_class_from_name(o.size_class);
  if (!cls) throw UsageError("unknown size class '" + o.size_class + "'");
  std::error_code ec;
  fs::create_directories(o.out, ec);
  if (ec) throw IoError("cli", o.out, ec.message());
  for (std::uint64_t i = 0; i < o.n; ++i) {
    char name[64];
    std::snprintf(name, sizeof name, "synth_%s_%04llu.json", std::string(size_class_name(*cls)).c_str(),
                  static_cast<unsigned long long>(i));
    const fs::path path = fs::path(o.out) / name;
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out << save_logical_counts(generate_synthetic_circuit(derive_seed(o.seed, i), *cls)) << '\n';
    if (!out) throw IoError("cli", path.string(), "write failed");
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Error-budget distribution toolkit for fault-tolerant resource estimation"};
  app.require_subcommand(1);
  Options o;

  auto add_params = [&](CLI::App* cmd) {
    cmd->add_option("--params", o.params, "PhysicalParams JSON file (default: $QBUDGET_PARAMS)");
    cmd->add_flag("--lenient", o.lenient, "Ignore unknown fields in input JSON");
  };
  auto add_forest = [&](CLI::App* cmd) {
    cmd->add_option("--trees", o.forest.n_trees, "Number of trees")->check(CLI::PositiveNumber);
    cmd->add_option("--max-depth", o.forest.max_depth, "Maximum tree depth (negative: unlimited)");
    cmd->add_option("--min-leaf", o.forest.min_leaf, "Minimum rows per leaf")->check(CLI::PositiveNumber);
    cmd->add_option("--features-per-split", o.forest.features_per_split, "Candidate features per split")
        ->check(CLI::Range(1, 12));
    cmd->add_flag("--no-bootstrap", o.no_bootstrap, "Train every tree on the full dataset");
  };
  const auto budget_range = CLI::Range(0.0, 1.0);

  auto* est = app.add_subcommand("estimate", "Estimate resources for one circuit");
  est->add_option("--counts", o.counts, "Logical-counts JSON or .qasm file")->required();
  est->add_option("--budget-total", o.total, "Total error budget")->required()->check(budget_range);
  est->add_option("--budget", o.budget, "Budget split L,TS,R (normalized to the total; default uniform)");
  est->add_option("--metric", o.metric, "spacetime | qubits | time");
  add_params(est);

  auto* smp = app.add_subcommand("sample", "Print random budget distributions as JSON lines");
  smp->add_option("--budget-total", o.total, "Total error budget")->required()->check(budget_range);
  smp->add_option("--n", o.n, "Number of distributions")->required();
  smp->add_option("--seed", o.seed, "RNG seed")->required();

  auto* acc = app.add_subcommand("accumulate", "Build a dataset of best sampled distributions");
  acc->add_option("--circuits", o.circuits, "Directory of .json/.qasm circuits, or one file")->required();
  acc->add_option("--n", o.n, "Sampled distributions per circuit")->required();
  acc->add_option("--budget-total", o.total, "Total error budget")->required()->check(budget_range);
  acc->add_option("--metric", o.metric, "spacetime | qubits | time");
  acc->add_option("--seed", o.seed, "RNG seed")->required();
  acc->add_option("--out", o.out, "Output dataset (JSON lines)")->required();
  acc->add_option("--jobs", o.jobs, "Worker threads");
  add_params(acc);

  auto* trn = app.add_subcommand("train", "Train a random-forest model on a dataset");
  trn->add_option("--dataset", o.dataset, "Dataset file")->required();
  trn->add_option("--out", o.out, "Output model file")->required();
  trn->add_option("--seed", o.seed, "RNG seed")->required();
  trn->add_option("--jobs", o.jobs, "Worker threads");
  add_forest(trn);

  auto* prd = app.add_subcommand("predict", "Predict a budget distribution for one circuit");
  prd->add_option("--model", o.model, "Model file")->required();
  prd->add_option("--counts", o.counts, "Logical-counts JSON or .qasm file")->required();
  prd->add_flag("--lenient", o.lenient, "Ignore unknown fields in input JSON");

  auto* evl = app.add_subcommand("evaluate", "Evaluate a model against the uniform baseline");
  evl->add_option("--model", o.model, "Pre-trained model file");
  evl->add_option("--dataset", o.dataset, "Dataset file")->required();
  evl->add_option("--split", o.split_ratio, "Training fraction of the shuffled dataset")->check(CLI::Range(0.0, 1.0));
  evl->add_option("--seed", o.seed, "Split (and retraining) seed")->required();
  evl->add_option("--out", o.out, "Output report JSON")->required();
  evl->add_flag("--retrain", o.retrain, "Train on the split's training side first");
  evl->add_option("--model-out", o.model_out, "Where to save the retrained model");
  evl->add_option("--jobs", o.jobs, "Worker threads");
  add_forest(evl);
  add_params(evl);

  auto* rpt = app.add_subcommand("report", "Convert a report to CSV files or JSON");
  rpt->add_option("--in", o.in, "Report JSON")->required();
  rpt->add_option("--format", o.format, "csv | json");
  rpt->add_option("--out", o.out, "Output directory (csv) or file (json)")->required();

  auto* syn = app.add_subcommand("synth", "Generate synthetic logical-counts files");
  syn->add_option("--n", o.n, "Number of circuits")->required();
  syn->add_option("--seed", o.seed, "RNG seed")->required();
  syn->add_option("--class", o.size_class, "small | medium | large");
  syn->add_option("--out", o.out, "Output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    std::cout << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    std::cout << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return 2;
  }

  try {
    if (est->parsed()) return run_estimate(o);
    if (smp->parsed()) return run_sample(o);
    if (acc->parsed()) return run_accumulate(o);
    if (trn->parsed()) return run_train(o);
    if (prd->parsed()) return run_predict(o);
    if (evl->parsed()) return run_evaluate(o);
    if (rpt->parsed()) return run_report(o);
    if (syn->parsed()) return run_synth(o);
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return 2;
  } catch (const Error& e) {
    std::cerr << "error [" << e.module() << "] " << e.name() << ": " << e.detail() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error [cli] " << e.what() << '\n';
    return 1;
  }
  return 2;
}
