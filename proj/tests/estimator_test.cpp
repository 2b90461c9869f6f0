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

#include <gtest/gtest.h>

#include <cmath>
#include <fstream>
#include <sstream>

#include "qbudget/circuit.hpp"
#include "qbudget/errors.hpp"
#include "qbudget/estimator.hpp"
#include "qbudget/random.hpp"

namespace qbudget {
namespace {

const PhysicalParams kDefaults{};

LogicalCounts controlled_rx_counts() {
  return read_counts_file(std::string(QBUDGET_FIXTURES) + "/controlled_rx_counts.json");
}

// Straight-line re-derivation of the cost model from its formulas, with no
// calls into the estimator's sub-operations.
struct Oracle {
  std::uint64_t q_alg, tpr, total_t, cycles, factories, qubits;
  int d, rounds, df;
  double out_err, spt, runtime;
};

Oracle oracle_estimate(const LogicalCounts& c, const BudgetDistribution& b) {
  Oracle o{};
  std::uint64_t s = 0;
  while (s * s < 8 * c.qubits) ++s;
  o.q_alg = 2 * c.qubits + s + 1;

  if (c.rotation_count > 0) {
    const double eps_r = b.rotations / static_cast<double>(c.rotation_count);
    o.tpr = static_cast<std::uint64_t>(std::ceil(0.53 * std::log2(1.0 / eps_r) + 5.3));
    while (c.rotation_count * std::pow(2.0, -(o.tpr - 5.3) / 0.53) > b.rotations) ++o.tpr;
  }
  o.total_t = c.t_count + 4 * c.toffoli_count + c.rotation_count * o.tpr;
  o.cycles = std::max<std::uint64_t>(1, c.measurement_count + c.t_count + 3 * c.toffoli_count + c.rotation_depth * o.tpr);

  const double vol = static_cast<double>(o.q_alg) * static_cast<double>(o.cycles);
  for (o.d = 3; vol * 0.03 * std::pow(0.1, (o.d + 1) / 2) > b.logical; o.d += 2) {
  }

  double target = b.t_states / std::max<double>(1.0, static_cast<double>(o.total_t));
  for (;;) {
    o.rounds = 0;
    o.out_err = 1e-2;
    while (o.out_err > target) {
      o.out_err = 35 * std::pow(o.out_err, 3);
      ++o.rounds;
    }
    if (static_cast<double>(o.total_t) * o.out_err <= b.t_states) break;
    target = std::nextafter(target, 0.0);
  }
  o.df = 3;
  if (o.rounds > 0) {
    while (31.0 * o.rounds * 0.03 * std::pow(0.1, (o.df + 1) / 2) > 0.1 * target) o.df += 2;
  }
  o.spt = o.rounds == 0 ? 100e-9 : o.rounds * 11.0 * o.df * 100e-9;
  o.runtime = static_cast<double>(o.cycles) * 6.0 * o.d * 100e-9;
  if (o.total_t > 0) {
    o.factories = std::max<std::uint64_t>(1, static_cast<std::uint64_t>(std::ceil(o.total_t * o.spt / o.runtime)));
  }
  const std::uint64_t fq = 16 * 2 * static_cast<std::uint64_t>(o.df * o.df) * std::max(o.rounds, 1);
  o.qubits = o.q_alg * 2 * static_cast<std::uint64_t>(o.d * o.d) + o.factories * fq;
  return o;
}

TEST(AlgorithmicQubits, Examples) {
  EXPECT_EQ(algorithmic_qubits({3, 0, 0, 0, 0, 0}), 12u);
  EXPECT_EQ(algorithmic_qubits({1, 0, 0, 0, 0, 0}), 6u);
  EXPECT_EQ(algorithmic_qubits({2, 0, 0, 0, 0, 0}), 9u);  // ceil(sqrt(16)) = 4 exactly
}

TEST(AlgorithmicQubits, StrictlyIncreasing) {
  LogicalCounts c;
  std::uint64_t prev = 0;
  for (c.qubits = 1; c.qubits <= 10000; ++c.qubits) {
    const std::uint64_t q = algorithmic_qubits(c);
    ASSERT_GT(q, prev);
    prev = q;
  }
}

TEST(RotationSynthesis, Examples) {
  LogicalCounts c;
  const RotationSynthesis none = rotation_synthesis(c, 1e-3);
  EXPECT_EQ(none.t_per_rotation, 0u);
  EXPECT_EQ(none.achieved_error, 0.0);

  c.rotation_count = 100;
  c.rotation_depth = 10;
  const RotationSynthesis r = rotation_synthesis(c, 1e-3);
  // 0.53 * log2(1e5) + 5.3 = 14.10...
  EXPECT_EQ(r.t_per_rotation, 15u);
  EXPECT_NEAR(r.achieved_error, 100 * std::pow(2.0, -(15 - 5.3) / 0.53), 1e-20);
  EXPECT_LE(r.achieved_error, 1e-3);
  EXPECT_THROW(rotation_synthesis(c, 0.0), BudgetTooSmall);
  EXPECT_THROW(rotation_synthesis(c, 1e-320 * 1e-10), BudgetTooSmall);
}

TEST(RotationSynthesis, HalvingBudgetNeverDecreasesTCount) {
  LogicalCounts c;
  c.rotation_count = 37;
  c.rotation_depth = 5;
  std::uint64_t prev = 0;
  for (double eps = 0.5; eps > 1e-250; eps /= 2) {
    const RotationSynthesis r = rotation_synthesis(c, eps);
    ASSERT_GE(r.t_per_rotation, prev);
    ASSERT_LE(r.achieved_error, eps);
    prev = r.t_per_rotation;
  }
}

TEST(TotalTStates, Examples) {
  EXPECT_EQ(total_t_states({1, 5, 0, 0, 0, 0}, 0), 5u);
  EXPECT_EQ(total_t_states({1, 0, 0, 0, 2, 0}, 0), 8u);
  EXPECT_EQ(total_t_states({1, 10, 3, 1, 1, 0}, 15), 59u);
}

TEST(LogicalCycles, Examples) {
  EXPECT_EQ(logical_cycles({1, 0, 0, 0, 0, 3}, 0), 3u);
  EXPECT_EQ(logical_cycles({1, 0, 5, 5, 0, 0}, 15), 75u);
  EXPECT_EQ(logical_cycles({1, 0, 0, 0, 0, 0}, 0), 1u);
  EXPECT_EQ(logical_cycles({4, 2, 6, 3, 1, 4}, 10), 4u + 2 + 3 + 30);
}

TEST(SelectCodeDistance, VolumeOfOneMillion) {
  // 0.03 * 0.1^k <= (1/300) / 1e6 first holds at k = 7, i.e. d = 13.
  int expected = 0;
  for (int d = 3; d <= 99 && expected == 0; d += 2) {
    if (1e6 * 0.03 * std::pow(0.1, (d + 1) / 2) <= 1.0 / 300) expected = d;
  }
  ASSERT_EQ(expected, 13);
  const DistanceChoice c = select_code_distance(1000, 1000, 1.0 / 300, kDefaults);
  EXPECT_EQ(c.distance, expected);
  EXPECT_NEAR(c.achieved_error, 1e6 * 0.03 * 1e-7, 1e-18);
  EXPECT_LE(c.achieved_error, 1.0 / 300);
}

TEST(SelectCodeDistance, MinimumAndOverflow) {
  const double at3 = 10 * 0.03 * 0.01;
  EXPECT_EQ(select_code_distance(10, 1, at3, kDefaults).distance, 3);
  EXPECT_EQ(select_code_distance(10, 1, 0.5, kDefaults).distance, 3);
  EXPECT_EQ(select_code_distance(10, 1, at3 * 0.999, kDefaults).distance, 5);
  EXPECT_THROW(select_code_distance(10, 1, 1e-60, kDefaults), DistanceOverflow);
  try {
    select_code_distance(10, 1, 1e-60, kDefaults);
  } catch (const DistanceOverflow& e) {
    EXPECT_EQ(e.component(), "logical");
  }
}

TEST(SelectCodeDistance, NonIncreasingInBudget) {
  int prev = 99;
  for (double eps = 1e-40; eps < 1.0; eps *= 1.3) {
    const int d = select_code_distance(12345, 678, eps, kDefaults).distance;
    ASSERT_LE(d, prev);
    ASSERT_EQ(d % 2, 1);
    prev = d;
  }
}

TEST(DesignTFactory, Examples) {
  const TFactoryDesign raw = design_t_factory(1e-2, kDefaults);
  EXPECT_EQ(raw.rounds, 0);
  EXPECT_EQ(raw.factory_distance, 3);
  EXPECT_EQ(raw.output_error, 1e-2);
  EXPECT_EQ(raw.physical_qubits_per_factory, 16u * 18);
  EXPECT_EQ(raw.seconds_per_tstate, 100e-9);
  EXPECT_EQ(design_t_factory(0.5, kDefaults).rounds, 0);

  const TFactoryDesign f = design_t_factory(1e-6, kDefaults);
  // e1 = 3.5e-5 > 1e-6, e2 = 35 * e1^3 ~ 1.5e-12.
  EXPECT_EQ(f.rounds, 2);
  EXPECT_NEAR(f.output_error, 35 * std::pow(35e-6, 3), 1e-25);
  // 62 * 0.03 * 0.1^k <= 1e-7 first holds at k = 8, d = 15.
  EXPECT_EQ(f.factory_distance, 15);
  EXPECT_EQ(f.physical_qubits_per_factory, 16u * 2 * 225 * 2);
  EXPECT_NEAR(f.seconds_per_tstate, 2 * 11 * 15 * 100e-9, 1e-18);
}

TEST(DesignTFactory, OutputMeetsTargetOnRandomTargets) {
  Rng rng(4);
  for (int i = 0; i < 10000; ++i) {
    const double target = std::pow(10.0, -30.0 * rng.uniform_open());
    try {
      const TFactoryDesign f = design_t_factory(target, kDefaults);
      ASSERT_LE(f.output_error, target);
      ASSERT_EQ(f.rounds == 0, kDefaults.p_injection <= target);
    } catch (const DistanceOverflow&) {
      ADD_FAILURE() << "unexpected overflow at " << target;
    }
  }
}

TEST(DesignTFactory, Unreachable) {
  EXPECT_THROW(design_t_factory(0.0, kDefaults), TargetUnreachable);
  PhysicalParams p;
  p.p_injection = 0.2;  // 35 e^2 > 1, the map grows
  EXPECT_THROW(design_t_factory(1e-3, p), TargetUnreachable);
}

TEST(CountFactories, Examples) {
  TFactoryDesign f = design_t_factory(1e-6, kDefaults);
  EXPECT_EQ(count_factories(0, 100, 13, f, kDefaults), 0u);

  // wall = cycles * 6 * d * t_phys; choose total_t so that total_t * spt == wall.
  f.seconds_per_tstate = 6 * 13 * 100e-9;
  EXPECT_EQ(count_factories(50, 50, 13, f, kDefaults), 1u);
  EXPECT_EQ(count_factories(1, 50, 13, f, kDefaults), 1u);
  EXPECT_EQ(count_factories(51, 50, 13, f, kDefaults), 2u);

  std::uint64_t prev = 0;
  for (std::uint64_t t = 1; t < (1u << 30); t *= 2) {
    const std::uint64_t n = count_factories(t, 1000, 11, design_t_factory(1e-9, kDefaults), kDefaults);
    ASSERT_GE(n, prev);
    prev = n;
  }
}

TEST(Estimate, CliffordOnlyCircuitHasNoFactories) {
  const ResourceEstimate e = estimate({5, 0, 0, 0, 0, 7}, uniform_distribution(0.01), kDefaults);
  EXPECT_EQ(e.factory_count, 0u);
  EXPECT_EQ(e.achieved_tstate_error, 0.0);
  EXPECT_EQ(e.achieved_rotation_error, 0.0);
  EXPECT_EQ(e.total_t_states, 0u);
  EXPECT_EQ(e.physical_qubits, algorithmic_qubits({5, 0, 0, 0, 0, 7}) * qubits_per_tile(e.code_distance));
}

TEST(Estimate, ControlledRotationTrendAcrossTotals) {
  const LogicalCounts c = controlled_rx_counts();
  const double tight = estimate(c, uniform_distribution(0.001), kDefaults).space_time_cost;
  const double mid = estimate(c, uniform_distribution(0.01), kDefaults).space_time_cost;
  const double loose = estimate(c, uniform_distribution(0.1), kDefaults).space_time_cost;
  EXPECT_GT(tight, mid);
  EXPECT_GT(mid, loose);
}

TEST(Estimate, MatchesStraightLineOracleOnGrid) {
  const LogicalCounts circuits[] = {controlled_rx_counts(), {20, 300, 120, 40, 12, 20}, {7, 0, 0, 0, 3, 7}, {150, 5000, 0, 0, 0, 150}};
  for (const LogicalCounts& c : circuits) {
    for (int i = 1; i <= 18; ++i) {
      for (int j = 1; i + j <= 19; ++j) {
        const int k = 20 - i - j;
        const BudgetDistribution b = normalize({i * 0.05, j * 0.05, k * 0.05}, 0.01);
        const ResourceEstimate e = estimate(c, b, kDefaults);
        const Oracle o = oracle_estimate(c, b);
        ASSERT_EQ(e.algorithmic_qubits, o.q_alg);
        ASSERT_EQ(e.t_per_rotation, o.tpr);
        ASSERT_EQ(e.total_t_states, o.total_t);
        ASSERT_EQ(e.logical_cycles, o.cycles);
        ASSERT_EQ(e.code_distance, o.d);
        ASSERT_EQ(e.factory_design.rounds, o.rounds);
        ASSERT_EQ(e.factory_design.factory_distance, o.df);
        ASSERT_EQ(e.factory_count, o.factories);
        ASSERT_EQ(e.physical_qubits, o.qubits);
        ASSERT_NEAR(e.runtime_seconds, o.runtime, 1e-12 * o.runtime);
        ASSERT_EQ(e.space_time_cost, e.physical_qubits * e.runtime_seconds);
      }
    }
  }
}

TEST(Estimate, ErrorAccountingOnRandomInputs) {
  Rng rng(11);
  int feasible = 0;
  for (int i = 0; i < 5000; ++i) {
    const LogicalCounts c = generate_synthetic_circuit(rng.next_u64(), static_cast<SizeClass>(rng.below(3)));
    const double total = std::pow(10.0, -1.0 - 2.0 * rng.uniform01());
    const BudgetDistribution b = sample_distribution(rng, total);
    try {
      const ResourceEstimate e = estimate(c, b, kDefaults);
      ++feasible;
      ASSERT_LE(e.achieved_logical_error, b.logical);
      ASSERT_LE(e.achieved_tstate_error, b.t_states);
      ASSERT_LE(e.achieved_rotation_error, b.rotations);
      ASSERT_LE(e.achieved_logical_error + e.achieved_tstate_error + e.achieved_rotation_error, b.total);
      ASSERT_GE(e.physical_qubits, qubits_per_tile(e.code_distance) * e.algorithmic_qubits);
      ASSERT_LE(e.factory_design.output_error * std::max<double>(1, e.total_t_states), b.t_states);
    } catch (const DistanceOverflow&) {
    } catch (const TargetUnreachable&) {
    } catch (const BudgetTooSmall&) {
    }
  }
  EXPECT_GT(feasible, 4000);
}

TEST(Estimate, ComponentMonotonicity) {
  const LogicalCounts c{40, 2000, 300, 60, 20, 40};
  for (int sweep = 0; sweep < 3; ++sweep) {
    ResourceEstimate prev;
    bool first = true;
    for (int step = 1; step <= 20; ++step) {
      std::array<double, 3> raw{0.01, 0.01, 0.01};
      raw[sweep] = 0.0002 * step * step;
      const ResourceEstimate e = estimate(c, BudgetDistribution{raw[0], raw[1], raw[2], raw[0] + raw[1] + raw[2]}, kDefaults);
      if (!first) {
        if (sweep == 0) {
          EXPECT_LE(e.code_distance, prev.code_distance);
        } else if (sweep == 1) {
          EXPECT_LE(e.factory_design.rounds, prev.factory_design.rounds);
          EXPECT_LE(e.factory_design.physical_qubits_per_factory, prev.factory_design.physical_qubits_per_factory);
          EXPECT_LE(e.factory_design.seconds_per_tstate, prev.factory_design.seconds_per_tstate);
        } else {
          EXPECT_LE(e.t_per_rotation, prev.t_per_rotation);
          EXPECT_LE(e.total_t_states, prev.total_t_states);
          EXPECT_LE(e.logical_cycles, prev.logical_cycles);
        }
      }
      prev = e;
      first = false;
    }
  }
}

// Looser uniform budgets never raise the algorithm-tile volume q_alg*2d^2*runtime.
TEST(Estimate, UniformTotalMonotonicityOfTileVolume) {
  Rng rng(8);
  for (int i = 0; i < 200; ++i) {
    const LogicalCounts c = generate_synthetic_circuit(rng.next_u64(), SizeClass::Small);
    double prev = INFINITY;
    for (double total = 1e-4; total < 0.5; total *= 1.5) {
      const ResourceEstimate e = estimate(c, uniform_distribution(total), kDefaults);
      const double tiles = static_cast<double>(e.algorithmic_qubits * qubits_per_tile(e.code_distance)) * e.runtime_seconds;
      ASSERT_LE(tiles, prev) << "total " << total;
      prev = tiles;
    }
  }
}

// The full space-time cost is not monotone in the uniform total: a smaller
// distance shortens the wall time, so throughput matching needs one more
// factory. Both the estimator and the straight-line oracle agree on this pair.
TEST(Estimate, UniformTotalCounterexampleFromFactoryCount) {
  const LogicalCounts c{5, 0, 8, 2, 4, 172};
  const BudgetDistribution tight = uniform_distribution(3.375e-4);
  const BudgetDistribution loose = uniform_distribution(5.0625e-4);
  const ResourceEstimate a = estimate(c, tight, kDefaults);
  const ResourceEstimate b = estimate(c, loose, kDefaults);
  const Oracle oa = oracle_estimate(c, tight);
  const Oracle ob = oracle_estimate(c, loose);
  EXPECT_EQ(a.code_distance, 13);
  EXPECT_EQ(b.code_distance, 11);
  EXPECT_EQ(oa.factories, 3u);
  EXPECT_EQ(ob.factories, 4u);
  EXPECT_EQ(a.factory_count, oa.factories);
  EXPECT_EQ(b.factory_count, ob.factories);
  EXPECT_GT(static_cast<double>(ob.qubits) * ob.runtime, static_cast<double>(oa.qubits) * oa.runtime);
  EXPECT_GT(b.space_time_cost, a.space_time_cost);
}

TEST(Estimate, QubitsIncreaseWithDistance) {
  const LogicalCounts c{10, 0, 0, 0, 0, 10};
  std::uint64_t prev = 0;
  int prev_d = 0;
  for (double eps = 0.5; eps > 1e-8; eps /= 10) {
    const ResourceEstimate e = estimate(c, BudgetDistribution{eps, 0.1, 0.1, eps + 0.2}, kDefaults);
    if (e.code_distance > prev_d) EXPECT_GT(e.physical_qubits, prev);
    prev = e.physical_qubits;
    prev_d = e.code_distance;
  }
}

TEST(Estimate, DeterministicAndValidated) {
  const LogicalCounts c{33, 999, 77, 12, 5, 33};
  const BudgetDistribution b = normalize({1, 2, 3}, 0.003);
  EXPECT_EQ(estimate(c, b, kDefaults), estimate(c, b, kDefaults));
  EXPECT_EQ(to_json(estimate(c, b, kDefaults)), to_json(estimate(c, b, kDefaults)));
  EXPECT_THROW(estimate(c, BudgetDistribution{0.1, 0.1, 0.1, 0.2}, kDefaults), InvariantViolation);
}

TEST(Estimate, ErrorsNameTheComponent) {
  const LogicalCounts c{10, 100, 10, 10, 0, 10};
  try {
    estimate(c, normalize({1e-9, 1, 1}, 1e-3), kDefaults);
  } catch (const DistanceOverflow& e) {
    EXPECT_EQ(e.component(), "logical");
  } catch (...) {
  }
  PhysicalParams p;
  p.p_injection = 0.5;
  try {
    estimate(c, uniform_distribution(1e-3), p);
    FAIL();
  } catch (const TargetUnreachable& e) {
    EXPECT_EQ(e.component(), "t_states");
  }
}

TEST(PhysicalParamsJson, LoadAndRoundTrip) {
  EXPECT_EQ(load_physical_params("{}"), kDefaults);
  const PhysicalParams p = load_physical_params(R"({"p_phys":2e-3,"t_phys":5e-8})");
  EXPECT_EQ(p.p_phys, 2e-3);
  EXPECT_EQ(p.t_phys, 5e-8);
  EXPECT_EQ(p.p_threshold, kDefaults.p_threshold);
  EXPECT_EQ(load_physical_params(save_physical_params(p)), p);
  try {
    load_physical_params(R"({"qubit_model":"x"})");
    FAIL();
  } catch (const SchemaError& e) {
    EXPECT_EQ(e.where(), "qubit_model");
  }
  EXPECT_EQ(load_physical_params(R"({"qubit_model":"x"})", true), kDefaults);
  EXPECT_THROW(load_physical_params(R"({"p_phys":0.02})"), InvariantViolation);
  EXPECT_THROW(load_physical_params(R"({"cycle_factor":"six"})"), SchemaError);
}

}  // namespace
}  // namespace qbudget
