// Copyright 2026 The opsample Authors
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

#include <random>

#include "opsample/error.hpp"
#include "opsample/harness.hpp"
#include "opsample/partition.hpp"
#include "support.hpp"

namespace opsample {
namespace {

using testing::classification;
using testing::mean_target;
using testing::regression;

TechniqueConfig tiny(TechniqueId t, std::size_t n) {
  TechniqueConfig c;
  c.technique = t;
  c.budget = n;
  c.aux = uses_aux(t) ? "score" : "";
  c.partitions = 2;
  return c;
}

TEST(Enumerate, SrsExample) {
  const auto e = enumerate_expectation(classification({1, 0, 0}, {}), tiny(TechniqueId::kSrs, 2));
  EXPECT_NEAR(e.expectation, 1.0 / 3.0, 1e-15);
  EXPECT_EQ(e.paths, 9u);
  EXPECT_NEAR(e.probability_mass, 1.0, 1e-12);
}

TEST(Enumerate, SupsExample) {
  const auto e = enumerate_expectation(classification({1, 0, 0}, {2, 1, 1}), tiny(TechniqueId::kSups, 1));
  EXPECT_NEAR(e.expectation, 1.0 / 3.0, 1e-15);
  EXPECT_EQ(e.paths, 3u);
}

TEST(Enumerate, AllZeroIsZero) {
  const auto pop = classification({0, 0, 0, 0, 0}, {1, 2, 3, 4, 5});
  for (TechniqueId t : {TechniqueId::kSrs, TechniqueId::kSups, TechniqueId::kRhcs, TechniqueId::kSsrs,
                        TechniqueId::kTwoUps, TechniqueId::kDeepest}) {
    EXPECT_EQ(enumerate_expectation(pop, tiny(t, 3)).expectation, 0.0) << technique_name(t);
  }
}

TEST(Enumerate, RhcGroupings) {
  // N=4, n=2: three ordered splits into two groups of two, each group drawn by chi.
  const auto e = enumerate_expectation(classification({1, 0, 0, 1}, {1, 2, 3, 4}), tiny(TechniqueId::kRhcs, 2));
  EXPECT_NEAR(e.probability_mass, 1.0, 1e-12);
  EXPECT_NEAR(e.expectation, 0.5, 1e-12);
}

TEST(Enumerate, UnsupportedConfigurations) {
  const auto pop = classification({1, 0, 0}, {1, 2, 3});
  for (TechniqueId t : {TechniqueId::kCes, TechniqueId::kGbs}) {
    try {
      enumerate_expectation(pop, tiny(t, 2));
      FAIL();
    } catch (const Error& e) {
      EXPECT_NE(std::string(e.what()).find("not enumerable; use Monte Carlo"), std::string::npos);
    }
  }
  const auto big = classification(std::vector<int>(11, 0), std::vector<double>(11, 1.0));
  EXPECT_THROW(enumerate_expectation(big, tiny(TechniqueId::kSrs, 2)), Error);
  const auto nine = classification(std::vector<int>(9, 0), std::vector<double>(9, 1.0));
  EXPECT_THROW(enumerate_expectation(nine, tiny(TechniqueId::kDeepest, 2)), Error);
  EXPECT_THROW(enumerate_expectation(pop, tiny(TechniqueId::kSrs, 5)), Error);
}

Population random_population(std::mt19937_64& gen, Task task, std::size_t n) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> chi(n);
  for (auto& c : chi) c = std::floor(u(gen) * 6.0) / 5.0 + 0.05;
  if (task == Task::kClassification) {
    std::vector<int> z(n);
    for (auto& v : z) v = u(gen) < 0.4 ? 1 : 0;
    return classification(z, chi);
  }
  std::vector<double> delta(n);
  for (auto& d : delta) d = u(gen) < 0.3 ? 0.0 : u(gen);
  return regression(delta, chi);
}

// Strata allocated no draws contribute zero, so the stratified estimator
// targets the total over sampled strata only.
double sampled_strata_mean(const Population& pop, const TechniqueConfig& c) {
  const SamplingFrame frame = prepare_frame(pop, c);
  const auto alloc = neyman_allocation(*frame.partitions, frame.chi, c.budget, c.ssrs_min_per_partition);
  double total = 0.0;
  for (std::size_t p = 0; p < frame.partitions->count(); ++p) {
    if (alloc.per_partition[p] == 0) continue;
    for (auto id : frame.partitions->members[p]) total += target_value(pop.task(), pop[id]);
  }
  return total / static_cast<double>(pop.size());
}

TEST(Enumerate, SsrsUnbiasedWhenEveryStratumIsSampled) {
  std::mt19937_64 gen(77);
  std::size_t covered = 0;
  for (int trial = 0; trial < 200; ++trial) {
    const auto pop = random_population(gen, trial % 2 == 0 ? Task::kClassification : Task::kRegression,
                                       3 + gen() % 4);
    auto c = tiny(TechniqueId::kSsrs, 1 + gen() % 3);
    c.partitions = 1 + gen() % 3;
    const SamplingFrame frame = prepare_frame(pop, c);
    if (frame.partitions->count() > c.budget) continue;
    ++covered;
    EXPECT_NEAR(enumerate_expectation(pop, c).expectation, mean_target(pop), 1e-9) << "trial " << trial;
  }
  EXPECT_GE(covered, 50u);
}

TEST(Enumerate, UnbiasedOnRandomPopulations) {
  std::mt19937_64 gen(2026);
  const TechniqueId techniques[] = {TechniqueId::kSrs,  TechniqueId::kSups,   TechniqueId::kRhcs,
                                    TechniqueId::kSsrs, TechniqueId::kTwoUps, TechniqueId::kDeepest};
  std::size_t checked = 0;
  for (int trial = 0; trial < 120; ++trial) {
    const Task task = trial % 2 == 0 ? Task::kClassification : Task::kRegression;
    const std::size_t size = 3 + gen() % 4;
    const std::size_t n = 1 + gen() % 3;
    const auto pop = random_population(gen, task, size);
    const double truth = mean_target(pop);
    for (TechniqueId t : techniques) {
      auto c = tiny(t, n);
      c.deepest_r = 0.25 * static_cast<double>(gen() % 4);
      c.deepest_threshold_quantile = 0.5;
      const auto e = enumerate_expectation(pop, c);
      EXPECT_NEAR(e.probability_mass, 1.0, 1e-12) << technique_name(t) << " trial " << trial;
      const double want = t == TechniqueId::kSsrs ? sampled_strata_mean(pop, c) : truth;
      EXPECT_NEAR(e.expectation, want, 1e-9) << technique_name(t) << " trial " << trial;
      ++checked;
    }
  }
  EXPECT_GE(checked, 600u);
}

TEST(Enumerate, DeepestPureWbsMissesZeroWeightExamples) {
  // With r = 1 an example below the threshold is never drawn after the first
  // step, so its failure is only seen through the uniform first draw.
  const auto pop = classification({1, 0, 0, 0}, {0.1, 0.6, 0.8, 0.9});
  auto c = tiny(TechniqueId::kDeepest, 2);
  c.deepest_threshold_quantile = 0.5;
  c.deepest_r = 1.0;
  const auto e = enumerate_expectation(pop, c);
  EXPECT_NEAR(e.probability_mass, 1.0, 1e-12);
  EXPECT_LT(e.expectation, mean_target(pop) - 1e-3);
  c.deepest_r = 0.9;
  EXPECT_NEAR(enumerate_expectation(pop, c).expectation, mean_target(pop), 1e-12);
}

TEST(Enumerate, DeepestTransposedAndLiteralRegression) {
  std::mt19937_64 gen(4);
  for (int trial = 0; trial < 30; ++trial) {
    const auto pop = random_population(gen, Task::kRegression, 5);
    auto c = tiny(TechniqueId::kDeepest, 3);
    c.deepest_weighting = DeepestWeighting::kTransposed;
    EXPECT_NEAR(enumerate_expectation(pop, c).expectation, mean_target(pop), 1e-9);
    c.deepest_weighting = DeepestWeighting::kLiteral;
    c.deepest_literal_regression = true;
    EXPECT_NEAR(enumerate_expectation(pop, c).probability_mass, 1.0, 1e-12);
  }
}

}  // namespace
}  // namespace opsample
