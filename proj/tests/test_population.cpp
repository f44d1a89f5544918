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

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

#include "opsample/csv.hpp"
#include "opsample/error.hpp"
#include "opsample/population.hpp"
#include "support.hpp"

namespace opsample {
namespace {

using testing::classification;
using testing::regression;

std::string error_message(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.what();
  }
  return "";
}

TEST(LoadPopulation, ThreeRowClassification) {
  const auto pop = parse_population_csv(
      "id,true_label,predicted_label,confidence\n0,cat,cat,0.9\n1,dog,cat,0.6\n2,dog,dog,0.8\n");
  EXPECT_EQ(pop.size(), 3u);
  EXPECT_EQ(pop.task(), Task::kClassification);
  EXPECT_TRUE(pop.has_aux("confidence"));
  EXPECT_FALSE(is_misprediction(pop[0]));
  EXPECT_TRUE(is_misprediction(pop[1]));
  EXPECT_EQ(pop.aux_column("confidence")[1], 0.6);
}

TEST(LoadPopulation, CustomSchemaNames) {
  ColumnSchema schema;
  schema.true_label = "true";
  schema.predicted_label = "pred";
  const auto pop = parse_population_csv("id,true,pred,confidence\n0,1,1,0.9\n1,1,0,0.6\n2,0,0,0.5\n", schema);
  EXPECT_EQ(pop.size(), 3u);
  EXPECT_DOUBLE_EQ(true_accuracy(pop).xi, 2.0 / 3.0);
}

TEST(LoadPopulation, NanAuxIsAnError) {
  const auto msg = error_message([] {
    parse_population_csv("id,true_label,predicted_label,confidence\n0,1,1,0.9\n1,1,0,nan\n");
  });
  EXPECT_NE(msg.find("non-finite auxiliary value at row 2"), std::string::npos) << msg;
}

TEST(LoadPopulation, Regression) {
  const auto pop = parse_population_csv(
      "id,true_value,predicted_value,sae\n0,1.5,1.0,0.2\n1,-2,-1.5,0.1\n");
  EXPECT_EQ(pop.task(), Task::kRegression);
  EXPECT_DOUBLE_EQ(offset(pop[0]), 0.5);
  EXPECT_DOUBLE_EQ(offset(pop[1]), 0.5);
}

TEST(LoadPopulation, Errors) {
  EXPECT_THROW(parse_population_csv("id,true_label\n0,1\n"), Error);  // missing column
  EXPECT_THROW(parse_population_csv("id,true_label,predicted_label,true_value,predicted_value\n"
                                    "0,1,1,0.5,0.5\n"),
               Error);  // mixed task columns
  EXPECT_THROW(parse_population_csv("id,true_label,predicted_label\n0,1,1\n0,1,1\n"), Error);
  EXPECT_THROW(parse_population_csv("id,true_label,predicted_label\n"), Error);  // empty
}

TEST(LoadPopulation, FeaturesAndJson) {
  const auto csv_pop = parse_population_csv(
      "id,true_label,predicted_label,confidence,feat_0,feat_1\n0,1,1,0.9,0.1,0.2\n1,0,1,0.4,0.3,0.4\n");
  EXPECT_EQ(csv_pop.feature_count(), 2u);
  EXPECT_EQ(csv_pop.aux_names(), std::vector<std::string>{"confidence"});

  const auto json_pop = parse_population_json(R"({"records":[
      {"id":0,"true_label":1,"predicted_label":1,"aux":{"confidence":0.9},"features":[0.1,0.2]},
      {"id":1,"true_label":0,"predicted_label":1,"aux":{"confidence":0.4},"features":[0.3,0.4]}]})");
  EXPECT_EQ(json_pop.size(), 2u);
  EXPECT_EQ(json_pop.feature_count(), 2u);
  EXPECT_EQ(true_accuracy(json_pop).xi, true_accuracy(csv_pop).xi);
  EXPECT_EQ(json_pop.aux_column("confidence"), csv_pop.aux_column("confidence"));
}

TEST(LoadPopulation, WriteReadRoundTrip) {
  SyntheticConfig c;
  c.size = 200;
  const auto pop = generate_synthetic(c, 3);
  const auto dir = testing::scratch_dir("population_roundtrip");
  write_population_csv(pop, dir / "p.csv");
  const auto back = load_population(dir / "p.csv");
  ASSERT_EQ(back.size(), pop.size());
  for (std::size_t i = 0; i < pop.size(); ++i) {
    EXPECT_EQ(is_misprediction(back[i]), is_misprediction(pop[i]));
    EXPECT_EQ(back[i].aux, pop[i].aux);
  }
}

TEST(TrueAccuracy, Examples) {
  EXPECT_EQ(true_accuracy(classification({1, 0, 0, 0}, {})).xi, 0.75);
  EXPECT_EQ(true_accuracy(classification({0, 0, 0}, {})).xi, 1.0);
  const auto r = true_accuracy(regression({0.1, 0.3}, {}));
  EXPECT_NEAR(r.error, 0.05, 1e-12);
  EXPECT_NEAR(r.xi, 0.95, 1e-12);
  EXPECT_FALSE(r.unnormalized_offsets);
}

TEST(TrueAccuracy, UnnormalizedOffsetsFlagged) {
  const auto r = true_accuracy(regression({3.0, 0.0}, {}));
  EXPECT_TRUE(r.unnormalized_offsets);
  EXPECT_NEAR(r.xi, 1.0 - 4.5, 1e-12);
}

TEST(Oracle, RevealSemantics) {
  const auto pop = classification({1, 0, 0, 1}, {});
  LabelingOracle oracle(pop);
  EXPECT_EQ(oracle.reveal(0), 1.0);
  EXPECT_EQ(oracle.reveal(0), 1.0);
  EXPECT_EQ(oracle.reveal_count(), 1u);
  EXPECT_EQ(oracle.reveal(1), 0.0);
  EXPECT_EQ(oracle.reveal(3), 1.0);
  EXPECT_EQ(oracle.reveal_count(), 3u);
  EXPECT_TRUE(oracle.is_labeled(3));
  EXPECT_FALSE(oracle.is_labeled(2));
  EXPECT_EQ(oracle.labeled_ids(), (std::vector<std::size_t>{0, 1, 3}));
  EXPECT_THROW(oracle.reveal(4), Error);
}

TEST(Oracle, RegressionRevealsOffset) {
  const auto pop = regression({0.25, 0.5}, {});
  LabelingOracle oracle(pop);
  EXPECT_DOUBLE_EQ(oracle.reveal(1), 0.5);
  EXPECT_DOUBLE_EQ(outcome_target(Task::kRegression, 0.5), 0.25);
}

TEST(Synthetic, CalibratedAccuracy) {
  SyntheticConfig c;
  c.size = 10000;
  c.target_accuracy = 0.9;
  const auto pop = generate_synthetic(c, 7);
  const double xi = true_accuracy(pop).xi;
  EXPECT_GE(xi, 0.89);
  EXPECT_LE(xi, 0.91);
  EXPECT_LE(std::abs(xi - 0.9), 1.0 / std::sqrt(10000.0));
}

TEST(Synthetic, RegressionCalibration) {
  SyntheticConfig c;
  c.task = Task::kRegression;
  c.size = 5000;
  c.target_accuracy = 0.8;
  const auto pop = generate_synthetic(c, 1);
  EXPECT_NEAR(true_accuracy(pop).xi, 0.8, 1e-9);
  EXPECT_TRUE(pop.has_aux(synthetic_aux_name(Task::kRegression)));
}

TEST(Synthetic, InfeasibleCalibration) {
  SyntheticConfig c;
  c.target_accuracy = 1.0;
  EXPECT_THROW(generate_synthetic(c, 1), Error);
  c.target_accuracy = 0.0;
  EXPECT_THROW(generate_synthetic(c, 1), Error);
  c.target_accuracy = 0.9;
  c.size = 1;
  EXPECT_THROW(generate_synthetic(c, 1), Error);
}

TEST(Synthetic, Deterministic) {
  SyntheticConfig c;
  c.size = 500;
  const auto dir = testing::scratch_dir("synthetic_determinism");
  write_population_csv(generate_synthetic(c, 5), dir / "a.csv");
  write_population_csv(generate_synthetic(c, 5), dir / "b.csv");
  write_population_csv(generate_synthetic(c, 6), dir / "c.csv");
  EXPECT_EQ(csv::read_file(dir / "a.csv"), csv::read_file(dir / "b.csv"));
  EXPECT_NE(csv::read_file(dir / "a.csv"), csv::read_file(dir / "c.csv"));
}

TEST(Synthetic, PerfectCorrelationOrdersChiByFailureProbability) {
  // With rho = 1 chi is a monotone function of the latent score, and the
  // failure probability is monotone in the same score.
  SyntheticConfig c;
  c.size = 2000;
  c.chi_correlation = 1.0;
  const auto pop = generate_synthetic(c, 2);
  const auto conf = pop.aux_column("confidence");
  std::vector<std::size_t> order(pop.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](auto a, auto b) { return conf[a] > conf[b]; });
  // Failure rate in the top chi decile exceeds that of every lower decile.
  std::vector<double> rate(10, 0.0);
  for (std::size_t k = 0; k < order.size(); ++k) {
    rate[k * 10 / order.size()] += is_misprediction(pop[order[k]]) ? 1.0 : 0.0;
  }
  for (int d = 0; d < 9; ++d) EXPECT_LE(rate[d], rate[9]);
  EXPECT_LT(rate[0], rate[9]);
}

TEST(Synthetic, ZeroCorrelation) {
  SyntheticConfig c;
  c.size = 2000;
  c.chi_correlation = 0.0;
  c.chi_skew = 0.0;
  int within = 0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const auto pop = generate_synthetic(c, seed);
    const auto conf = pop.aux_column("confidence");
    double mc = 0.0, mz = 0.0;
    for (std::size_t i = 0; i < pop.size(); ++i) {
      mc += 1.0 - conf[i];
      mz += is_misprediction(pop[i]);
    }
    mc /= pop.size();
    mz /= pop.size();
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < pop.size(); ++i) {
      const double x = 1.0 - conf[i] - mc, y = is_misprediction(pop[i]) - mz;
      sxy += x * y;
      sxx += x * x;
      syy += y * y;
    }
    if (std::abs(sxy / std::sqrt(sxx * syy)) <= 3.0 / std::sqrt(2000.0)) ++within;
  }
  // Each seed falls inside with probability ~0.997.
  EXPECT_GE(within, 97);
}

}  // namespace
}  // namespace opsample
