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

#ifndef OPSAMPLE_HARNESS_HPP_
#define OPSAMPLE_HARNESS_HPP_

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "opsample/population.hpp"
#include "opsample/techniques.hpp"

namespace opsample {

// --- metrics ---------------------------------------------------------------

double rmse(std::span<const double> estimates, double true_xi);

/// Square root of the median squared error; an even count averages the two
/// central squared errors.
double rmedse(std::span<const double> estimates, double true_xi);

/// N_{delta >= y} for every threshold y (inclusive on the left).
std::vector<std::size_t> offset_histogram(std::span<const double> offsets,
                                          std::span<const double> thresholds);

struct KsResult {
  double statistic = 0.0;
  double p_value = 1.0;
};

/// Two-sample Kolmogorov-Smirnov test with the asymptotic p-value. Values
/// closer than `tie_tolerance` (relative) are pooled as ties.
KsResult ks_two_sample(std::span<const double> a, std::span<const double> b,
                       double tie_tolerance = 1e-12);

// --- experiments -------------------------------------------------------------

struct EvalConfig {
  std::string population;  // path; empty when `synthetic` is set
  std::optional<SyntheticConfig> synthetic;
  std::uint64_t synthetic_seed = 0;

  std::vector<TechniqueId> techniques = all_techniques();
  std::vector<std::string> aux = {"confidence"};
  std::vector<std::size_t> budgets = {50, 100, 200, 400, 800};
  std::size_t repetitions = 30;
  std::uint64_t seed = 0;
  std::vector<double> offset_thresholds = {0.0,  2.5,  5.0,  7.5,  10.0, 12.5,
                                           15.0, 17.5, 20.0, 22.5, 25.0};
  double failure_threshold = 12.5;
  /// Technique knobs; technique, aux and budget are overridden per cell.
  TechniqueConfig knobs;
  std::size_t jobs = 1;
};

/// Keys: task, size, accuracy, rho, link_slope, chi_skew, offset_scale, classes.
nlohmann::json to_json(const SyntheticConfig& config);
SyntheticConfig synthetic_config_from_json(const nlohmann::json& j, SyntheticConfig base = {});

void validate(const EvalConfig& config);
nlohmann::json to_json(const EvalConfig& config);
EvalConfig eval_config_from_json(const nlohmann::json& j, EvalConfig base = {});

struct RepetitionRow {
  std::string technique;
  std::string aux;
  std::size_t budget = 0;
  std::size_t repetition = 0;
  std::uint64_t seed = 0;
  double estimate = 0.0;
  double xi_hat = 0.0;
  std::size_t distinct_labeled = 0;
  std::size_t failures = 0;
  std::vector<std::size_t> offset_counts;  // regression only
};

struct CellSummary {
  std::string technique;
  std::string aux;
  std::size_t budget = 0;
  std::string status = "ok";  // or "skipped: <reason>"
  std::size_t repetitions = 0;
  double true_xi = 0.0;
  double mean_xi_hat = 0.0;
  double rmse = 0.0;
  double rmedse = 0.0;
  double failures_mean = 0.0;
  double failures_std = 0.0;
  double distinct_mean = 0.0;
  std::vector<double> offset_means;
  // Shared by all budgets of one (technique, aux) pair.
  std::optional<double> failure_ratio;  // largest over smallest budget
  std::optional<std::size_t> min_rmse_budget;
  std::optional<bool> inversion;
};

struct EvalReport {
  EvalConfig config;
  Task task = Task::kClassification;
  TrueAccuracy truth;
  std::vector<CellSummary> cells;
  std::vector<RepetitionRow> rows;
};

std::uint64_t cell_seed(std::uint64_t master, std::string_view technique, std::string_view aux,
                        std::size_t budget, std::size_t repetition);

EvalReport run_experiment(const EvalConfig& config, const Population& population);

/// Loads or generates the population named by the configuration.
Population resolve_population(const EvalConfig& config);

/// Aggregates raw rows into cells, in the grid order given by `config`.
std::vector<CellSummary> summarize(const EvalConfig& config, Task task, double true_xi,
                                   std::span<const RepetitionRow> rows,
                                   std::span<const CellSummary> skipped = {});

struct Sensitivity {
  std::string technique;
  std::string aux;
  std::size_t min_rmse_budget = 0;
  bool inversion = false;
};

/// Argmin budget of RMSE and whether the smallest budget beats the largest.
Sensitivity sensitivity(std::span<const std::size_t> budgets, std::span<const double> rmses);
std::vector<Sensitivity> sensitivity_summary(const EvalReport& report);

std::string summary_csv(const EvalReport& report);
std::string raw_csv(const EvalReport& report);
std::string rmse_curve_csv(const EvalReport& report);
std::string offset_histogram_csv(const EvalReport& report);
nlohmann::json manifest(const EvalReport& report);

std::vector<RepetitionRow> parse_raw_csv(std::string_view text);

// --- exact oracle ------------------------------------------------------------

struct Enumeration {
  double expectation = 0.0;  // E[theta-hat] or E[Delta-hat]
  double probability_mass = 0.0;
  std::size_t paths = 0;
};

/// Exhaustive expectation of the estimator over every sample path. Supports
/// srs, sups, rhcs, ssrs, twoups (N <= 10, n <= 4) and deepest (N <= 8,
/// n <= 3).
Enumeration enumerate_expectation(const Population& population, const TechniqueConfig& config);

}  // namespace opsample

#endif  // OPSAMPLE_HARNESS_HPP_
