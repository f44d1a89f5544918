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

#ifndef OPSAMPLE_TECHNIQUES_HPP_
#define OPSAMPLE_TECHNIQUES_HPP_

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "opsample/draw.hpp"
#include "opsample/partition.hpp"
#include "opsample/population.hpp"
#include "opsample/random.hpp"

namespace opsample {

enum class TechniqueId { kSrs, kSups, kRhcs, kCes, kDeepest, kSsrs, kGbs, kTwoUps };

std::string_view technique_name(TechniqueId id);
TechniqueId parse_technique(std::string_view name);
const std::vector<TechniqueId>& all_techniques();
bool uses_aux(TechniqueId id);

enum class DeepestWeighting {
  kLiteral,     // w_ij = chi_j when chi_i exceeds the threshold
  kTransposed,  // w_ij = chi_i when chi_j exceeds the threshold
};

struct TechniqueConfig {
  TechniqueId technique = TechniqueId::kSrs;
  std::string aux;  // empty for srs and ces
  std::size_t budget = 200;

  double deepest_r = 0.8;
  double deepest_threshold_quantile = 0.7;
  DeepestWeighting deepest_weighting = DeepestWeighting::kLiteral;
  /// Use the step estimator for squared offsets exactly as originally
  /// published (selected terms over k-1, new term over k). It is biased;
  /// the default mirrors the classification estimator instead.
  bool deepest_literal_regression = false;

  std::size_t ces_initial = 30;
  std::size_t ces_group = 5;
  std::size_t ces_candidates = 300;
  std::size_t ces_bins = 10;

  std::size_t partitions = 10;
  std::uint64_t kmeans_seed = 0;
  /// Units reserved in every stratum before Neyman allocation (when the
  /// budget allows); 0 permits empty strata.
  std::size_t ssrs_min_per_partition = 1;
  double gbs_variance_floor = 1e-6;

  double pps_floor_fraction = 1e-9;
  /// Regression offsets at or above this count as failures.
  double failure_threshold = 12.5;
  bool keep_trace = true;
};

void validate(const TechniqueConfig& config);
nlohmann::json to_json(const TechniqueConfig& config);
/// Overlays the keys present in `j` onto `base`.
TechniqueConfig technique_config_from_json(const nlohmann::json& j, TechniqueConfig base = {});

/// Everything a technique may see about the operational dataset: its size,
/// task, auxiliary scores and derived structures. No ground truth.
struct SamplingFrame {
  Task task = Task::kClassification;
  std::size_t size = 0;
  std::vector<std::size_t> ids;  // 0..N-1

  std::string aux;
  std::vector<double> chi;
  std::vector<double> pi;
  std::optional<PpsTable> pps;
  std::optional<PartitionMap> partitions;
  std::vector<double> psi;  // partition selection probabilities
  double deepest_threshold = 0.0;

  std::size_t ces_dims = 0;
  std::size_t ces_bins = 0;
  std::vector<std::uint16_t> ces_bin_index;  // N x dims, row-major
  std::vector<double> ces_operational;       // dims x bins, frequencies

  bool has_aux() const { return !chi.empty(); }
};

/// Builds the frame for `config.aux` (may be empty). Partitions are computed
/// with `config.partitions` and `config.kmeans_seed`; CES bins use the
/// population features or, failing that, the raw auxiliary columns.
SamplingFrame prepare_frame(const Population& population, const TechniqueConfig& config);

/// Linear-interpolation quantile of `values`.
double quantile(std::span<const double> values, double q);

struct TechniqueResult {
  TechniqueId technique = TechniqueId::kSrs;
  std::string aux;
  std::size_t budget = 0;
  std::vector<std::size_t> selected;  // draw order, repeats kept
  std::size_t distinct_labeled = 0;
  double estimate = 0.0;  // theta-hat or Delta-hat, never clamped
  double xi_hat = 0.0;
  std::size_t failures = 0;
  std::vector<double> offsets;             // regression: one per distinct labeled id
  std::vector<std::size_t> allocation;     // draws per partition (partition techniques)
  std::vector<std::string> flags;
  DrawTrace trace;
};

nlohmann::json to_json(const TechniqueResult& result, bool include_trace);

TechniqueResult run_srs(const SamplingFrame& frame, LabelingOracle& oracle,
                        const TechniqueConfig& config, RandomStream& rng);
TechniqueResult run_sups(const SamplingFrame& frame, LabelingOracle& oracle,
                         const TechniqueConfig& config, RandomStream& rng);
TechniqueResult run_rhcs(const SamplingFrame& frame, LabelingOracle& oracle,
                         const TechniqueConfig& config, RandomStream& rng);
TechniqueResult run_ces(const SamplingFrame& frame, LabelingOracle& oracle,
                        const TechniqueConfig& config, RandomStream& rng);
TechniqueResult run_deepest(const SamplingFrame& frame, LabelingOracle& oracle,
                            const TechniqueConfig& config, RandomStream& rng);
TechniqueResult run_ssrs(const SamplingFrame& frame, LabelingOracle& oracle,
                         const TechniqueConfig& config, RandomStream& rng);
TechniqueResult run_gbs(const SamplingFrame& frame, LabelingOracle& oracle,
                        const TechniqueConfig& config, RandomStream& rng);
TechniqueResult run_twoups(const SamplingFrame& frame, LabelingOracle& oracle,
                           const TechniqueConfig& config, RandomStream& rng);

/// Dispatches on config.technique after checking frame/config compatibility.
TechniqueResult run_technique(const SamplingFrame& frame, LabelingOracle& oracle,
                              const TechniqueConfig& config, RandomStream& rng);

/// Average over dimensions of -sum_b P_op(b) log P_sel(b), where P_sel uses
/// add-one smoothing: (count_b + 1) / (selected + bins).
double ces_cross_entropy(std::span<const double> operational, std::span<const std::size_t> selected_counts,
                         std::size_t selected, std::size_t dims, std::size_t bins);

/// Partition with the largest decrease of sum_p (N_p/N)^2 s_p^2 / n_p when
/// n_p grows by one; ties are broken uniformly with `rng`. Every count must
/// be positive.
std::size_t gbs_select_partition(std::span<const std::size_t> sizes,
                                 std::span<const double> variances,
                                 std::span<const std::size_t> counts, RandomStream& rng);

}  // namespace opsample

#endif  // OPSAMPLE_TECHNIQUES_HPP_
