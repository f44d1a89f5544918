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

#include "opsample/techniques.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "opsample/auxvar.hpp"
#include "opsample/error.hpp"

namespace opsample {

namespace {

struct NamedTechnique {
  TechniqueId id;
  std::string_view name;
};

constexpr NamedTechnique kTechniques[] = {
    {TechniqueId::kSrs, "srs"},         {TechniqueId::kSups, "sups"},
    {TechniqueId::kRhcs, "rhcs"},       {TechniqueId::kCes, "ces"},
    {TechniqueId::kDeepest, "deepest"}, {TechniqueId::kSsrs, "ssrs"},
    {TechniqueId::kGbs, "gbs"},         {TechniqueId::kTwoUps, "twoups"},
};

}  // namespace

std::string_view technique_name(TechniqueId id) {
  for (const auto& t : kTechniques) {
    if (t.id == id) return t.name;
  }
  return "unknown";
}

TechniqueId parse_technique(std::string_view name) {
  for (const auto& t : kTechniques) {
    if (t.name == name) return t.id;
  }
  if (name == "rhc-s") return TechniqueId::kRhcs;
  if (name == "2-ups" || name == "2ups") return TechniqueId::kTwoUps;
  fail("invalid_argument", "unknown technique '" + std::string(name) + "'");
}

const std::vector<TechniqueId>& all_techniques() {
  static const std::vector<TechniqueId> ids = [] {
    std::vector<TechniqueId> v;
    for (const auto& t : kTechniques) v.push_back(t.id);
    return v;
  }();
  return ids;
}

bool uses_aux(TechniqueId id) { return id != TechniqueId::kSrs && id != TechniqueId::kCes; }

void validate(const TechniqueConfig& c) {
  require(c.budget >= 1, "budget must be at least 1");
  require(c.deepest_r >= 0.0 && c.deepest_r <= 1.0, "DeepEST r must lie in [0, 1]");
  require(c.deepest_threshold_quantile >= 0.0 && c.deepest_threshold_quantile <= 1.0,
          "DeepEST threshold quantile must lie in [0, 1]");
  require(c.ces_initial >= 1 && c.ces_group >= 1 && c.ces_candidates >= 1 && c.ces_bins >= 1,
          "CES sizes must be at least 1");
  require(c.ces_bins <= 65535, "CES bin count too large");
  require(c.partitions >= 1, "partition count must be at least 1");
  require(c.gbs_variance_floor > 0.0, "GBS variance floor must be positive");
  require(c.pps_floor_fraction >= 0.0, "PPS floor must be nonnegative");
  if (uses_aux(c.technique)) {
    require(!c.aux.empty(), std::string(technique_name(c.technique)) +
                                " needs an auxiliary variable");
  }
}

nlohmann::json to_json(const TechniqueConfig& c) {
  return {
      {"technique", technique_name(c.technique)},
      {"aux", c.aux},
      {"budget", c.budget},
      {"deepest_r", c.deepest_r},
      {"deepest_threshold_quantile", c.deepest_threshold_quantile},
      {"deepest_weighting",
       c.deepest_weighting == DeepestWeighting::kLiteral ? "literal" : "transposed"},
      {"deepest_literal_regression", c.deepest_literal_regression},
      {"ces_initial", c.ces_initial},
      {"ces_group", c.ces_group},
      {"ces_candidates", c.ces_candidates},
      {"ces_bins", c.ces_bins},
      {"partitions", c.partitions},
      {"kmeans_seed", c.kmeans_seed},
      {"ssrs_min_per_partition", c.ssrs_min_per_partition},
      {"gbs_variance_floor", c.gbs_variance_floor},
      {"pps_floor_fraction", c.pps_floor_fraction},
      {"failure_threshold", c.failure_threshold},
  };
}

TechniqueConfig technique_config_from_json(const nlohmann::json& j, TechniqueConfig c) {
  try {
    if (j.contains("technique")) c.technique = parse_technique(j["technique"].get<std::string>());
    if (j.contains("aux")) c.aux = j["aux"].get<std::string>();
    if (j.contains("budget")) c.budget = j["budget"].get<std::size_t>();
    if (j.contains("deepest_r")) c.deepest_r = j["deepest_r"].get<double>();
    if (j.contains("deepest_threshold_quantile")) {
      c.deepest_threshold_quantile = j["deepest_threshold_quantile"].get<double>();
    }
    if (j.contains("deepest_weighting")) {
      const auto w = j["deepest_weighting"].get<std::string>();
      if (w == "literal") {
        c.deepest_weighting = DeepestWeighting::kLiteral;
      } else if (w == "transposed") {
        c.deepest_weighting = DeepestWeighting::kTransposed;
      } else {
        fail("invalid_argument", "deepest_weighting must be 'literal' or 'transposed'");
      }
    }
    if (j.contains("deepest_literal_regression")) {
      c.deepest_literal_regression = j["deepest_literal_regression"].get<bool>();
    }
    if (j.contains("ces_initial")) c.ces_initial = j["ces_initial"].get<std::size_t>();
    if (j.contains("ces_group")) c.ces_group = j["ces_group"].get<std::size_t>();
    if (j.contains("ces_candidates")) c.ces_candidates = j["ces_candidates"].get<std::size_t>();
    if (j.contains("ces_bins")) c.ces_bins = j["ces_bins"].get<std::size_t>();
    if (j.contains("partitions")) c.partitions = j["partitions"].get<std::size_t>();
    if (j.contains("kmeans_seed")) c.kmeans_seed = j["kmeans_seed"].get<std::uint64_t>();
    if (j.contains("ssrs_min_per_partition")) {
      c.ssrs_min_per_partition = j["ssrs_min_per_partition"].get<std::size_t>();
    }
    if (j.contains("gbs_variance_floor")) c.gbs_variance_floor = j["gbs_variance_floor"].get<double>();
    if (j.contains("pps_floor_fraction")) c.pps_floor_fraction = j["pps_floor_fraction"].get<double>();
    if (j.contains("failure_threshold")) c.failure_threshold = j["failure_threshold"].get<double>();
  } catch (const nlohmann::json::exception& e) {
    fail("invalid_argument", std::string("bad technique configuration: ") + e.what());
  }
  return c;
}

double quantile(std::span<const double> values, double q) {
  require(!values.empty(), "quantile of an empty vector");
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (pos - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

SamplingFrame prepare_frame(const Population& population, const TechniqueConfig& config) {
  SamplingFrame f;
  f.task = population.task();
  f.size = population.size();
  f.ids.resize(f.size);
  std::iota(f.ids.begin(), f.ids.end(), std::size_t{0});

  if (!config.aux.empty()) {
    f.aux = config.aux;
    f.chi = chi_for(population, config.aux).values;
    f.pi = selection_probabilities(f.chi, config.pps_floor_fraction);
    f.pps.emplace(f.pi);
    f.partitions = kmeans_1d(f.chi, config.partitions, config.kmeans_seed);
    f.psi.assign(f.partitions->count(), 0.0);
    double total = 0.0;
    for (std::size_t i = 0; i < f.size; ++i) {
      f.psi[f.partitions->assignment[i]] += f.pi[i];
      total += f.pi[i];
    }
    for (double& p : f.psi) p /= total;
    f.deepest_threshold = quantile(f.chi, config.deepest_threshold_quantile);
  }

  // CES representation: features when present, else raw auxiliary columns.
  std::vector<std::vector<double>> columns;
  if (population.feature_count() > 0) {
    for (std::size_t m = 0; m < population.feature_count(); ++m) {
      std::vector<double> col(f.size);
      for (std::size_t i = 0; i < f.size; ++i) col[i] = population[i].features[m];
      columns.push_back(std::move(col));
    }
  } else {
    for (const auto& name : population.aux_names()) columns.push_back(population.aux_column(name));
  }
  if (!columns.empty()) {
    f.ces_dims = columns.size();
    f.ces_bins = config.ces_bins;
    f.ces_bin_index.resize(f.size * f.ces_dims);
    f.ces_operational.assign(f.ces_dims * f.ces_bins, 0.0);
    for (std::size_t d = 0; d < f.ces_dims; ++d) {
      const auto [lo, hi] = std::minmax_element(columns[d].begin(), columns[d].end());
      const double width = (*hi - *lo) / static_cast<double>(f.ces_bins);
      for (std::size_t i = 0; i < f.size; ++i) {
        std::size_t b = 0;
        if (width > 0.0) {
          b = static_cast<std::size_t>((columns[d][i] - *lo) / width);
          b = std::min(b, f.ces_bins - 1);
        }
        f.ces_bin_index[i * f.ces_dims + d] = static_cast<std::uint16_t>(b);
        f.ces_operational[d * f.ces_bins + b] += 1.0;
      }
      for (std::size_t b = 0; b < f.ces_bins; ++b) {
        f.ces_operational[d * f.ces_bins + b] /= static_cast<double>(f.size);
      }
    }
  }
  return f;
}

nlohmann::json to_json(const TechniqueResult& r, bool include_trace) {
  nlohmann::json j = {
      {"technique", technique_name(r.technique)},
      {"aux", r.aux},
      {"budget", r.budget},
      {"estimate", r.estimate},
      {"xi_hat", r.xi_hat},
      {"distinct_labeled", r.distinct_labeled},
      {"draws", r.selected.size()},
      {"failures", r.failures},
      {"selected", r.selected},
      {"flags", r.flags},
  };
  if (!r.allocation.empty()) j["allocation"] = r.allocation;
  if (!r.offsets.empty()) j["offsets"] = r.offsets;
  if (include_trace) {
    nlohmann::json trace = nlohmann::json::array();
    for (const auto& s : r.trace) {
      trace.push_back({{"step", s.step}, {"id", s.id}, {"probability", s.probability},
                       {"scheme", s.scheme}});
    }
    j["trace"] = std::move(trace);
  }
  return j;
}

// ---------------------------------------------------------------------------

namespace {

double as_n(std::size_t x) { return static_cast<double>(x); }

TechniqueResult start(const TechniqueConfig& config, const SamplingFrame& frame) {
  TechniqueResult r;
  r.technique = config.technique;
  r.aux = uses_aux(config.technique) ? frame.aux : std::string();
  r.budget = config.budget;
  r.selected.reserve(config.budget);
  return r;
}

void record(TechniqueResult& r, const TechniqueConfig& config, std::size_t id, double probability,
            const char* scheme) {
  r.selected.push_back(id);
  if (config.keep_trace) r.trace.push_back({r.selected.size(), id, probability, scheme});
}

// Labels each drawn example once more (free after the first reveal) and fills
// the failure statistics over distinct labeled examples.
void finish(TechniqueResult& r, LabelingOracle& oracle, const TechniqueConfig& config,
            double estimate) {
  r.estimate = estimate;
  r.xi_hat = 1.0 - estimate;
  r.distinct_labeled = oracle.reveal_count();
  r.failures = 0;
  for (std::size_t id : oracle.labeled_ids()) {
    const double outcome = oracle.reveal(id);
    if (oracle.task() == Task::kClassification) {
      if (outcome != 0.0) ++r.failures;
    } else {
      r.offsets.push_back(outcome);
      if (outcome >= config.failure_threshold) ++r.failures;
    }
  }
}

double observe(LabelingOracle& oracle, std::size_t id) {
  return outcome_target(oracle.task(), oracle.reveal(id));
}

void require_aux(const SamplingFrame& frame, const TechniqueConfig& config) {
  if (!frame.has_aux()) {
    fail("incompatible", std::string(technique_name(config.technique)) +
                             " needs a frame prepared with an auxiliary variable");
  }
}

}  // namespace

TechniqueResult run_srs(const SamplingFrame& frame, LabelingOracle& oracle,
                        const TechniqueConfig& config, RandomStream& rng) {
  TechniqueResult r = start(config, frame);
  const double p = 1.0 / as_n(frame.size);
  double sum = 0.0;
  for (std::size_t id : srs_with_replacement(frame.ids, config.budget, rng)) {
    record(r, config, id, p, "srs");
    sum += observe(oracle, id);
  }
  finish(r, oracle, config, sum / as_n(config.budget));
  return r;
}

TechniqueResult run_sups(const SamplingFrame& frame, LabelingOracle& oracle,
                         const TechniqueConfig& config, RandomStream& rng) {
  require_aux(frame, config);
  TechniqueResult r = start(config, frame);
  double sum = 0.0;
  for (std::size_t k = 0; k < config.budget; ++k) {
    const std::size_t id = frame.pps->draw(rng);
    record(r, config, id, frame.pi[id], "pps");
    sum += observe(oracle, id) / frame.pi[id];
  }
  finish(r, oracle, config, sum / (as_n(config.budget) * as_n(frame.size)));
  return r;
}

TechniqueResult run_rhcs(const SamplingFrame& frame, LabelingOracle& oracle,
                         const TechniqueConfig& config, RandomStream& rng) {
  require_aux(frame, config);
  if (config.budget > frame.size) {
    fail("invalid_argument", "RHC-S: budget exceeds population size");
  }
  TechniqueResult r = start(config, frame);
  double sum = 0.0;
  std::vector<double> weights;
  for (const auto& group : random_grouping(frame.ids, config.budget, rng)) {
    weights.clear();
    for (std::size_t id : group) weights.push_back(frame.pi[id]);
    const PpsTable table(weights);
    const double q = table.total();
    const std::size_t id = group[table.draw(rng)];
    record(r, config, id, frame.pi[id] / q, "rhc");
    sum += observe(oracle, id) / (frame.pi[id] / q);
  }
  finish(r, oracle, config, sum / as_n(frame.size));
  return r;
}

double ces_cross_entropy(std::span<const double> operational,
                         std::span<const std::size_t> selected_counts, std::size_t selected,
                         std::size_t dims, std::size_t bins) {
  require(operational.size() == dims * bins && selected_counts.size() == dims * bins,
          "cross-entropy: histogram size mismatch");
  const double denom = as_n(selected + bins);
  double total = 0.0;
  for (std::size_t d = 0; d < dims; ++d) {
    for (std::size_t b = 0; b < bins; ++b) {
      const double p = operational[d * bins + b];
      if (p > 0.0) total -= p * std::log(as_n(selected_counts[d * bins + b] + 1) / denom);
    }
  }
  return total / as_n(dims);
}

TechniqueResult run_ces(const SamplingFrame& frame, LabelingOracle& oracle,
                        const TechniqueConfig& config, RandomStream& rng) {
  if (frame.ces_dims == 0) fail("invalid_argument", "CES: population has no feature columns");
  if (config.budget < config.ces_initial) {
    fail("invalid_argument", "CES: budget is smaller than the initial sample size");
  }
  if (config.budget > frame.size) fail("invalid_argument", "CES: budget exceeds population size");
  TechniqueResult r = start(config, frame);
  const std::size_t dims = frame.ces_dims;
  const std::size_t bins = frame.ces_bins;
  std::vector<std::uint8_t> chosen(frame.size, 0);
  std::vector<std::size_t> counts(dims * bins, 0);

  auto add = [&](std::size_t id, std::vector<std::size_t>& c) {
    for (std::size_t d = 0; d < dims; ++d) ++c[d * bins + frame.ces_bin_index[id * dims + d]];
  };

  for (std::size_t id : srs_without_replacement(frame.ids, config.ces_initial, rng)) {
    record(r, config, id, 1.0 / as_n(frame.size - r.selected.size()), "ces-initial");
    chosen[id] = 1;
    add(id, counts);
  }

  std::vector<std::size_t> candidate, best, trial;
  while (r.selected.size() < config.budget) {
    const std::size_t group = std::min(config.ces_group, config.budget - r.selected.size());
    const std::size_t available = frame.size - r.selected.size();
    double best_ce = std::numeric_limits<double>::infinity();
    best.clear();
    for (std::size_t c = 0; c < config.ces_candidates; ++c) {
      candidate.clear();
      while (candidate.size() < group) {
        const std::size_t id = rng.below(frame.size);
        if (chosen[id] || std::find(candidate.begin(), candidate.end(), id) != candidate.end()) {
          continue;
        }
        candidate.push_back(id);
      }
      trial = counts;
      for (std::size_t id : candidate) add(id, trial);
      const double ce =
          ces_cross_entropy(frame.ces_operational, trial, r.selected.size() + group, dims, bins);
      if (ce < best_ce) {
        best_ce = ce;
        best = candidate;
      }
    }
    for (std::size_t id : best) {
      record(r, config, id, 1.0 / as_n(available), "ces-group");
      chosen[id] = 1;
      add(id, counts);
    }
  }

  double sum = 0.0;
  for (std::size_t id : r.selected) sum += observe(oracle, id);
  finish(r, oracle, config, sum / as_n(r.selected.size()));
  return r;
}

TechniqueResult run_deepest(const SamplingFrame& frame, LabelingOracle& oracle,
                            const TechniqueConfig& config, RandomStream& rng) {
  require_aux(frame, config);
  const std::size_t n = config.budget;
  const std::size_t big_n = frame.size;
  if (n > big_n) fail("invalid_argument", "DeepEST: budget exceeds population size");
  TechniqueResult r = start(config, frame);
  const double threshold = frame.deepest_threshold;
  const bool literal = config.deepest_weighting == DeepestWeighting::kLiteral;

  // Both weightings factor as w_ij = a_i * b_j, so the WBS probability of i is
  // a_i / sum of a over unselected examples whenever sum_j b_j > 0.
  std::vector<double> a(big_n);
  for (std::size_t i = 0; i < big_n; ++i) {
    a[i] = literal ? (frame.chi[i] > threshold ? 1.0 : 0.0) : frame.chi[i];
  }
  auto b_of = [&](std::size_t j) {
    return literal ? frame.chi[j] : (frame.chi[j] > threshold ? 1.0 : 0.0);
  };
  WeightedPool pool(a);

  // Unselected ids live in pool_ids[k, N); position[] tracks them so the
  // uniform branch is a partial Fisher-Yates step.
  std::vector<std::size_t> pool_ids(frame.ids);
  std::vector<std::size_t> position(frame.ids);

  const double r_wbs = config.deepest_r;
  double b_sum = 0.0;
  double selected_sum = 0.0;  // sum of targets over s_k
  double step_sum = 0.0;      // sum of step estimates for k >= 2
  double first = 0.0;

  auto take = [&](std::size_t k, std::size_t id) {
    const std::size_t at = position[id];
    std::swap(pool_ids[k], pool_ids[at]);
    position[pool_ids[at]] = at;
    position[pool_ids[k]] = k;
    pool.set(id, 0.0);
    b_sum += b_of(id);
  };

  for (std::size_t k = 0; k < n; ++k) {
    const double remaining = as_n(big_n - k);
    std::size_t id;
    double q;
    const char* scheme = "srs";
    if (k == 0) {
      id = pool_ids[rng.below(big_n)];
      q = 1.0 / remaining;
    } else {
      const bool wbs_defined = b_sum > 0.0 && pool.total() > 0.0;
      const bool use_wbs = r_wbs > 0.0 && rng.uniform() < r_wbs;
      if (use_wbs && wbs_defined) {
        id = pool.draw(rng);
        scheme = "wbs";
      } else {
        id = pool_ids[k + rng.below(big_n - k)];
        if (use_wbs) scheme = "wbs-fallback";
      }
      const double wbs_prob = wbs_defined ? pool.weight(id) / pool.total() : 1.0 / remaining;
      q = r_wbs * wbs_prob + (1.0 - r_wbs) / remaining;
    }
    take(k, id);
    record(r, config, id, q, scheme);
    const double y = observe(oracle, id);
    if (k == 0) {
      first = y;
    } else if (oracle.task() == Task::kRegression && config.deepest_literal_regression) {
      const double kk = as_n(k + 1);
      step_sum += selected_sum / (kk - 1.0) + (y / kk) / q;
    } else {
      step_sum += selected_sum + y / q;
    }
    selected_sum += y;
  }
  finish(r, oracle, config, (first + step_sum / as_n(big_n)) / as_n(n));
  return r;
}

TechniqueResult run_ssrs(const SamplingFrame& frame, LabelingOracle& oracle,
                         const TechniqueConfig& config, RandomStream& rng) {
  require_aux(frame, config);
  if (config.budget > frame.size) fail("invalid_argument", "SSRS: budget exceeds population size");
  TechniqueResult r = start(config, frame);
  const PartitionMap& pm = *frame.partitions;
  const Allocation alloc =
      neyman_allocation(pm, frame.chi, config.budget, config.ssrs_min_per_partition);
  r.allocation = alloc.per_partition;
  double estimate = 0.0;
  for (std::size_t p = 0; p < pm.count(); ++p) {
    const std::size_t np = alloc.per_partition[p];
    if (np == 0) {
      r.flags.push_back("empty-stratum:" + std::to_string(p));
      continue;
    }
    double sum = 0.0;
    std::size_t j = 0;
    for (std::size_t id : srs_without_replacement(pm.members[p], np, rng)) {
      record(r, config, id, 1.0 / as_n(pm.sizes[p] - j++), "ssrs");
      sum += observe(oracle, id);
    }
    estimate += (as_n(pm.sizes[p]) / as_n(frame.size)) * (sum / as_n(np));
  }
  finish(r, oracle, config, estimate);
  return r;
}

std::size_t gbs_select_partition(std::span<const std::size_t> sizes,
                                 std::span<const double> variances,
                                 std::span<const std::size_t> counts, RandomStream& rng) {
  require(sizes.size() == variances.size() && sizes.size() == counts.size() && !sizes.empty(),
          "GBS: partition statistics differ in length");
  const double total = as_n(std::accumulate(sizes.begin(), sizes.end(), std::size_t{0}));
  std::vector<double> gain(sizes.size());
  double best = -std::numeric_limits<double>::infinity();
  for (std::size_t p = 0; p < sizes.size(); ++p) {
    require(counts[p] > 0, "GBS: every partition needs at least one draw");
    const double w = as_n(sizes[p]) / total;
    const double n = as_n(counts[p]);
    gain[p] = w * w * variances[p] * (1.0 / n - 1.0 / (n + 1.0));
    best = std::max(best, gain[p]);
  }
  std::vector<std::size_t> ties;
  for (std::size_t p = 0; p < sizes.size(); ++p) {
    if (gain[p] >= best * (1.0 - 1e-12)) ties.push_back(p);
  }
  return ties.size() == 1 ? ties.front() : ties[rng.below(ties.size())];
}

TechniqueResult run_gbs(const SamplingFrame& frame, LabelingOracle& oracle,
                        const TechniqueConfig& config, RandomStream& rng) {
  require_aux(frame, config);
  TechniqueResult r = start(config, frame);
  const PartitionMap& pm = *frame.partitions;
  const std::size_t parts = pm.count();
  std::vector<std::size_t> counts(parts, 0);
  std::vector<double> sums(parts, 0.0), squares(parts, 0.0);
  double lowest = std::numeric_limits<double>::infinity();
  double highest = -std::numeric_limits<double>::infinity();

  auto draw_from = [&](std::size_t p) {
    const std::size_t id = pm.members[p][rng.below(pm.sizes[p])];
    record(r, config, id, 1.0 / as_n(pm.sizes[p]), "gbs");
    const double y = observe(oracle, id);
    ++counts[p];
    sums[p] += y;
    squares[p] += y * y;
    lowest = std::min(lowest, y);
    highest = std::max(highest, y);
  };

  std::vector<std::size_t> warmup(parts);
  std::iota(warmup.begin(), warmup.end(), std::size_t{0});
  if (config.budget < parts) {
    std::stable_sort(warmup.begin(), warmup.end(),
                     [&](std::size_t a, std::size_t b) { return pm.sizes[a] > pm.sizes[b]; });
    warmup.resize(config.budget);
    std::sort(warmup.begin(), warmup.end());
    r.flags.push_back("warmup-truncated");
  }
  for (std::size_t p : warmup) draw_from(p);

  std::vector<double> variances(parts);
  while (r.selected.size() < config.budget) {
    for (std::size_t p = 0; p < parts; ++p) {
      const double m = as_n(counts[p] + 2);
      const double mean = (sums[p] + lowest + highest) / m;
      const double ss = squares[p] + lowest * lowest + highest * highest - m * mean * mean;
      variances[p] = std::max(config.gbs_variance_floor, ss / (m - 1.0));
    }
    draw_from(gbs_select_partition(pm.sizes, variances, counts, rng));
  }

  double estimate = 0.0;
  for (std::size_t p = 0; p < parts; ++p) {
    if (counts[p] == 0) {
      r.flags.push_back("empty-stratum:" + std::to_string(p));
      continue;
    }
    estimate += (as_n(pm.sizes[p]) / as_n(frame.size)) * (sums[p] / as_n(counts[p]));
  }
  r.allocation = counts;
  finish(r, oracle, config, estimate);
  return r;
}

TechniqueResult run_twoups(const SamplingFrame& frame, LabelingOracle& oracle,
                           const TechniqueConfig& config, RandomStream& rng) {
  require_aux(frame, config);
  TechniqueResult r = start(config, frame);
  const PartitionMap& pm = *frame.partitions;
  const PpsTable first_stage(frame.psi);
  std::vector<std::vector<std::size_t>> pools(pm.count());
  std::vector<std::size_t> used(pm.count(), 0);
  std::vector<bool> exhausted_flagged(pm.count(), false);
  std::vector<std::size_t> hits(pm.count(), 0);
  double sum = 0.0;
  for (std::size_t k = 0; k < config.budget; ++k) {
    const std::size_t p = first_stage.draw(rng);
    ++hits[p];
    auto& pool = pools[p];
    if (pool.empty()) pool = pm.members[p];
    std::size_t id;
    double prob;
    if (used[p] < pool.size()) {
      const std::size_t j = used[p] + rng.below(pool.size() - used[p]);
      std::swap(pool[used[p]], pool[j]);
      id = pool[used[p]];
      prob = frame.psi[p] / as_n(pool.size() - used[p]);
      ++used[p];
    } else {
      if (!exhausted_flagged[p]) {
        r.flags.push_back("exhausted-partition:" + std::to_string(p));
        exhausted_flagged[p] = true;
      }
      id = pool[rng.below(pool.size())];
      prob = frame.psi[p] / as_n(pool.size());
    }
    record(r, config, id, prob, "twoups");
    sum += observe(oracle, id) * as_n(pm.sizes[p]) / frame.psi[p];
  }
  r.allocation = hits;
  finish(r, oracle, config, sum / (as_n(frame.size) * as_n(config.budget)));
  return r;
}

TechniqueResult run_technique(const SamplingFrame& frame, LabelingOracle& oracle,
                              const TechniqueConfig& config, RandomStream& rng) {
  validate(config);
  require(oracle.population_size() == frame.size, "oracle and frame describe different populations");
  if (uses_aux(config.technique) && frame.aux != config.aux) {
    fail("incompatible", "frame was prepared for auxiliary variable '" + frame.aux + "', not '" +
                             config.aux + "'");
  }
  switch (config.technique) {
    case TechniqueId::kSrs:
      return run_srs(frame, oracle, config, rng);
    case TechniqueId::kSups:
      return run_sups(frame, oracle, config, rng);
    case TechniqueId::kRhcs:
      return run_rhcs(frame, oracle, config, rng);
    case TechniqueId::kCes:
      return run_ces(frame, oracle, config, rng);
    case TechniqueId::kDeepest:
      return run_deepest(frame, oracle, config, rng);
    case TechniqueId::kSsrs:
      return run_ssrs(frame, oracle, config, rng);
    case TechniqueId::kGbs:
      return run_gbs(frame, oracle, config, rng);
    case TechniqueId::kTwoUps:
      return run_twoups(frame, oracle, config, rng);
  }
  fail("invalid_argument", "unknown technique");
}

}  // namespace opsample
