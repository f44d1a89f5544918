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

#include <cmath>
#include <functional>
#include <numeric>

#include "opsample/auxvar.hpp"
#include "opsample/error.hpp"
#include "opsample/harness.hpp"
#include "opsample/partition.hpp"

namespace opsample {

namespace {

struct Inputs {
  std::vector<double> y;
  std::vector<double> chi;
  std::vector<double> pi;
};

Inputs inputs_for(const Population& pop, const TechniqueConfig& c) {
  Inputs in;
  for (std::size_t i = 0; i < pop.size(); ++i) in.y.push_back(target_value(pop.task(), pop[i]));
  if (uses_aux(c.technique)) {
    in.chi = chi_for(pop, c.aux).values;
    in.pi = selection_probabilities(in.chi, c.pps_floor_fraction);
  }
  return in;
}

Enumeration srs(const Inputs& in, std::size_t n) {
  const std::size_t big_n = in.y.size();
  Enumeration e;
  std::vector<std::size_t> path(n, 0);
  const double p = std::pow(1.0 / static_cast<double>(big_n), static_cast<double>(n));
  while (true) {
    double sum = 0.0;
    for (std::size_t id : path) sum += in.y[id];
    e.expectation += p * sum / static_cast<double>(n);
    e.probability_mass += p;
    ++e.paths;
    std::size_t k = 0;
    while (k < n && ++path[k] == big_n) path[k++] = 0;
    if (k == n) break;
  }
  return e;
}

Enumeration sups(const Inputs& in, std::size_t n) {
  const std::size_t big_n = in.y.size();
  Enumeration e;
  std::vector<std::size_t> path(n, 0);
  while (true) {
    double p = 1.0, sum = 0.0;
    for (std::size_t id : path) {
      p *= in.pi[id];
      sum += in.y[id] / in.pi[id];
    }
    e.expectation += p * sum / (static_cast<double>(n) * static_cast<double>(big_n));
    e.probability_mass += p;
    ++e.paths;
    std::size_t k = 0;
    while (k < n && ++path[k] == big_n) path[k++] = 0;
    if (k == n) break;
  }
  return e;
}

// Ordered splits of 0..N-1 into groups of the given sizes are equally likely.
Enumeration rhcs(const Inputs& in, std::size_t n) {
  const std::size_t big_n = in.y.size();
  require(n <= big_n, "budget exceeds population size");
  std::vector<std::size_t> sizes(n, big_n / n);
  for (std::size_t g = 0; g < big_n % n; ++g) ++sizes[g];

  std::vector<std::vector<std::size_t>> splits;
  std::vector<std::vector<std::size_t>> groups(n);
  std::function<void(std::size_t)> assign = [&](std::size_t unit) {
    if (unit == big_n) {
      splits.push_back({});
      for (const auto& g : groups) splits.back().insert(splits.back().end(), g.begin(), g.end());
      return;
    }
    for (std::size_t g = 0; g < n; ++g) {
      if (groups[g].size() == sizes[g]) continue;
      groups[g].push_back(unit);
      assign(unit + 1);
      groups[g].pop_back();
    }
  };
  assign(0);

  Enumeration e;
  const double split_p = 1.0 / static_cast<double>(splits.size());
  for (const auto& flat : splits) {
    std::vector<std::size_t> offsets(n + 1, 0);
    for (std::size_t g = 0; g < n; ++g) offsets[g + 1] = offsets[g] + sizes[g];
    std::vector<std::size_t> choice(n, 0);
    while (true) {
      double p = split_p, sum = 0.0;
      for (std::size_t g = 0; g < n; ++g) {
        double group_pi = 0.0;
        for (std::size_t k = offsets[g]; k < offsets[g + 1]; ++k) group_pi += in.pi[flat[k]];
        const std::size_t id = flat[offsets[g] + choice[g]];
        const double cond = in.pi[id] / group_pi;
        p *= cond;
        sum += in.y[id] / cond;
      }
      e.expectation += p * sum / static_cast<double>(big_n);
      e.probability_mass += p;
      ++e.paths;
      std::size_t g = 0;
      while (g < n && ++choice[g] == sizes[g]) choice[g++] = 0;
      if (g == n) break;
    }
  }
  return e;
}

void combinations(std::size_t m, std::size_t k,
                  const std::function<void(const std::vector<std::size_t>&)>& visit) {
  std::vector<std::size_t> c(k);
  std::iota(c.begin(), c.end(), std::size_t{0});
  while (true) {
    visit(c);
    std::size_t i = k;
    while (i > 0 && c[i - 1] == m - k + i - 1) --i;
    if (i == 0) return;
    ++c[i - 1];
    for (std::size_t j = i; j < k; ++j) c[j] = c[j - 1] + 1;
  }
}

Enumeration ssrs(const Inputs& in, const TechniqueConfig& c) {
  const std::size_t big_n = in.y.size();
  const PartitionMap pm = kmeans_1d(in.chi, c.partitions, c.kmeans_seed);
  const Allocation alloc = neyman_allocation(pm, in.chi, c.budget, c.ssrs_min_per_partition);
  // Strata are sampled independently, so the expectation is the weighted sum
  // of per-stratum expectations and the path count is their product.
  Enumeration e;
  e.probability_mass = 1.0;
  e.paths = 1;
  for (std::size_t p = 0; p < pm.count(); ++p) {
    const std::size_t np = alloc.per_partition[p];
    if (np == 0) continue;
    double mass = 0.0, expect = 0.0;
    std::size_t count = 0;
    std::size_t total = 0;
    combinations(pm.sizes[p], np, [&](const std::vector<std::size_t>&) { ++total; });
    const double prob = 1.0 / static_cast<double>(total);
    combinations(pm.sizes[p], np, [&](const std::vector<std::size_t>& pick) {
      double sum = 0.0;
      for (std::size_t k : pick) sum += in.y[pm.members[p][k]];
      expect += prob * sum / static_cast<double>(np);
      mass += prob;
      ++count;
    });
    e.expectation += static_cast<double>(pm.sizes[p]) / static_cast<double>(big_n) * expect / mass;
    e.probability_mass *= mass;
    e.paths *= count;
  }
  return e;
}

Enumeration twoups(const Inputs& in, const TechniqueConfig& c) {
  const std::size_t big_n = in.y.size();
  const std::size_t n = c.budget;
  const PartitionMap pm = kmeans_1d(in.chi, c.partitions, c.kmeans_seed);
  std::vector<double> psi(pm.count(), 0.0);
  double total = 0.0;
  for (std::size_t i = 0; i < big_n; ++i) {
    psi[pm.assignment[i]] += in.pi[i];
    total += in.pi[i];
  }
  for (double& v : psi) v /= total;

  Enumeration e;
  std::vector<std::uint8_t> taken(big_n, 0);
  std::vector<std::size_t> used(pm.count(), 0);
  std::function<void(std::size_t, double, double)> step = [&](std::size_t k, double p, double sum) {
    if (k == n) {
      e.expectation += p * sum / (static_cast<double>(big_n) * static_cast<double>(n));
      e.probability_mass += p;
      ++e.paths;
      return;
    }
    for (std::size_t part = 0; part < pm.count(); ++part) {
      if (psi[part] <= 0.0) continue;
      const double weight = static_cast<double>(pm.sizes[part]) / psi[part];
      const bool exhausted = used[part] == pm.sizes[part];
      const double avail = static_cast<double>(exhausted ? pm.sizes[part] : pm.sizes[part] - used[part]);
      for (std::size_t id : pm.members[part]) {
        if (!exhausted && taken[id]) continue;
        const double q = psi[part] / avail;
        if (exhausted) {
          step(k + 1, p * q, sum + in.y[id] * weight);
        } else {
          taken[id] = 1;
          ++used[part];
          step(k + 1, p * q, sum + in.y[id] * weight);
          --used[part];
          taken[id] = 0;
        }
      }
    }
  };
  step(0, 1.0, 0.0);
  return e;
}

Enumeration deepest(const Inputs& in, const TechniqueConfig& c, Task task) {
  const std::size_t big_n = in.y.size();
  const std::size_t n = c.budget;
  require(n <= big_n, "budget exceeds population size");
  const double t = quantile(in.chi, c.deepest_threshold_quantile);
  const bool literal = c.deepest_weighting == DeepestWeighting::kLiteral;
  std::vector<double> w(big_n * big_n);
  for (std::size_t i = 0; i < big_n; ++i) {
    for (std::size_t j = 0; j < big_n; ++j) {
      w[i * big_n + j] = literal ? (in.chi[i] > t ? in.chi[j] : 0.0)
                                 : (in.chi[j] > t ? in.chi[i] : 0.0);
    }
  }
  const double r = c.deepest_r;
  const bool literal_regression = task == Task::kRegression && c.deepest_literal_regression;

  Enumeration e;
  std::vector<std::size_t> chosen;
  std::vector<std::uint8_t> taken(big_n, 0);
  std::function<void(double, double, double, double)> step = [&](double p, double first,
                                                                  double selected, double steps) {
    const std::size_t k = chosen.size();
    if (k == n) {
      const double est = (first + steps / static_cast<double>(big_n)) / static_cast<double>(n);
      e.expectation += p * est;
      e.probability_mass += p;
      ++e.paths;
      return;
    }
    const double remaining = static_cast<double>(big_n - k);
    std::vector<double> q(big_n, 0.0);
    if (k == 0) {
      for (std::size_t i = 0; i < big_n; ++i) q[i] = 1.0 / remaining;
    } else {
      double denom = 0.0;
      std::vector<double> score(big_n, 0.0);
      for (std::size_t i = 0; i < big_n; ++i) {
        if (taken[i]) continue;
        for (std::size_t j : chosen) score[i] += w[i * big_n + j];
        denom += score[i];
      }
      for (std::size_t i = 0; i < big_n; ++i) {
        if (taken[i]) continue;
        q[i] = denom > 0.0 ? r * score[i] / denom + (1.0 - r) / remaining : 1.0 / remaining;
      }
    }
    for (std::size_t i = 0; i < big_n; ++i) {
      if (taken[i] || q[i] <= 0.0) continue;
      const double y = in.y[i];
      double next_first = first, next_steps = steps;
      if (k == 0) {
        next_first = y;
      } else if (literal_regression) {
        const double kk = static_cast<double>(k + 1);
        next_steps += selected / (kk - 1.0) + (y / kk) / q[i];
      } else {
        next_steps += selected + y / q[i];
      }
      taken[i] = 1;
      chosen.push_back(i);
      step(p * q[i], next_first, selected + y, next_steps);
      chosen.pop_back();
      taken[i] = 0;
    }
  };
  step(1.0, 0.0, 0.0, 0.0);
  return e;
}

}  // namespace

Enumeration enumerate_expectation(const Population& population, const TechniqueConfig& config) {
  validate(config);
  const std::size_t big_n = population.size();
  const std::size_t n = config.budget;
  switch (config.technique) {
    case TechniqueId::kCes:
    case TechniqueId::kGbs:
      fail("invalid_argument", std::string(technique_name(config.technique)) +
                                   " is not enumerable; use Monte Carlo");
    case TechniqueId::kDeepest:
      if (big_n > 8 || n > 3) fail("invalid_argument", "enumeration limited to N <= 8, n <= 3 for deepest");
      break;
    default:
      if (big_n > 10 || n > 4) fail("invalid_argument", "enumeration limited to N <= 10, n <= 4");
  }
  const Inputs in = inputs_for(population, config);
  switch (config.technique) {
    case TechniqueId::kSrs:
      return srs(in, n);
    case TechniqueId::kSups:
      return sups(in, n);
    case TechniqueId::kRhcs:
      return rhcs(in, n);
    case TechniqueId::kSsrs:
      return ssrs(in, config);
    case TechniqueId::kTwoUps:
      return twoups(in, config);
    case TechniqueId::kDeepest:
      return deepest(in, config, population.task());
    default:
      break;
  }
  fail("invalid_argument", "technique is not enumerable");
}

}  // namespace opsample
