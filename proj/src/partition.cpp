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

#include "opsample/partition.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>
#include <sstream>

#include "opsample/error.hpp"
#include "opsample/random.hpp"

namespace opsample {

PartitionMap PartitionMap::single(std::size_t n) {
  return from_assignment(std::vector<std::size_t>(n, 0), 1);
}

PartitionMap PartitionMap::from_assignment(std::vector<std::size_t> assignment,
                                           std::size_t count) {
  PartitionMap pm;
  pm.sizes.assign(count, 0);
  pm.members.assign(count, {});
  pm.centroids.assign(count, 0.0);
  for (std::size_t i = 0; i < assignment.size(); ++i) {
    require(assignment[i] < count, "partition index out of range");
    ++pm.sizes[assignment[i]];
    pm.members[assignment[i]].push_back(i);
  }
  for (std::size_t s : pm.sizes) require(s > 0, "partitions must be nonempty");
  pm.assignment = std::move(assignment);
  return pm;
}

namespace {

std::size_t nearest(double x, const std::vector<double>& centroids) {
  std::size_t best = 0;
  double best_d = std::abs(x - centroids[0]);
  for (std::size_t c = 1; c < centroids.size(); ++c) {
    const double d = std::abs(x - centroids[c]);
    if (d < best_d) {
      best_d = d;
      best = c;
    }
  }
  return best;
}

double sse(std::span<const double> values, const std::vector<std::size_t>& assignment,
           const std::vector<double>& centroids) {
  double s = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    const double d = values[i] - centroids[assignment[i]];
    s += d * d;
  }
  return s;
}

}  // namespace

PartitionMap kmeans_1d(std::span<const double> values, std::size_t k, std::uint64_t seed,
                       std::size_t max_iterations) {
  require(!values.empty(), "k-means: empty input");
  require(k >= 1, "k-means: k must be at least 1");
  for (double v : values) require(std::isfinite(v), "k-means: non-finite value");
  const std::size_t n = values.size();
  const std::size_t distinct = std::set<double>(values.begin(), values.end()).size();
  k = std::min(k, distinct);

  // k-means++ seeding; a value already chosen has zero D^2 weight.
  RandomStream rng(seed);
  std::vector<double> centroids{values[rng.below(n)]};
  std::vector<double> dist2(n);
  while (centroids.size() < k) {
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double d = values[i] - centroids[nearest(values[i], centroids)];
      dist2[i] = d * d;
      total += dist2[i];
    }
    double target = rng.uniform() * total;
    std::size_t pick = n;
    for (std::size_t i = 0; i < n; ++i) {
      if (dist2[i] <= 0.0) continue;
      pick = i;
      if (target < dist2[i]) break;
      target -= dist2[i];
    }
    centroids.push_back(values[pick]);
  }

  std::vector<std::size_t> assignment(n, 0);
  std::vector<double> history;
  for (std::size_t i = 0; i < n; ++i) assignment[i] = nearest(values[i], centroids);
  for (std::size_t iter = 0; iter < max_iterations; ++iter) {
    std::vector<double> sum(k, 0.0);
    std::vector<std::size_t> count(k, 0);
    for (std::size_t i = 0; i < n; ++i) {
      sum[assignment[i]] += values[i];
      ++count[assignment[i]];
    }
    for (std::size_t c = 0; c < k; ++c) {
      if (count[c] > 0) {
        centroids[c] = sum[c] / static_cast<double>(count[c]);
        continue;
      }
      // Empty cluster: move it onto the point farthest from its centroid.
      std::size_t far = 0;
      double far_d = -1.0;
      for (std::size_t i = 0; i < n; ++i) {
        const double d = std::abs(values[i] - centroids[assignment[i]]);
        if (d > far_d) {
          far_d = d;
          far = i;
        }
      }
      centroids[c] = values[far];
      assignment[far] = c;
    }
    bool changed = false;
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t c = nearest(values[i], centroids);
      if (c != assignment[i]) {
        assignment[i] = c;
        changed = true;
      }
    }
    history.push_back(sse(values, assignment, centroids));
    if (!changed) break;
  }

  // Relabel by ascending centroid and reassign with ties to the lower label,
  // which keeps partitions contiguous in value order.
  std::sort(centroids.begin(), centroids.end());
  centroids.erase(std::unique(centroids.begin(), centroids.end()), centroids.end());
  for (std::size_t i = 0; i < n; ++i) assignment[i] = nearest(values[i], centroids);
  std::vector<std::size_t> used(centroids.size(), 0);
  for (std::size_t a : assignment) ++used[a];
  std::vector<std::size_t> relabel(centroids.size());
  std::vector<double> kept;
  for (std::size_t c = 0; c < centroids.size(); ++c) {
    relabel[c] = kept.size();
    if (used[c] > 0) kept.push_back(centroids[c]);
  }
  for (auto& a : assignment) a = relabel[a];

  PartitionMap pm = PartitionMap::from_assignment(std::move(assignment), kept.size());
  // Report the means of the final partitions.
  for (std::size_t p = 0; p < pm.count(); ++p) {
    double s = 0.0;
    for (std::size_t i : pm.members[p]) s += values[i];
    pm.centroids[p] = s / static_cast<double>(pm.sizes[p]);
  }
  pm.sse_history = std::move(history);
  return pm;
}

std::vector<std::size_t> apportion(std::span<const double> weights,
                                   std::span<const std::size_t> capacity, std::size_t n) {
  require(weights.size() == capacity.size(), "apportion: size mismatch");
  const std::size_t total_capacity = std::accumulate(capacity.begin(), capacity.end(), std::size_t{0});
  require(n <= total_capacity, "allocation exceeds capacity");
  const std::size_t p = weights.size();
  std::vector<std::size_t> out(p, 0);
  std::vector<bool> capped(p, false);
  std::size_t remaining = n;

  while (remaining > 0) {
    std::vector<double> w(p, 0.0);
    double sum = 0.0;
    for (std::size_t i = 0; i < p; ++i) {
      if (capped[i] || out[i] >= capacity[i]) continue;
      w[i] = std::max(0.0, weights[i]);
      sum += w[i];
    }
    if (!(sum > 0.0)) {
      // Fall back to remaining capacity.
      for (std::size_t i = 0; i < p; ++i) {
        w[i] = (capped[i] || out[i] >= capacity[i]) ? 0.0 : static_cast<double>(capacity[i] - out[i]);
        sum += w[i];
      }
    }
    std::vector<std::size_t> add(p, 0);
    std::vector<double> remainder(p, -1.0);
    std::size_t given = 0;
    for (std::size_t i = 0; i < p; ++i) {
      if (w[i] <= 0.0) continue;
      const double quota = static_cast<double>(remaining) * w[i] / sum;
      add[i] = static_cast<std::size_t>(std::floor(quota));
      remainder[i] = quota - static_cast<double>(add[i]);
      given += add[i];
    }
    std::vector<std::size_t> order(p);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return remainder[a] > remainder[b]; });
    for (std::size_t j = 0; given < remaining && j < p; ++j) {
      if (w[order[j]] <= 0.0) continue;
      ++add[order[j]];
      ++given;
    }
    std::size_t excess = 0;
    for (std::size_t i = 0; i < p; ++i) {
      out[i] += add[i];
      if (out[i] >= capacity[i]) {
        excess += out[i] - capacity[i];
        out[i] = capacity[i];
        capped[i] = true;
      }
    }
    remaining = excess;
  }
  return out;
}

Allocation neyman_allocation(std::span<const std::size_t> sizes, std::span<const double> stddevs,
                             std::size_t n, std::size_t min_per_partition) {
  require(sizes.size() == stddevs.size(), "Neyman: sizes and deviations differ in length");
  require(n >= 1, "Neyman: n must be at least 1");
  const std::size_t total = std::accumulate(sizes.begin(), sizes.end(), std::size_t{0});
  if (n > total) fail("invalid_argument", "Neyman: budget exceeds population size");

  const std::size_t p = sizes.size();
  std::vector<std::size_t> reserved(p, 0);
  std::size_t reserved_total = 0;
  for (std::size_t i = 0; i < p; ++i) {
    reserved[i] = std::min(min_per_partition, sizes[i]);
    reserved_total += reserved[i];
  }
  if (reserved_total > n) {
    std::fill(reserved.begin(), reserved.end(), 0);
    reserved_total = 0;
  }

  std::vector<double> raw(p);
  std::vector<std::size_t> capacity(p);
  double raw_sum = 0.0;
  for (std::size_t i = 0; i < p; ++i) {
    raw[i] = static_cast<double>(sizes[i]) * stddevs[i];
    raw_sum += raw[i];
    capacity[i] = sizes[i] - reserved[i];
  }
  if (!(raw_sum > 0.0)) {
    for (std::size_t i = 0; i < p; ++i) raw[i] = static_cast<double>(sizes[i]);
  }
  Allocation a;
  a.per_partition = apportion(raw, capacity, n - reserved_total);
  for (std::size_t i = 0; i < p; ++i) a.per_partition[i] += reserved[i];
  a.total = n;
  return a;
}

Allocation neyman_allocation(const PartitionMap& partitions, std::span<const double> chi,
                             std::size_t n, std::size_t min_per_partition) {
  require(chi.size() == partitions.population(), "Neyman: chi misaligned with partitions");
  const auto [lo, hi] = std::minmax_element(chi.begin(), chi.end());
  const double range = *hi - *lo;
  std::vector<double> stddevs(partitions.count(), 0.0);
  if (range > 0.0) {
    for (std::size_t p = 0; p < partitions.count(); ++p) {
      double mean = 0.0;
      for (std::size_t i : partitions.members[p]) mean += (chi[i] - *lo) / range;
      mean /= static_cast<double>(partitions.sizes[p]);
      double var = 0.0;
      for (std::size_t i : partitions.members[p]) {
        const double d = (chi[i] - *lo) / range - mean;
        var += d * d;
      }
      stddevs[p] = std::sqrt(var / static_cast<double>(partitions.sizes[p]));
    }
  }
  return neyman_allocation(partitions.sizes, stddevs, n, min_per_partition);
}

std::string partition_to_csv(const PartitionMap& partitions,
                             std::span<const std::string> external_ids) {
  std::ostringstream out;
  out << "id,partition\n";
  for (std::size_t i = 0; i < partitions.assignment.size(); ++i) {
    if (external_ids.empty()) {
      out << i;
    } else {
      out << external_ids[i];
    }
    out << ',' << partitions.assignment[i] << '\n';
  }
  return out.str();
}

}  // namespace opsample
