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

#ifndef OPSAMPLE_PARTITION_HPP_
#define OPSAMPLE_PARTITION_HPP_

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace opsample {

/// Assignment of records to P partitions, labelled so that centroids ascend.
struct PartitionMap {
  std::vector<std::size_t> assignment;
  std::vector<double> centroids;
  std::vector<std::size_t> sizes;
  /// Record ids of each partition, ascending.
  std::vector<std::vector<std::size_t>> members;
  /// Within-cluster SSE after each Lloyd iteration.
  std::vector<double> sse_history;

  std::size_t count() const { return sizes.size(); }
  std::size_t population() const { return assignment.size(); }

  static PartitionMap single(std::size_t n);
  static PartitionMap from_assignment(std::vector<std::size_t> assignment, std::size_t count);
};

struct Allocation {
  std::vector<std::size_t> per_partition;
  std::size_t total = 0;
};

/// Lloyd's algorithm on scalars with k-means++ seeding. P is reduced to the
/// number of distinct values when that is smaller than k.
PartitionMap kmeans_1d(std::span<const double> values, std::size_t k, std::uint64_t seed,
                       std::size_t max_iterations = 300);

/// Largest-remainder apportionment of n proportional to `weights`, never
/// exceeding `capacity`; excess is re-apportioned among uncapped entries.
/// Zero total weight falls back to proportional-to-capacity.
std::vector<std::size_t> apportion(std::span<const double> weights,
                                   std::span<const std::size_t> capacity, std::size_t n);

/// Neyman allocation from explicit stratum sizes and standard deviations.
/// `min_per_partition` units are reserved in every stratum first.
Allocation neyman_allocation(std::span<const std::size_t> sizes, std::span<const double> stddevs,
                             std::size_t n, std::size_t min_per_partition = 0);

/// Neyman allocation using the standard deviation of chi, min-max normalized
/// over the whole population, inside each partition.
Allocation neyman_allocation(const PartitionMap& partitions, std::span<const double> chi,
                             std::size_t n, std::size_t min_per_partition = 0);

std::string partition_to_csv(const PartitionMap& partitions,
                             std::span<const std::string> external_ids = {});

}  // namespace opsample

#endif  // OPSAMPLE_PARTITION_HPP_
