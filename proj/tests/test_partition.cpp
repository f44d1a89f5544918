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
#include <limits>
#include <numeric>

#include "opsample/error.hpp"
#include "opsample/partition.hpp"
#include "opsample/random.hpp"

namespace opsample {
namespace {

// Smallest within-cluster SSE over every contiguous 2-split of sorted values.
double best_two_split_sse(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t cut = 1; cut < v.size(); ++cut) {
    double s = 0.0;
    for (auto [lo, hi] : {std::pair{std::size_t{0}, cut}, std::pair{cut, v.size()}}) {
      double m = 0.0;
      for (std::size_t i = lo; i < hi; ++i) m += v[i];
      m /= static_cast<double>(hi - lo);
      for (std::size_t i = lo; i < hi; ++i) s += (v[i] - m) * (v[i] - m);
    }
    best = std::min(best, s);
  }
  return best;
}

TEST(KMeans, SeparatedClusters) {
  const std::vector<double> v = {0, 0.1, 0.9, 1.0};
  const auto pm = kmeans_1d(v, 2, 0);
  EXPECT_EQ(pm.assignment, (std::vector<std::size_t>{0, 0, 1, 1}));
  EXPECT_NEAR(pm.centroids[0], 0.05, 1e-15);
  EXPECT_NEAR(pm.centroids[1], 0.95, 1e-15);
}

TEST(KMeans, SingleCluster) {
  const auto pm = kmeans_1d(std::vector<double>{3, 1, 2}, 1, 0);
  EXPECT_EQ(pm.count(), 1u);
  EXPECT_EQ(pm.sizes[0], 3u);
}

TEST(KMeans, OptimalSplitSizes) {
  const std::vector<double> v = {0, 0, 1, 1, 1};
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto pm = kmeans_1d(v, 2, seed);
    EXPECT_EQ(pm.sizes, (std::vector<std::size_t>{2, 3}));
  }
  EXPECT_EQ(best_two_split_sse(v), 0.0);
}

TEST(KMeans, ReducesToDistinctCount) {
  const auto pm = kmeans_1d(std::vector<double>{1, 1, 2, 2, 2}, 10, 0);
  EXPECT_EQ(pm.count(), 2u);
  EXPECT_THROW(kmeans_1d(std::vector<double>{}, 2, 0), Error);
}

TEST(KMeans, ContiguousSortedAndDeterministic) {
  RandomStream rng(21);
  for (int trial = 0; trial < 30; ++trial) {
    std::vector<double> v(200);
    for (auto& x : v) x = std::exp(rng.normal());
    const auto pm = kmeans_1d(v, 10, trial);
    const auto again = kmeans_1d(v, 10, trial);
    EXPECT_EQ(pm.assignment, again.assignment);
    EXPECT_TRUE(std::is_sorted(pm.centroids.begin(), pm.centroids.end()));
    EXPECT_EQ(std::accumulate(pm.sizes.begin(), pm.sizes.end(), std::size_t{0}), v.size());
    for (auto s : pm.sizes) EXPECT_GT(s, 0u);
    std::vector<std::size_t> order(v.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](auto a, auto b) { return v[a] < v[b]; });
    for (std::size_t i = 1; i < order.size(); ++i) {
      ASSERT_LE(pm.assignment[order[i - 1]], pm.assignment[order[i]]);
    }
    for (std::size_t i = 1; i < pm.sse_history.size(); ++i) {
      EXPECT_LE(pm.sse_history[i], pm.sse_history[i - 1] * (1 + 1e-12));
    }
  }
}

TEST(KMeans, ResultIsLloydFixedPoint) {
  RandomStream rng(22);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<double> v(8);
    for (auto& x : v) x = rng.uniform();
    const auto pm = kmeans_1d(v, 3, trial);
    for (std::size_t p = 0; p < pm.count(); ++p) {
      double mean = 0.0;
      for (auto i : pm.members[p]) mean += v[i];
      EXPECT_NEAR(pm.centroids[p], mean / static_cast<double>(pm.sizes[p]), 1e-15);
    }
    for (std::size_t i = 0; i < v.size(); ++i) {
      const double own = std::abs(v[i] - pm.centroids[pm.assignment[i]]);
      for (double c : pm.centroids) EXPECT_LE(own, std::abs(v[i] - c) + 1e-12);
    }
  }
}

TEST(Neyman, Examples) {
  const std::vector<std::size_t> sizes = {50, 50};
  EXPECT_EQ(neyman_allocation(sizes, std::vector<double>{0, 1}, 10).per_partition,
            (std::vector<std::size_t>{0, 10}));
  EXPECT_EQ(neyman_allocation(sizes, std::vector<double>{0.3, 0.3}, 10).per_partition,
            (std::vector<std::size_t>{5, 5}));
  EXPECT_EQ(neyman_allocation(std::vector<std::size_t>{10, 30}, std::vector<double>{0.2, 0.1}, 10)
                .per_partition,
            (std::vector<std::size_t>{4, 6}));
}

TEST(Neyman, ZeroVarianceFallsBackToSizes) {
  EXPECT_EQ(neyman_allocation(std::vector<std::size_t>{10, 30}, std::vector<double>{0, 0}, 8)
                .per_partition,
            (std::vector<std::size_t>{2, 6}));
}

TEST(Neyman, CapsAndRedistributes) {
  const auto a = neyman_allocation(std::vector<std::size_t>{2, 100}, std::vector<double>{1, 0.01}, 10);
  EXPECT_EQ(a.per_partition[0], 2u);
  EXPECT_EQ(a.per_partition[1], 8u);
}

TEST(Neyman, MinimumReserve) {
  const auto a = neyman_allocation(std::vector<std::size_t>{50, 50}, std::vector<double>{0, 1}, 10, 1);
  EXPECT_EQ(a.per_partition, (std::vector<std::size_t>{1, 9}));
  // Reserve skipped when it cannot be met.
  const auto b = neyman_allocation(std::vector<std::size_t>{5, 5, 5}, std::vector<double>{0, 0, 1}, 2, 1);
  EXPECT_EQ(b.total, 2u);
}

TEST(Neyman, Errors) {
  EXPECT_THROW(neyman_allocation(std::vector<std::size_t>{2, 2}, std::vector<double>{1, 1}, 5), Error);
}

TEST(Neyman, SumsExactlyAndScaleInvariant) {
  RandomStream rng(23);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<double> chi(300);
    for (auto& x : chi) x = std::exp(rng.normal());
    const auto pm = kmeans_1d(chi, 10, 1);
    const std::size_t n = 1 + rng.below(299);
    const auto a = neyman_allocation(pm, chi, n);
    EXPECT_EQ(std::accumulate(a.per_partition.begin(), a.per_partition.end(), std::size_t{0}), n);
    for (std::size_t p = 0; p < pm.count(); ++p) EXPECT_LE(a.per_partition[p], pm.sizes[p]);
    std::vector<double> scaled(chi);
    for (auto& x : scaled) x *= 37.5;
    EXPECT_EQ(neyman_allocation(pm, scaled, n).per_partition, a.per_partition);
  }
}

TEST(PartitionCsv, Export) {
  const auto pm = PartitionMap::from_assignment({0, 1, 0}, 2);
  EXPECT_EQ(partition_to_csv(pm), "id,partition\n0,0\n1,1\n2,0\n");
  EXPECT_THROW(PartitionMap::from_assignment({0, 0}, 2), Error);
}

}  // namespace
}  // namespace opsample
