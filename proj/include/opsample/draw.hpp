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

#ifndef OPSAMPLE_DRAW_HPP_
#define OPSAMPLE_DRAW_HPP_

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "opsample/random.hpp"

namespace opsample {

struct DrawStep {
  std::size_t step = 0;
  std::size_t id = 0;
  double probability = 0.0;  // selection probability of `id` at this step
  std::string scheme;
};

using DrawTrace = std::vector<DrawStep>;

std::string trace_to_csv(const DrawTrace& trace);

std::vector<std::size_t> srs_with_replacement(std::span<const std::size_t> ids, std::size_t n,
                                              RandomStream& rng);

/// Partial Fisher-Yates; the result is in selection order.
std::vector<std::size_t> srs_without_replacement(std::span<const std::size_t> ids, std::size_t n,
                                                 RandomStream& rng);

/// Precomputed cumulative weights for repeated PPS draws.
class PpsTable {
 public:
  explicit PpsTable(std::span<const double> weights);

  /// Index into the weight vector, chosen with probability w_i / sum(w).
  std::size_t draw(RandomStream& rng) const;
  double total() const { return cumulative_.back(); }
  std::size_t size() const { return cumulative_.size(); }

 private:
  std::vector<double> cumulative_;
};

std::size_t pps_draw(std::span<const std::size_t> ids, std::span<const double> weights,
                     RandomStream& rng);

std::vector<std::size_t> pps_with_replacement(std::span<const std::size_t> ids,
                                              std::span<const double> weights, std::size_t n,
                                              RandomStream& rng);

/// Uniform random permutation cut into n_groups groups whose sizes differ by
/// at most one; the first N mod n_groups groups are the larger ones.
std::vector<std::vector<std::size_t>> random_grouping(std::span<const std::size_t> ids,
                                                     std::size_t n_groups, RandomStream& rng);

/// Fenwick tree over nonnegative weights supporting updates and
/// proportional selection in O(log N).
class WeightedPool {
 public:
  explicit WeightedPool(std::span<const double> weights);

  void set(std::size_t index, double weight);
  double weight(std::size_t index) const { return weights_[index]; }
  double total() const { return total_; }
  /// Requires total() > 0.
  std::size_t draw(RandomStream& rng) const;

 private:
  std::size_t find(double target) const;

  std::vector<double> tree_;
  std::vector<double> weights_;
  double total_ = 0.0;
  std::size_t top_bit_ = 1;
};

}  // namespace opsample

#endif  // OPSAMPLE_DRAW_HPP_
