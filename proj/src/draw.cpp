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

#include "opsample/draw.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "opsample/csv.hpp"
#include "opsample/error.hpp"

namespace opsample {

std::string trace_to_csv(const DrawTrace& trace) {
  std::ostringstream out;
  out << "step,id,probability,scheme\n";
  for (const auto& s : trace) {
    out << s.step << ',' << s.id << ',' << csv::format_real(s.probability) << ',' << s.scheme
        << '\n';
  }
  return out.str();
}

std::vector<std::size_t> srs_with_replacement(std::span<const std::size_t> ids, std::size_t n,
                                              RandomStream& rng) {
  require(!ids.empty(), "SRS: empty id set");
  require(n >= 1, "SRS: sample size must be at least 1");
  std::vector<std::size_t> out(n);
  for (auto& id : out) id = ids[rng.below(ids.size())];
  return out;
}

std::vector<std::size_t> srs_without_replacement(std::span<const std::size_t> ids, std::size_t n,
                                                 RandomStream& rng) {
  require(n <= ids.size(), "SRS without replacement: n exceeds population size");
  std::vector<std::size_t> pool(ids.begin(), ids.end());
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t j = i + rng.below(pool.size() - i);
    std::swap(pool[i], pool[j]);
  }
  pool.resize(n);
  return pool;
}

PpsTable::PpsTable(std::span<const double> weights) : cumulative_(weights.size()) {
  require(!weights.empty(), "PPS: empty weight vector");
  double sum = 0.0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    require(std::isfinite(weights[i]) && weights[i] >= 0.0, "PPS: weights must be finite and >= 0");
    sum += weights[i];
    cumulative_[i] = sum;
  }
  if (!(sum > 0.0)) fail("invalid_argument", "PPS: all weights are zero");
}

std::size_t PpsTable::draw(RandomStream& rng) const {
  const double target = rng.uniform() * total();
  const auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), target);
  // target < total, so `it` is valid except for rounding at the very top.
  const auto index = static_cast<std::size_t>(it - cumulative_.begin());
  if (index < cumulative_.size()) return index;
  std::size_t last = cumulative_.size() - 1;
  while (last > 0 && cumulative_[last] == cumulative_[last - 1]) --last;
  return last;
}

std::size_t pps_draw(std::span<const std::size_t> ids, std::span<const double> weights,
                     RandomStream& rng) {
  require(ids.size() == weights.size(), "PPS: ids and weights differ in length");
  return ids[PpsTable(weights).draw(rng)];
}

std::vector<std::size_t> pps_with_replacement(std::span<const std::size_t> ids,
                                              std::span<const double> weights, std::size_t n,
                                              RandomStream& rng) {
  require(ids.size() == weights.size(), "PPS: ids and weights differ in length");
  require(n >= 1, "PPS: sample size must be at least 1");
  const PpsTable table(weights);
  std::vector<std::size_t> out(n);
  for (auto& id : out) id = ids[table.draw(rng)];
  return out;
}

std::vector<std::vector<std::size_t>> random_grouping(std::span<const std::size_t> ids,
                                                      std::size_t n_groups, RandomStream& rng) {
  require(n_groups >= 1, "grouping: need at least one group");
  require(n_groups <= ids.size(), "grouping: more groups than units");
  const std::vector<std::size_t> perm = srs_without_replacement(ids, ids.size(), rng);
  const std::size_t base = ids.size() / n_groups;
  const std::size_t larger = ids.size() % n_groups;
  std::vector<std::vector<std::size_t>> groups(n_groups);
  std::size_t pos = 0;
  for (std::size_t g = 0; g < n_groups; ++g) {
    const std::size_t size = base + (g < larger ? 1 : 0);
    groups[g].assign(perm.begin() + static_cast<std::ptrdiff_t>(pos),
                     perm.begin() + static_cast<std::ptrdiff_t>(pos + size));
    pos += size;
  }
  return groups;
}

WeightedPool::WeightedPool(std::span<const double> weights)
    : tree_(weights.size() + 1, 0.0), weights_(weights.begin(), weights.end()) {
  while (top_bit_ * 2 <= weights_.size()) top_bit_ *= 2;
  for (std::size_t i = 0; i < weights_.size(); ++i) {
    require(std::isfinite(weights_[i]) && weights_[i] >= 0.0, "pool weights must be finite and >= 0");
    tree_[i + 1] += weights_[i];
    const std::size_t parent = (i + 1) + ((i + 1) & (~(i + 1) + 1));
    if (parent < tree_.size()) tree_[parent] += tree_[i + 1];
    total_ += weights_[i];
  }
}

void WeightedPool::set(std::size_t index, double weight) {
  require(std::isfinite(weight) && weight >= 0.0, "pool weights must be finite and >= 0");
  const double delta = weight - weights_[index];
  weights_[index] = weight;
  for (std::size_t i = index + 1; i < tree_.size(); i += i & (~i + 1)) tree_[i] += delta;
  total_ += delta;
}

std::size_t WeightedPool::find(double target) const {
  // Largest prefix whose sum is <= target, i.e. the selected index.
  std::size_t pos = 0;
  for (std::size_t step = top_bit_; step > 0; step /= 2) {
    const std::size_t next = pos + step;
    if (next < tree_.size() && tree_[next] <= target) {
      pos = next;
      target -= tree_[next];
    }
  }
  return pos;
}

std::size_t WeightedPool::draw(RandomStream& rng) const {
  require(total_ > 0.0, "pool: all weights are zero");
  std::size_t index = find(rng.uniform() * total_);
  // Accumulated rounding can land on a zero-weight slot; step to a live one.
  if (index >= weights_.size()) index = weights_.size() - 1;
  if (weights_[index] <= 0.0) {
    std::size_t down = index;
    while (down > 0 && weights_[down] <= 0.0) --down;
    if (weights_[down] > 0.0) return down;
    while (index < weights_.size() && weights_[index] <= 0.0) ++index;
    require(index < weights_.size(), "pool: no positive weight found");
  }
  return index;
}

}  // namespace opsample
