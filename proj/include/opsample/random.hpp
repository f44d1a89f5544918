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

#ifndef OPSAMPLE_RANDOM_HPP_
#define OPSAMPLE_RANDOM_HPP_

#include <cstdint>
#include <string_view>

namespace opsample {

/// Counter-based 64-bit generator.
///
/// The i-th output is `mix(key + (i + 1) * golden_gamma)` where `mix` is the
/// SplitMix64 finalizer, so a stream is fully described by (key, counter) and
/// yields the same sequence on every platform. Integer and real variates are
/// derived with explicit arithmetic (no <random> distributions, whose output
/// is implementation-defined).
class RandomStream {
 public:
  explicit RandomStream(std::uint64_t seed) : key_(seed) {}

  std::uint64_t next_u64();

  /// Uniform in [0, 1) with 53 random bits.
  double uniform();

  /// Uniform integer in [0, bound); bound must be positive.
  std::uint64_t below(std::uint64_t bound);

  /// Standard normal via Box-Muller (one output per call).
  double normal();

  /// Independent child stream; the parent is not advanced.
  RandomStream split(std::uint64_t stream_id) const;

  std::uint64_t key() const { return key_; }
  std::uint64_t counter() const { return counter_; }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

std::uint64_t mix64(std::uint64_t x);

/// FNV-1a over bytes, finalized with mix64.
std::uint64_t hash_string(std::string_view s);

/// Order-dependent combination of two hashes.
std::uint64_t hash_combine(std::uint64_t seed, std::uint64_t value);

}  // namespace opsample

#endif  // OPSAMPLE_RANDOM_HPP_
