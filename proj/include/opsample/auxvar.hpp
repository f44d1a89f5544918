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

#ifndef OPSAMPLE_AUXVAR_HPP_
#define OPSAMPLE_AUXVAR_HPP_

#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "opsample/population.hpp"

namespace opsample {

/// Per-record auxiliary score chi, aligned to record ids. Larger chi means
/// the example is expected to be more likely to fail.
struct ChiVector {
  std::string name;
  std::vector<double> values;
  std::vector<std::string> warnings;

  std::size_t size() const { return values.size(); }
};

/// Row-major N x L matrix of activation values plus the predicted class of
/// each row (the class is only needed by DSA).
struct ActivationTraces {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> values;
  std::vector<int> predicted_class;

  std::span<const double> row(std::size_t i) const {
    return {values.data() + i * cols, cols};
  }
  void validate() const;
};

/// W x H x C image stored flat; only shape equality matters here.
struct ImageArray {
  std::size_t width = 0;
  std::size_t height = 0;
  std::size_t channels = 0;
  std::vector<double> values;
};

ChiVector chi_from_confidence(std::span<const double> confidences);

/// Distance-based surprise: nearest same-class distance over nearest
/// other-class distance. Rows whose other-class distance is zero receive
/// 10x the largest finite value and a warning.
ChiVector compute_dsa(const ActivationTraces& traces);

struct LsaOptions {
  /// Dimensions whose sample variance falls below this are ignored.
  double variance_floor = 1e-5;
  /// Multiplies the Scott's-rule bandwidth of every dimension.
  double bandwidth_scale = 1.0;
  bool leave_one_out = true;
};

/// Likelihood-based surprise -log f(x) under a Gaussian product-kernel KDE.
ChiVector compute_lsa(const ActivationTraces& traces, const LsaOptions& options = {});

double reconstruction_error(const ImageArray& original, const ImageArray& reconstructed);

std::vector<double> min_max_normalize(std::span<const double> values);

/// Adds ceil(|min|) when the minimum is negative.
std::vector<double> shift_positive(std::span<const double> values);

/// pi_i = chi_i / sum(chi). Values below floor_fraction * max(chi) are raised
/// to that floor first so every record stays selectable.
std::vector<double> selection_probabilities(std::span<const double> chi,
                                            double floor_fraction = 1e-9);

enum class AuxKind { kConfidence, kLsa, kDsa, kSae, kVae, kCustom };

AuxKind aux_kind(std::string_view name);
bool aux_compatible(Task task, std::string_view name);

/// Reads auxiliary column `name` and applies the transform appropriate for
/// its kind and the population task (1 - C, min-max, positive shift, or raw).
ChiVector chi_for(const Population& population, std::string_view name);

/// Activation traces from CSV: optional `id`, optional `predicted_class`,
/// remaining numeric columns are the trace dimensions.
ActivationTraces load_traces_csv(const std::filesystem::path& path);

/// Binary container: magic "OPSA", u32 version (1), u64 rows, u64 cols,
/// u8 has_classes, then rows*cols little-endian f64, then rows i32 classes
/// when has_classes is set.
ActivationTraces load_traces_binary(const std::filesystem::path& path);
void save_traces_binary(const ActivationTraces& traces, const std::filesystem::path& path);

}  // namespace opsample

#endif  // OPSAMPLE_AUXVAR_HPP_
