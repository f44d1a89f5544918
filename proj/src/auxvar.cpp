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

#include "opsample/auxvar.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <limits>

#include "opsample/csv.hpp"
#include "opsample/error.hpp"

namespace opsample {

void ActivationTraces::validate() const {
  require(cols >= 1, "activation traces need at least one dimension");
  require(values.size() == rows * cols, "activation trace matrix has wrong size");
  require(predicted_class.empty() || predicted_class.size() == rows,
          "predicted classes misaligned with traces");
  for (double v : values) require(std::isfinite(v), "non-finite activation value");
}

ChiVector chi_from_confidence(std::span<const double> confidences) {
  ChiVector chi{"confidence", {}, {}};
  chi.values.reserve(confidences.size());
  for (std::size_t i = 0; i < confidences.size(); ++i) {
    const double c = confidences[i];
    if (!(c >= 0.0 && c <= 1.0)) {
      fail("invalid_argument", "confidence outside [0, 1] at row " + std::to_string(i + 1));
    }
    chi.values.push_back(1.0 - c);
  }
  return chi;
}

namespace {

double squared_distance(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    const double d = a[k] - b[k];
    s += d * d;
  }
  return s;
}

}  // namespace

ChiVector compute_dsa(const ActivationTraces& traces) {
  traces.validate();
  require(traces.predicted_class.size() == traces.rows, "DSA needs a predicted class per row");
  const std::size_t n = traces.rows;

  std::vector<std::size_t> class_count;
  for (int c : traces.predicted_class) {
    require(c >= 0, "predicted class ids must be nonnegative");
    if (static_cast<std::size_t>(c) >= class_count.size()) class_count.resize(c + 1, 0);
    ++class_count[c];
  }
  for (std::size_t c = 0; c < class_count.size(); ++c) {
    if (class_count[c] == 1) {
      fail("invalid_argument", "DSA: class " + std::to_string(c) + " has a single member");
    }
    if (class_count[c] == n) fail("invalid_argument", "DSA: all records share one predicted class");
  }

  ChiVector chi{"dsa", std::vector<double>(n, 0.0), {}};
  std::vector<std::size_t> degenerate;
  const double inf = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < n; ++i) {
    double same = inf, other = inf;
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i) continue;
      const double d = squared_distance(traces.row(i), traces.row(j));
      if (traces.predicted_class[j] == traces.predicted_class[i]) {
        same = std::min(same, d);
      } else {
        other = std::min(other, d);
      }
    }
    if (other == 0.0) {
      degenerate.push_back(i);
    } else {
      chi.values[i] = std::sqrt(same) / std::sqrt(other);
    }
  }
  if (!degenerate.empty()) {
    double largest = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      if (std::find(degenerate.begin(), degenerate.end(), i) == degenerate.end()) {
        largest = std::max(largest, chi.values[i]);
      }
    }
    const double sentinel = largest > 0.0 ? 10.0 * largest : 10.0;
    for (std::size_t i : degenerate) chi.values[i] = sentinel;
    chi.warnings.push_back("DSA: " + std::to_string(degenerate.size()) +
                           " record(s) share an activation trace with another class; set to " +
                           csv::format_real(sentinel));
  }
  return chi;
}

ChiVector compute_lsa(const ActivationTraces& traces, const LsaOptions& options) {
  traces.validate();
  const std::size_t n = traces.rows;
  require(n >= 2, "LSA needs at least two records");
  require(options.bandwidth_scale > 0.0, "LSA bandwidth scale must be positive");

  std::vector<std::size_t> dims;
  std::vector<double> stddev;
  for (std::size_t d = 0; d < traces.cols; ++d) {
    double mean = 0.0;
    for (std::size_t i = 0; i < n; ++i) mean += traces.values[i * traces.cols + d];
    mean /= static_cast<double>(n);
    double var = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double x = traces.values[i * traces.cols + d] - mean;
      var += x * x;
    }
    var /= static_cast<double>(n - 1);
    if (var >= options.variance_floor) {
      dims.push_back(d);
      stddev.push_back(std::sqrt(var));
    }
  }
  if (dims.empty()) fail("invalid_argument", "LSA: every dimension fell below the variance floor");

  // Scott's rule: h_d = sigma_d * n^(-1 / (d + 4)).
  const double factor =
      std::pow(static_cast<double>(n), -1.0 / (static_cast<double>(dims.size()) + 4.0)) *
      options.bandwidth_scale;
  std::vector<double> bandwidth(dims.size());
  double log_norm = 0.0;
  for (std::size_t k = 0; k < dims.size(); ++k) {
    bandwidth[k] = stddev[k] * factor;
    log_norm += std::log(bandwidth[k]) + 0.5 * std::log(2.0 * M_PI);
  }

  const std::size_t others = options.leave_one_out ? n - 1 : n;
  ChiVector chi{"lsa", std::vector<double>(n), {}};
  std::vector<double> exponents;
  exponents.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    exponents.clear();
    for (std::size_t j = 0; j < n; ++j) {
      if (options.leave_one_out && j == i) continue;
      double e = 0.0;
      for (std::size_t k = 0; k < dims.size(); ++k) {
        const std::size_t d = dims[k];
        const double z = (traces.values[i * traces.cols + d] - traces.values[j * traces.cols + d]) /
                         bandwidth[k];
        e -= 0.5 * z * z;
      }
      exponents.push_back(e);
    }
    const double top = *std::max_element(exponents.begin(), exponents.end());
    double sum = 0.0;
    for (double e : exponents) sum += std::exp(e - top);
    const double log_density =
        top + std::log(sum) - std::log(static_cast<double>(others)) - log_norm;
    chi.values[i] = -log_density;
  }
  return chi;
}

double reconstruction_error(const ImageArray& original, const ImageArray& reconstructed) {
  if (original.width != reconstructed.width || original.height != reconstructed.height ||
      original.channels != reconstructed.channels) {
    fail("invalid_argument", "reconstruction error: shape mismatch");
  }
  const std::size_t count = original.width * original.height * original.channels;
  require(count > 0, "reconstruction error: empty image");
  require(original.values.size() == count && reconstructed.values.size() == count,
          "reconstruction error: data size does not match shape");
  double sum = 0.0;
  for (std::size_t i = 0; i < count; ++i) {
    const double d = original.values[i] - reconstructed.values[i];
    sum += d * d;
  }
  return sum / static_cast<double>(count);
}

std::vector<double> min_max_normalize(std::span<const double> values) {
  require(!values.empty(), "min-max normalization of an empty vector");
  const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
  const double min = *lo, max = *hi;
  if (!(max > min)) fail("invalid_argument", "min-max normalization of a constant vector");
  std::vector<double> out(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) out[i] = (values[i] - min) / (max - min);
  return out;
}

std::vector<double> shift_positive(std::span<const double> values) {
  std::vector<double> out(values.begin(), values.end());
  if (out.empty()) return out;
  const double min = *std::min_element(out.begin(), out.end());
  if (min < 0.0) {
    const double shift = std::ceil(std::abs(min));
    for (double& x : out) x += shift;
  }
  return out;
}

std::vector<double> selection_probabilities(std::span<const double> chi, double floor_fraction) {
  require(!chi.empty(), "selection probabilities of an empty vector");
  require(floor_fraction >= 0.0, "floor fraction must be nonnegative");
  double max = 0.0;
  for (double c : chi) {
    require(std::isfinite(c) && c >= 0.0, "auxiliary values for PPS must be finite and >= 0");
    max = std::max(max, c);
  }
  if (!(max > 0.0)) fail("invalid_argument", "selection probabilities: all auxiliary values are zero");
  const double floor = floor_fraction * max;
  std::vector<double> pi(chi.size());
  double total = 0.0;
  for (std::size_t i = 0; i < chi.size(); ++i) {
    pi[i] = std::max(chi[i], floor);
    total += pi[i];
  }
  for (double& p : pi) p /= total;
  return pi;
}

AuxKind aux_kind(std::string_view name) {
  if (name == "confidence") return AuxKind::kConfidence;
  if (name == "lsa") return AuxKind::kLsa;
  if (name == "dsa") return AuxKind::kDsa;
  if (name == "sae") return AuxKind::kSae;
  if (name == "vae") return AuxKind::kVae;
  return AuxKind::kCustom;
}

bool aux_compatible(Task task, std::string_view name) {
  switch (aux_kind(name)) {
    case AuxKind::kConfidence:
    case AuxKind::kDsa:
      return task == Task::kClassification;
    case AuxKind::kSae:
    case AuxKind::kVae:
      return task == Task::kRegression;
    default:
      return true;
  }
}

ChiVector chi_for(const Population& population, std::string_view name) {
  if (!aux_compatible(population.task(), name)) {
    fail("incompatible", "auxiliary variable '" + std::string(name) + "' is not defined for " +
                             std::string(task_name(population.task())) + " tasks");
  }
  const std::vector<double> raw = population.aux_column(name);
  ChiVector chi{std::string(name), {}, {}};
  switch (aux_kind(name)) {
    case AuxKind::kConfidence:
      chi.values = chi_from_confidence(raw).values;
      break;
    case AuxKind::kLsa:
    case AuxKind::kDsa:
      chi.values = population.task() == Task::kClassification ? min_max_normalize(raw)
                                                               : shift_positive(raw);
      break;
    default:
      for (std::size_t i = 0; i < raw.size(); ++i) {
        if (raw[i] < 0.0) {
          fail("invalid_argument", "auxiliary column '" + std::string(name) +
                                       "' has a negative value at row " + std::to_string(i + 1));
        }
      }
      chi.values = raw;
  }
  return chi;
}

// ---------------------------------------------------------------------------
// Trace I/O

ActivationTraces load_traces_csv(const std::filesystem::path& path) {
  const csv::Table table = csv::parse(csv::read_file(path));
  const auto class_col = table.column("predicted_class");
  const auto id_col = table.column("id");
  std::vector<std::size_t> dims;
  for (std::size_t c = 0; c < table.header.size(); ++c) {
    if (c != class_col && c != id_col) dims.push_back(c);
  }
  ActivationTraces t;
  t.rows = table.rows.size();
  t.cols = dims.size();
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    for (std::size_t c : dims) {
      const auto v = csv::to_double(table.rows[r][c]);
      if (!v || !std::isfinite(*v)) {
        fail("parse", "invalid activation value at row " + std::to_string(r + 1));
      }
      t.values.push_back(*v);
    }
    if (class_col) {
      const auto k = csv::to_integer(table.rows[r][*class_col]);
      if (!k) fail("parse", "invalid predicted_class at row " + std::to_string(r + 1));
      t.predicted_class.push_back(static_cast<int>(*k));
    }
  }
  t.validate();
  return t;
}

namespace {

template <typename T>
void put(std::string& out, T value) {
  static_assert(std::endian::native == std::endian::little, "little-endian host required");
  char bytes[sizeof(T)];
  std::memcpy(bytes, &value, sizeof(T));
  out.append(bytes, sizeof(T));
}

template <typename T>
T take(std::string_view& in) {
  if (in.size() < sizeof(T)) fail("parse", "truncated trace container");
  T value;
  std::memcpy(&value, in.data(), sizeof(T));
  in.remove_prefix(sizeof(T));
  return value;
}

}  // namespace

ActivationTraces load_traces_binary(const std::filesystem::path& path) {
  const std::string blob = csv::read_file(path);
  std::string_view in(blob);
  if (in.substr(0, 4) != "OPSA") fail("parse", "not an activation trace container");
  in.remove_prefix(4);
  if (take<std::uint32_t>(in) != 1) fail("parse", "unsupported trace container version");
  ActivationTraces t;
  t.rows = take<std::uint64_t>(in);
  t.cols = take<std::uint64_t>(in);
  const bool has_classes = take<std::uint8_t>(in) != 0;
  t.values.resize(t.rows * t.cols);
  for (double& v : t.values) v = take<double>(in);
  if (has_classes) {
    t.predicted_class.resize(t.rows);
    for (int& c : t.predicted_class) c = take<std::int32_t>(in);
  }
  if (!in.empty()) fail("parse", "trailing bytes in trace container");
  t.validate();
  return t;
}

void save_traces_binary(const ActivationTraces& traces, const std::filesystem::path& path) {
  traces.validate();
  std::string out = "OPSA";
  put<std::uint32_t>(out, 1);
  put<std::uint64_t>(out, traces.rows);
  put<std::uint64_t>(out, traces.cols);
  put<std::uint8_t>(out, traces.predicted_class.empty() ? 0 : 1);
  for (double v : traces.values) put<double>(out, v);
  for (int c : traces.predicted_class) put<std::int32_t>(out, c);
  csv::write_file(path, out);
}

}  // namespace opsample
