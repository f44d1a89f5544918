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

#ifndef OPSAMPLE_POPULATION_HPP_
#define OPSAMPLE_POPULATION_HPP_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace opsample {

enum class Task { kClassification, kRegression };

std::string_view task_name(Task task);
Task parse_task(std::string_view name);

/// One example of the operational dataset. Ground truth (`true_label`,
/// `true_value`) is only read through LabelingOracle or by evaluation code.
struct PopulationRecord {
  std::size_t id = 0;
  std::string external_id;
  int predicted_label = 0;
  int true_label = 0;
  double predicted_value = 0.0;
  double true_value = 0.0;
  std::vector<double> aux;       // aligned with Population::aux_names()
  std::vector<double> features;  // optional representation used by CES
};

/// The operational dataset D. Immutable once constructed.
class Population {
 public:
  Population(Task task, std::vector<PopulationRecord> records,
             std::vector<std::string> aux_names,
             std::vector<std::string> label_names = {});

  Task task() const { return task_; }
  std::size_t size() const { return records_.size(); }
  const std::vector<PopulationRecord>& records() const { return records_; }
  const PopulationRecord& operator[](std::size_t id) const { return records_[id]; }

  const std::vector<std::string>& aux_names() const { return aux_names_; }
  bool has_aux(std::string_view name) const;
  std::vector<double> aux_column(std::string_view name) const;

  std::size_t feature_count() const;
  /// Category names in id order (empty when labels were integers).
  const std::vector<std::string>& label_names() const { return label_names_; }

 private:
  Task task_;
  std::vector<PopulationRecord> records_;
  std::vector<std::string> aux_names_;
  std::vector<std::string> label_names_;
};

// Ground-truth accessors. Only the oracle and evaluation code call these.
inline bool is_misprediction(const PopulationRecord& r) {
  return r.predicted_label != r.true_label;
}
double offset(const PopulationRecord& r);

/// Value whose population mean is estimated: z for classification, the
/// squared offset for regression.
double target_value(Task task, const PopulationRecord& r);

struct TrueAccuracy {
  double xi = 0.0;
  double error = 0.0;  // theta or Delta
  bool unnormalized_offsets = false;  // some squared offset exceeds 1
};

TrueAccuracy true_accuracy(const Population& population);

/// Column mapping for file ingestion.
struct ColumnSchema {
  std::string id = "id";
  std::string true_label = "true_label";
  std::string predicted_label = "predicted_label";
  std::string true_value = "true_value";
  std::string predicted_value = "predicted_value";
  std::string feature_prefix = "feat_";
  /// Auxiliary columns to keep; empty keeps every unmapped non-feature column.
  std::vector<std::string> aux;
};

/// Loads a CSV (header row) or, for a `.json` extension, the JSON form.
Population load_population(const std::filesystem::path& path,
                           const ColumnSchema& schema = {});
Population parse_population_csv(std::string_view text,
                                const ColumnSchema& schema = {});
Population parse_population_json(std::string_view text);

void write_population_csv(const Population& population,
                          const std::filesystem::path& path);

struct SyntheticConfig {
  Task task = Task::kClassification;
  std::size_t size = 10000;
  double target_accuracy = 0.9;
  double chi_correlation = 0.8;  // rho
  /// Slope of the logistic link from the latent score to failure probability.
  double link_slope = 2.0;
  /// 0 keeps chi as the min-max normalized Gaussian score; s > 0 uses
  /// exp(s * score) before normalization (right-skewed like 1 - confidence).
  double chi_skew = 1.0;
  /// Log-scale spread of regression offsets.
  double offset_scale = 0.5;
  /// Number of predicted categories written for classification.
  int classes = 10;
};

void validate(const SyntheticConfig& config);

Population generate_synthetic(const SyntheticConfig& config, std::uint64_t seed);

/// Name of the auxiliary column written by generate_synthetic.
std::string_view synthetic_aux_name(Task task);

/// Reveals ground truth one example at a time and meters labeling cost as the
/// number of distinct examples revealed.
class LabelingOracle {
 public:
  explicit LabelingOracle(const Population& population);

  /// z (0 or 1) for classification, the offset for regression.
  double reveal(std::size_t id);

  std::size_t reveal_count() const { return order_.size(); }
  bool is_labeled(std::size_t id) const { return labeled_[id] != 0; }
  const std::vector<std::size_t>& labeled_ids() const { return order_; }

  Task task() const { return population_->task(); }
  std::size_t population_size() const { return population_->size(); }

 private:
  const Population* population_;
  std::vector<std::uint8_t> labeled_;
  std::vector<std::size_t> order_;
};

/// Maps a revealed outcome to the estimation target (z or squared offset).
inline double outcome_target(Task task, double outcome) {
  return task == Task::kClassification ? outcome : outcome * outcome;
}

}  // namespace opsample

#endif  // OPSAMPLE_POPULATION_HPP_
