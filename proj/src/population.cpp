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

#include "opsample/population.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <set>
#include <sstream>

#include "json.hpp"

#include "opsample/csv.hpp"
#include "opsample/error.hpp"
#include "opsample/random.hpp"

namespace opsample {

std::string_view task_name(Task task) {
  return task == Task::kClassification ? "classification" : "regression";
}

Task parse_task(std::string_view name) {
  if (name == "classification") return Task::kClassification;
  if (name == "regression") return Task::kRegression;
  fail("invalid_argument", "unknown task '" + std::string(name) + "'");
}

Population::Population(Task task, std::vector<PopulationRecord> records,
                       std::vector<std::string> aux_names,
                       std::vector<std::string> label_names)
    : task_(task),
      records_(std::move(records)),
      aux_names_(std::move(aux_names)),
      label_names_(std::move(label_names)) {
  require(!records_.empty(), "population must contain at least one record");
  const std::size_t features = records_.front().features.size();
  for (std::size_t i = 0; i < records_.size(); ++i) {
    auto& r = records_[i];
    require(r.id == i, "record ids must be dense and in row order");
    require(r.aux.size() == aux_names_.size(), "auxiliary values misaligned with names");
    require(r.features.size() == features, "records have differing feature counts");
    for (double a : r.aux) {
      if (!std::isfinite(a)) {
        fail("invalid_argument",
             "non-finite auxiliary value at row " + std::to_string(i + 1));
      }
    }
    if (task_ == Task::kRegression) {
      require(std::isfinite(r.true_value) && std::isfinite(r.predicted_value),
              "non-finite regression value at row " + std::to_string(i + 1));
    }
  }
}

bool Population::has_aux(std::string_view name) const {
  return std::find(aux_names_.begin(), aux_names_.end(), name) != aux_names_.end();
}

std::vector<double> Population::aux_column(std::string_view name) const {
  const auto it = std::find(aux_names_.begin(), aux_names_.end(), name);
  if (it == aux_names_.end()) {
    fail("invalid_argument", "population has no auxiliary column '" + std::string(name) + "'");
  }
  const auto k = static_cast<std::size_t>(it - aux_names_.begin());
  std::vector<double> column;
  column.reserve(records_.size());
  for (const auto& r : records_) column.push_back(r.aux[k]);
  return column;
}

std::size_t Population::feature_count() const { return records_.front().features.size(); }

double offset(const PopulationRecord& r) { return std::abs(r.true_value - r.predicted_value); }

double target_value(Task task, const PopulationRecord& r) {
  if (task == Task::kClassification) return is_misprediction(r) ? 1.0 : 0.0;
  const double d = offset(r);
  return d * d;
}

TrueAccuracy true_accuracy(const Population& population) {
  TrueAccuracy out;
  double sum = 0.0;
  for (const auto& r : population.records()) {
    const double t = target_value(population.task(), r);
    if (population.task() == Task::kRegression && t > 1.0) out.unnormalized_offsets = true;
    sum += t;
  }
  out.error = sum / static_cast<double>(population.size());
  out.xi = 1.0 - out.error;
  if (population.task() == Task::kRegression && out.error > 1.0) out.unnormalized_offsets = true;
  return out;
}

// ---------------------------------------------------------------------------
// Ingestion

namespace {

class LabelInterner {
 public:
  int intern(const std::string& name) {
    auto [it, inserted] = ids_.emplace(name, static_cast<int>(names_.size()));
    if (inserted) names_.push_back(name);
    return it->second;
  }
  std::vector<std::string> names() && { return std::move(names_); }

 private:
  std::map<std::string, int> ids_;
  std::vector<std::string> names_;
};

double parse_required_real(const std::string& field, const std::string& what, std::size_t row) {
  const auto v = csv::to_double(field);
  if (!v || !std::isfinite(*v)) {
    fail("parse", "invalid " + what + " at row " + std::to_string(row + 1) + ": '" + field + "'");
  }
  return *v;
}

}  // namespace

Population parse_population_csv(std::string_view text, const ColumnSchema& schema) {
  const csv::Table table = csv::parse(text);
  if (table.header.empty()) fail("parse", "empty CSV input");

  const auto id_col = table.column(schema.id);
  const auto tl = table.column(schema.true_label);
  const auto pl = table.column(schema.predicted_label);
  const auto tv = table.column(schema.true_value);
  const auto pv = table.column(schema.predicted_value);

  const bool has_labels = tl || pl;
  const bool has_values = tv || pv;
  if (has_labels && has_values) {
    fail("parse", "mixed task columns: both label and value columns present");
  }
  if (!has_labels && !has_values) {
    fail("parse", "missing column: expected '" + schema.true_label + "'/'" +
                      schema.predicted_label + "' or '" + schema.true_value + "'/'" +
                      schema.predicted_value + "'");
  }
  const Task task = has_labels ? Task::kClassification : Task::kRegression;
  if (task == Task::kClassification && !(tl && pl)) {
    fail("parse", "missing column: '" + (tl ? schema.predicted_label : schema.true_label) + "'");
  }
  if (task == Task::kRegression && !(tv && pv)) {
    fail("parse", "missing column: '" + (tv ? schema.predicted_value : schema.true_value) + "'");
  }

  std::vector<std::size_t> aux_cols;
  std::vector<std::string> aux_names;
  std::vector<std::size_t> feature_cols;
  if (schema.aux.empty()) {
    for (std::size_t c = 0; c < table.header.size(); ++c) {
      const std::string& h = table.header[c];
      if (h == schema.id || h == schema.true_label || h == schema.predicted_label ||
          h == schema.true_value || h == schema.predicted_value) {
        continue;
      }
      if (h.rfind(schema.feature_prefix, 0) == 0) continue;
      aux_cols.push_back(c);
      aux_names.push_back(h);
    }
  } else {
    for (const auto& name : schema.aux) {
      const auto c = table.column(name);
      if (!c) fail("parse", "missing column: '" + name + "'");
      aux_cols.push_back(*c);
      aux_names.push_back(name);
    }
  }
  // feat_0, feat_1, ... in numeric order
  for (std::size_t m = 0;; ++m) {
    const auto c = table.column(schema.feature_prefix + std::to_string(m));
    if (!c) break;
    feature_cols.push_back(*c);
  }

  LabelInterner labels;
  std::set<std::string> seen_ids;
  std::vector<PopulationRecord> records;
  records.reserve(table.rows.size());
  for (std::size_t row = 0; row < table.rows.size(); ++row) {
    const auto& fields = table.rows[row];
    PopulationRecord r;
    r.id = row;
    r.external_id = id_col ? fields[*id_col] : std::to_string(row);
    if (!seen_ids.insert(r.external_id).second) {
      fail("parse", "duplicate id '" + r.external_id + "' at row " + std::to_string(row + 1));
    }
    if (task == Task::kClassification) {
      r.true_label = labels.intern(fields[*tl]);
      r.predicted_label = labels.intern(fields[*pl]);
    } else {
      r.true_value = parse_required_real(fields[*tv], schema.true_value, row);
      r.predicted_value = parse_required_real(fields[*pv], schema.predicted_value, row);
    }
    for (std::size_t c : aux_cols) {
      const auto v = csv::to_double(fields[c]);
      if (!v) {
        fail("parse", "invalid auxiliary value in column '" + table.header[c] + "' at row " +
                          std::to_string(row + 1));
      }
      if (!std::isfinite(*v)) {
        fail("parse", "non-finite auxiliary value at row " + std::to_string(row + 1));
      }
      r.aux.push_back(*v);
    }
    for (std::size_t c : feature_cols) {
      r.features.push_back(parse_required_real(fields[c], table.header[c], row));
    }
    records.push_back(std::move(r));
  }
  if (records.empty()) fail("parse", "CSV contains no data rows");
  return Population(task, std::move(records), std::move(aux_names), std::move(labels).names());
}

Population parse_population_json(std::string_view text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    fail("parse", std::string("invalid JSON: ") + e.what());
  }
  if (!doc.contains("records") || !doc["records"].is_array()) {
    fail("parse", "JSON population needs a 'records' array");
  }
  const auto& rows = doc["records"];
  if (rows.empty()) fail("parse", "JSON population has no records");

  const auto& first = rows.front();
  const bool has_labels = first.contains("true_label") || first.contains("predicted_label");
  const bool has_values = first.contains("true_value") || first.contains("predicted_value");
  if (has_labels && has_values) fail("parse", "mixed task columns: both label and value fields present");
  if (!has_labels && !has_values) fail("parse", "missing column: label or value fields");
  const Task task = has_labels ? Task::kClassification : Task::kRegression;

  std::vector<std::string> aux_names;
  if (first.contains("aux")) {
    for (const auto& [name, _] : first["aux"].items()) aux_names.push_back(name);
  }

  auto label_text = [](const nlohmann::json& v) {
    return v.is_string() ? v.get<std::string>() : v.dump();
  };

  LabelInterner labels;
  std::set<std::string> seen_ids;
  std::vector<PopulationRecord> records;
  for (std::size_t row = 0; row < rows.size(); ++row) {
    const auto& j = rows[row];
    PopulationRecord r;
    r.id = row;
    r.external_id = j.contains("id") ? label_text(j["id"]) : std::to_string(row);
    if (!seen_ids.insert(r.external_id).second) {
      fail("parse", "duplicate id '" + r.external_id + "' at row " + std::to_string(row + 1));
    }
    try {
      if (task == Task::kClassification) {
        if (!j.contains("true_label") || !j.contains("predicted_label")) {
          fail("parse", "missing label field at row " + std::to_string(row + 1));
        }
        if (j.contains("true_value") || j.contains("predicted_value")) {
          fail("parse", "mixed task columns at row " + std::to_string(row + 1));
        }
        r.true_label = labels.intern(label_text(j["true_label"]));
        r.predicted_label = labels.intern(label_text(j["predicted_label"]));
      } else {
        if (!j.contains("true_value") || !j.contains("predicted_value")) {
          fail("parse", "missing value field at row " + std::to_string(row + 1));
        }
        if (j.contains("true_label") || j.contains("predicted_label")) {
          fail("parse", "mixed task columns at row " + std::to_string(row + 1));
        }
        r.true_value = j["true_value"].get<double>();
        r.predicted_value = j["predicted_value"].get<double>();
      }
      for (const auto& name : aux_names) {
        if (!j.contains("aux") || !j["aux"].contains(name)) {
          fail("parse", "missing column: aux '" + name + "' at row " + std::to_string(row + 1));
        }
        const auto& v = j["aux"][name];
        if (!v.is_number()) {
          fail("parse", "non-finite auxiliary value at row " + std::to_string(row + 1));
        }
        r.aux.push_back(v.get<double>());
      }
      if (j.contains("features")) r.features = j["features"].get<std::vector<double>>();
    } catch (const nlohmann::json::exception& e) {
      fail("parse", "row " + std::to_string(row + 1) + ": " + e.what());
    }
    records.push_back(std::move(r));
  }
  return Population(task, std::move(records), std::move(aux_names), std::move(labels).names());
}

Population load_population(const std::filesystem::path& path, const ColumnSchema& schema) {
  if (!std::filesystem::exists(path)) fail("io", "population file not found: " + path.string());
  const std::string text = csv::read_file(path);
  if (path.extension() == ".json") return parse_population_json(text);
  return parse_population_csv(text, schema);
}

void write_population_csv(const Population& population, const std::filesystem::path& path) {
  std::ostringstream out;
  const bool cls = population.task() == Task::kClassification;
  out << "id," << (cls ? "true_label,predicted_label" : "true_value,predicted_value");
  for (const auto& a : population.aux_names()) out << ',' << csv::escape(a);
  for (std::size_t m = 0; m < population.feature_count(); ++m) out << ",feat_" << m;
  out << '\n';
  const auto& names = population.label_names();
  auto label = [&](int l) { return names.empty() ? std::to_string(l) : csv::escape(names[l]); };
  for (const auto& r : population.records()) {
    out << csv::escape(r.external_id) << ',';
    if (cls) {
      out << label(r.true_label) << ',' << label(r.predicted_label);
    } else {
      out << csv::format_real(r.true_value) << ',' << csv::format_real(r.predicted_value);
    }
    for (double a : r.aux) out << ',' << csv::format_real(a);
    for (double f : r.features) out << ',' << csv::format_real(f);
    out << '\n';
  }
  csv::write_file(path, out.str());
}

// ---------------------------------------------------------------------------
// Synthetic populations

void validate(const SyntheticConfig& config) {
  if (!(config.target_accuracy > 0.0 && config.target_accuracy < 1.0)) {
    fail("invalid_argument", "infeasible calibration: target accuracy must lie in (0, 1)");
  }
  require(config.size >= 2, "synthetic population needs at least 2 records");
  require(config.chi_correlation >= -1.0 && config.chi_correlation <= 1.0,
          "chi correlation must lie in [-1, 1]");
  require(config.chi_skew >= 0.0, "chi skew must be nonnegative");
  require(config.link_slope >= 0.0, "link slope must be nonnegative");
  require(config.offset_scale >= 0.0, "offset scale must be nonnegative");
  require(config.classes >= 2, "need at least 2 classes");
}

std::string_view synthetic_aux_name(Task task) {
  return task == Task::kClassification ? "confidence" : "sae";
}

namespace {

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

std::vector<double> min_max(std::vector<double> v) {
  const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
  const double min = *lo;
  const double range = *hi - *lo;
  for (double& x : v) x = range > 0.0 ? (x - min) / range : 0.0;
  return v;
}

}  // namespace

Population generate_synthetic(const SyntheticConfig& config, std::uint64_t seed) {
  validate(config);
  const std::size_t n = config.size;
  RandomStream latent_rng = RandomStream(seed).split(1);
  RandomStream noise_rng = RandomStream(seed).split(2);
  RandomStream outcome_rng = RandomStream(seed).split(3);
  RandomStream label_rng = RandomStream(seed).split(4);

  std::vector<double> latent(n), score(n), coin(n);
  const double rho = config.chi_correlation;
  const double rest = std::sqrt(std::max(0.0, 1.0 - rho * rho));
  for (std::size_t i = 0; i < n; ++i) {
    latent[i] = latent_rng.normal();
    score[i] = rho * latent[i] + rest * noise_rng.normal();
    coin[i] = outcome_rng.uniform();
  }
  std::vector<double> raw_chi = score;
  if (config.chi_skew > 0.0) {
    for (double& s : raw_chi) s = std::exp(config.chi_skew * s);
  }
  const std::vector<double> chi = min_max(std::move(raw_chi));

  std::vector<PopulationRecord> records(n);
  std::vector<std::string> aux_names{std::string(synthetic_aux_name(config.task))};

  if (config.task == Task::kClassification) {
    const double target_failures = (1.0 - config.target_accuracy) * static_cast<double>(n);
    auto failures_at = [&](double intercept) {
      std::size_t count = 0;
      for (std::size_t i = 0; i < n; ++i) {
        if (coin[i] < sigmoid(intercept + config.link_slope * latent[i])) ++count;
      }
      return static_cast<double>(count);
    };
    // failures_at is non-decreasing in the intercept.
    double lo = -60.0, hi = 60.0;
    for (int it = 0; it < 200; ++it) {
      const double mid = 0.5 * (lo + hi);
      const double f = failures_at(mid);
      if (std::abs(f - target_failures) <= 0.5) {
        lo = hi = mid;
        break;
      }
      (f < target_failures ? lo : hi) = mid;
    }
    const double intercept = 0.5 * (lo + hi);
    const double realized = failures_at(intercept) / static_cast<double>(n);
    if (std::abs(realized - (1.0 - config.target_accuracy)) >
        1.0 / std::sqrt(static_cast<double>(n))) {
      fail("invalid_argument", "infeasible calibration: realized failure rate " +
                                   csv::format_real(realized));
    }
    const auto classes = static_cast<std::uint64_t>(config.classes);
    for (std::size_t i = 0; i < n; ++i) {
      auto& r = records[i];
      r.id = i;
      r.external_id = std::to_string(i);
      r.predicted_label = static_cast<int>(label_rng.below(classes));
      const bool failed = coin[i] < sigmoid(intercept + config.link_slope * latent[i]);
      r.true_label = failed ? static_cast<int>((r.predicted_label + 1 + label_rng.below(classes - 1)) %
                                               classes)
                            : r.predicted_label;
      r.aux = {1.0 - chi[i]};
    }
  } else {
    std::vector<double> delta(n);
    double mean_sq = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      delta[i] = std::exp(config.offset_scale * latent[i]);
      mean_sq += delta[i] * delta[i];
    }
    mean_sq /= static_cast<double>(n);
    const double scale = std::sqrt((1.0 - config.target_accuracy) / mean_sq);
    for (std::size_t i = 0; i < n; ++i) {
      auto& r = records[i];
      r.id = i;
      r.external_id = std::to_string(i);
      r.predicted_value = 10.0 * label_rng.normal();
      const double sign = label_rng.uniform() < 0.5 ? -1.0 : 1.0;
      r.true_value = r.predicted_value + sign * scale * delta[i];
      r.aux = {chi[i]};
    }
  }
  return Population(config.task, std::move(records), std::move(aux_names));
}

// ---------------------------------------------------------------------------

LabelingOracle::LabelingOracle(const Population& population)
    : population_(&population), labeled_(population.size(), 0) {}

double LabelingOracle::reveal(std::size_t id) {
  if (id >= population_->size()) {
    fail("invalid_argument", "reveal: id " + std::to_string(id) + " out of range");
  }
  if (!labeled_[id]) {
    labeled_[id] = 1;
    order_.push_back(id);
  }
  const auto& r = (*population_)[id];
  if (population_->task() == Task::kClassification) return is_misprediction(r) ? 1.0 : 0.0;
  return offset(r);
}

}  // namespace opsample
