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

#include "opsample/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <map>
#include <numeric>
#include <sstream>
#include <thread>

#include "opsample/auxvar.hpp"
#include "opsample/csv.hpp"
#include "opsample/error.hpp"
#include "opsample/random.hpp"

namespace opsample {

double rmse(std::span<const double> estimates, double true_xi) {
  require(!estimates.empty(), "RMSE of an empty estimate set");
  double sum = 0.0;
  for (double e : estimates) sum += (true_xi - e) * (true_xi - e);
  return std::sqrt(sum / static_cast<double>(estimates.size()));
}

double rmedse(std::span<const double> estimates, double true_xi) {
  require(!estimates.empty(), "RMedSE of an empty estimate set");
  std::vector<double> sq;
  sq.reserve(estimates.size());
  for (double e : estimates) sq.push_back((true_xi - e) * (true_xi - e));
  std::sort(sq.begin(), sq.end());
  const std::size_t m = sq.size() / 2;
  const double median = sq.size() % 2 == 1 ? sq[m] : 0.5 * (sq[m - 1] + sq[m]);
  return std::sqrt(median);
}

std::vector<std::size_t> offset_histogram(std::span<const double> offsets,
                                          std::span<const double> thresholds) {
  require(std::is_sorted(thresholds.begin(), thresholds.end()),
          "offset thresholds must be ascending");
  std::vector<std::size_t> counts(thresholds.size(), 0);
  for (std::size_t t = 0; t < thresholds.size(); ++t) {
    for (double d : offsets) {
      if (d >= thresholds[t]) ++counts[t];
    }
  }
  return counts;
}

namespace {

double kolmogorov_survival(double lambda) {
  if (lambda < 0.2) return 1.0;
  double sum = 0.0;
  for (int j = 1; j <= 100; ++j) {
    const double term = std::exp(-2.0 * j * j * lambda * lambda);
    sum += (j % 2 == 1 ? term : -term);
    if (term < 1e-16) break;
  }
  return std::clamp(2.0 * sum, 0.0, 1.0);
}

}  // namespace

KsResult ks_two_sample(std::span<const double> a, std::span<const double> b,
                       double tie_tolerance) {
  require(!a.empty() && !b.empty(), "KS test needs two nonempty samples");
  std::vector<double> x(a.begin(), a.end()), y(b.begin(), b.end());
  std::sort(x.begin(), x.end());
  std::sort(y.begin(), y.end());
  const double nx = static_cast<double>(x.size());
  const double ny = static_cast<double>(y.size());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < x.size() || j < y.size()) {
    double v;
    if (i == x.size()) {
      v = y[j];
    } else if (j == y.size()) {
      v = x[i];
    } else {
      v = std::min(x[i], y[j]);
    }
    const double upper = v + tie_tolerance * std::max(1.0, std::abs(v));
    while (i < x.size() && x[i] <= upper) ++i;
    while (j < y.size() && y[j] <= upper) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / nx - static_cast<double>(j) / ny));
  }
  const double en = std::sqrt(nx * ny / (nx + ny));
  return {d, kolmogorov_survival((en + 0.12 + 0.11 / en) * d)};
}

// ---------------------------------------------------------------------------

void validate(const EvalConfig& c) {
  require(c.repetitions >= 1, "repetitions must be at least 1");
  require(!c.budgets.empty(), "at least one budget is required");
  require(std::is_sorted(c.budgets.begin(), c.budgets.end()), "budgets must be sorted ascending");
  require(std::adjacent_find(c.budgets.begin(), c.budgets.end()) == c.budgets.end(),
          "budgets must be distinct");
  require(std::is_sorted(c.offset_thresholds.begin(), c.offset_thresholds.end()),
          "offset thresholds must be sorted ascending");
  require(!c.techniques.empty(), "at least one technique is required");
  require(c.jobs >= 1, "jobs must be at least 1");
  for (std::size_t b : c.budgets) require(b >= 1, "budgets must be positive");
}

nlohmann::json to_json(const SyntheticConfig& s) {
  return {{"task", task_name(s.task)},          {"size", s.size},
          {"accuracy", s.target_accuracy},      {"rho", s.chi_correlation},
          {"link_slope", s.link_slope},         {"chi_skew", s.chi_skew},
          {"offset_scale", s.offset_scale},     {"classes", s.classes}};
}

SyntheticConfig synthetic_config_from_json(const nlohmann::json& j, SyntheticConfig s) {
  try {
    if (j.contains("task")) s.task = parse_task(j["task"].get<std::string>());
    if (j.contains("size")) s.size = j["size"].get<std::size_t>();
    if (j.contains("accuracy")) s.target_accuracy = j["accuracy"].get<double>();
    if (j.contains("rho")) s.chi_correlation = j["rho"].get<double>();
    if (j.contains("link_slope")) s.link_slope = j["link_slope"].get<double>();
    if (j.contains("chi_skew")) s.chi_skew = j["chi_skew"].get<double>();
    if (j.contains("offset_scale")) s.offset_scale = j["offset_scale"].get<double>();
    if (j.contains("classes")) s.classes = j["classes"].get<int>();
  } catch (const nlohmann::json::exception& e) {
    fail("invalid_argument", std::string("bad synthetic configuration: ") + e.what());
  }
  return s;
}

nlohmann::json to_json(const EvalConfig& c) {
  nlohmann::json techniques = nlohmann::json::array();
  for (auto t : c.techniques) techniques.push_back(technique_name(t));
  nlohmann::json knobs = to_json(c.knobs);
  knobs.erase("technique");
  knobs.erase("aux");
  knobs.erase("budget");
  knobs.erase("failure_threshold");
  nlohmann::json j = {
      {"population", c.population},
      {"techniques", techniques},
      {"aux", c.aux},
      {"budgets", c.budgets},
      {"reps", c.repetitions},
      {"seed", c.seed},
      {"offset_thresholds", c.offset_thresholds},
      {"failure_threshold", c.failure_threshold},
      {"knobs", knobs},
      {"jobs", c.jobs},
  };
  if (c.synthetic) {
    j["synthetic"] = to_json(*c.synthetic);
    j["synthetic_seed"] = c.synthetic_seed;
  }
  return j;
}

EvalConfig eval_config_from_json(const nlohmann::json& j, EvalConfig c) {
  try {
    if (j.contains("population")) c.population = j["population"].get<std::string>();
    if (j.contains("synthetic")) {
      c.synthetic = synthetic_config_from_json(j["synthetic"], c.synthetic.value_or(SyntheticConfig{}));
    }
    if (j.contains("synthetic_seed")) c.synthetic_seed = j["synthetic_seed"].get<std::uint64_t>();
    if (j.contains("techniques")) {
      c.techniques.clear();
      for (const auto& t : j["techniques"]) c.techniques.push_back(parse_technique(t.get<std::string>()));
    }
    if (j.contains("aux")) c.aux = j["aux"].get<std::vector<std::string>>();
    if (j.contains("budgets")) c.budgets = j["budgets"].get<std::vector<std::size_t>>();
    if (j.contains("reps")) c.repetitions = j["reps"].get<std::size_t>();
    if (j.contains("seed")) c.seed = j["seed"].get<std::uint64_t>();
    if (j.contains("offset_thresholds")) {
      c.offset_thresholds = j["offset_thresholds"].get<std::vector<double>>();
    }
    if (j.contains("failure_threshold")) c.failure_threshold = j["failure_threshold"].get<double>();
    if (j.contains("knobs")) c.knobs = technique_config_from_json(j["knobs"], c.knobs);
    if (j.contains("jobs")) c.jobs = j["jobs"].get<std::size_t>();
  } catch (const nlohmann::json::exception& e) {
    fail("invalid_argument", std::string("bad evaluation configuration: ") + e.what());
  }
  return c;
}

std::uint64_t cell_seed(std::uint64_t master, std::string_view technique, std::string_view aux,
                        std::size_t budget, std::size_t repetition) {
  std::uint64_t h = hash_combine(mix64(master), hash_string(technique));
  h = hash_combine(h, hash_string(aux));
  h = hash_combine(h, budget);
  return hash_combine(h, repetition);
}

Population resolve_population(const EvalConfig& config) {
  if (config.synthetic) return generate_synthetic(*config.synthetic, config.synthetic_seed);
  require(!config.population.empty(), "a population file or a synthetic configuration is required");
  return load_population(config.population);
}

namespace {

constexpr std::string_view kNoAux = "none";

struct Cell {
  TechniqueId technique;
  std::string aux;  // kNoAux for techniques without one
  std::size_t budget;
};

std::vector<Cell> grid(const EvalConfig& config) {
  std::vector<Cell> cells;
  for (TechniqueId t : config.techniques) {
    const std::vector<std::string> auxes =
        uses_aux(t) ? config.aux : std::vector<std::string>{std::string(kNoAux)};
    for (const auto& a : auxes) {
      for (std::size_t b : config.budgets) cells.push_back({t, a, b});
    }
  }
  return cells;
}

double mean_of(std::span<const double> v) {
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double sample_std(std::span<const double> v) {
  if (v.size() < 2) return 0.0;
  const double m = mean_of(v);
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return std::sqrt(s / static_cast<double>(v.size() - 1));
}

std::string key_of(std::string_view technique, std::string_view aux, std::size_t budget) {
  return std::string(technique) + '\x1f' + std::string(aux) + '\x1f' + std::to_string(budget);
}

}  // namespace

Sensitivity sensitivity(std::span<const std::size_t> budgets, std::span<const double> rmses) {
  require(budgets.size() == rmses.size(), "sensitivity: budgets and RMSEs differ in length");
  if (budgets.size() < 2) fail("invalid_argument", "sensitivity analysis needs at least two budgets");
  Sensitivity s;
  const auto best = std::min_element(rmses.begin(), rmses.end());
  s.min_rmse_budget = budgets[static_cast<std::size_t>(best - rmses.begin())];
  s.inversion = rmses.front() < rmses.back();
  return s;
}

std::vector<CellSummary> summarize(const EvalConfig& config, Task task, double true_xi,
                                   std::span<const RepetitionRow> rows,
                                   std::span<const CellSummary> skipped) {
  std::map<std::string, std::vector<const RepetitionRow*>> by_cell;
  for (const auto& r : rows) by_cell[key_of(r.technique, r.aux, r.budget)].push_back(&r);
  std::map<std::string, const CellSummary*> skipped_by_cell;
  for (const auto& s : skipped) skipped_by_cell[key_of(s.technique, s.aux, s.budget)] = &s;

  std::vector<CellSummary> out;
  for (const Cell& cell : grid(config)) {
    const std::string name(technique_name(cell.technique));
    const std::string key = key_of(name, cell.aux, cell.budget);
    if (auto it = skipped_by_cell.find(key); it != skipped_by_cell.end()) {
      out.push_back(*it->second);
      continue;
    }
    CellSummary s;
    s.technique = name;
    s.aux = cell.aux;
    s.budget = cell.budget;
    s.true_xi = true_xi;
    auto it = by_cell.find(key);
    if (it == by_cell.end() || it->second.empty()) {
      s.status = "skipped: no rows";
      out.push_back(std::move(s));
      continue;
    }
    auto cell_rows = it->second;
    std::sort(cell_rows.begin(), cell_rows.end(),
              [](const RepetitionRow* a, const RepetitionRow* b) { return a->repetition < b->repetition; });
    std::vector<double> xi, failures, distinct;
    std::vector<double> offsets(config.offset_thresholds.size(), 0.0);
    for (const auto* r : cell_rows) {
      xi.push_back(r->xi_hat);
      failures.push_back(static_cast<double>(r->failures));
      distinct.push_back(static_cast<double>(r->distinct_labeled));
      if (task == Task::kRegression) {
        for (std::size_t t = 0; t < offsets.size() && t < r->offset_counts.size(); ++t) {
          offsets[t] += static_cast<double>(r->offset_counts[t]);
        }
      }
    }
    s.repetitions = cell_rows.size();
    s.mean_xi_hat = mean_of(xi);
    s.rmse = rmse(xi, true_xi);
    s.rmedse = rmedse(xi, true_xi);
    s.failures_mean = mean_of(failures);
    s.failures_std = sample_std(failures);
    s.distinct_mean = mean_of(distinct);
    if (task == Task::kRegression) {
      for (double& o : offsets) o /= static_cast<double>(cell_rows.size());
      s.offset_means = std::move(offsets);
    }
    out.push_back(std::move(s));
  }

  // Per (technique, aux) budget curves.
  for (std::size_t i = 0; i < out.size();) {
    std::size_t j = i;
    while (j < out.size() && out[j].technique == out[i].technique && out[j].aux == out[i].aux) ++j;
    bool complete = true;
    std::vector<std::size_t> budgets;
    std::vector<double> rmses;
    for (std::size_t k = i; k < j; ++k) {
      if (out[k].status != "ok") complete = false;
      budgets.push_back(out[k].budget);
      rmses.push_back(out[k].rmse);
    }
    if (complete && j - i >= 2) {
      const Sensitivity sens = sensitivity(budgets, rmses);
      std::optional<double> ratio;
      if (out[i].failures_mean > 0.0) ratio = out[j - 1].failures_mean / out[i].failures_mean;
      for (std::size_t k = i; k < j; ++k) {
        out[k].min_rmse_budget = sens.min_rmse_budget;
        out[k].inversion = sens.inversion;
        out[k].failure_ratio = ratio;
      }
    }
    i = j;
  }
  return out;
}

EvalReport run_experiment(const EvalConfig& config, const Population& population) {
  validate(config);
  EvalReport report;
  report.config = config;
  report.task = population.task();
  report.truth = true_accuracy(population);

  const std::vector<Cell> cells = grid(config);

  // One frame per auxiliary variable; techniques without one share the bare frame.
  std::map<std::string, SamplingFrame> frames;
  std::map<std::string, std::string> frame_errors;
  {
    TechniqueConfig bare = config.knobs;
    bare.aux.clear();
    frames.emplace(std::string(kNoAux), prepare_frame(population, bare));
  }
  for (const auto& a : config.aux) {
    if (frames.count(a) || frame_errors.count(a)) continue;
    try {
      TechniqueConfig k = config.knobs;
      k.aux = a;
      frames.emplace(a, prepare_frame(population, k));
    } catch (const Error& e) {
      frame_errors[a] = e.what();
    }
  }

  struct Task_ {
    std::size_t cell;
    std::size_t repetition;
  };
  std::vector<Task_> tasks;
  std::vector<std::string> cell_error(cells.size());
  for (std::size_t c = 0; c < cells.size(); ++c) {
    if (auto it = frame_errors.find(cells[c].aux); it != frame_errors.end()) {
      cell_error[c] = it->second;
      continue;
    }
    for (std::size_t r = 0; r < config.repetitions; ++r) tasks.push_back({c, r});
  }

  std::vector<std::optional<RepetitionRow>> results(tasks.size());
  std::vector<std::string> task_error(tasks.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t t = next++; t < tasks.size(); t = next++) {
      const Cell& cell = cells[tasks[t].cell];
      const std::string name(technique_name(cell.technique));
      RepetitionRow row;
      row.technique = name;
      row.aux = cell.aux;
      row.budget = cell.budget;
      row.repetition = tasks[t].repetition;
      row.seed = cell_seed(config.seed, name, cell.aux, cell.budget, tasks[t].repetition);
      try {
        TechniqueConfig tc = config.knobs;
        tc.technique = cell.technique;
        tc.aux = uses_aux(cell.technique) ? cell.aux : std::string();
        tc.budget = cell.budget;
        tc.failure_threshold = config.failure_threshold;
        tc.keep_trace = false;
        LabelingOracle oracle(population);
        RandomStream rng(row.seed);
        const TechniqueResult res = run_technique(frames.at(cell.aux), oracle, tc, rng);
        row.estimate = res.estimate;
        row.xi_hat = res.xi_hat;
        row.distinct_labeled = res.distinct_labeled;
        row.failures = res.failures;
        if (population.task() == Task::kRegression) {
          row.offset_counts = offset_histogram(res.offsets, config.offset_thresholds);
        }
        results[t] = std::move(row);
      } catch (const Error& e) {
        task_error[t] = e.what();
      }
    }
  };
  const std::size_t threads = std::min<std::size_t>(config.jobs, std::max<std::size_t>(1, tasks.size()));
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t i = 0; i < threads; ++i) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }

  // A failing repetition skips its whole cell; the first error (by
  // repetition index) is reported so the outcome is order independent.
  for (std::size_t t = 0; t < tasks.size(); ++t) {
    if (!task_error[t].empty() && cell_error[tasks[t].cell].empty()) {
      cell_error[tasks[t].cell] = task_error[t];
    }
  }
  std::vector<CellSummary> skipped;
  for (std::size_t c = 0; c < cells.size(); ++c) {
    if (cell_error[c].empty()) continue;
    CellSummary s;
    s.technique = std::string(technique_name(cells[c].technique));
    s.aux = cells[c].aux;
    s.budget = cells[c].budget;
    s.status = "skipped: " + cell_error[c];
    s.true_xi = report.truth.xi;
    skipped.push_back(std::move(s));
  }
  for (std::size_t t = 0; t < tasks.size(); ++t) {
    if (results[t] && cell_error[tasks[t].cell].empty()) report.rows.push_back(std::move(*results[t]));
  }
  report.cells = summarize(config, report.task, report.truth.xi, report.rows, skipped);
  return report;
}

std::vector<Sensitivity> sensitivity_summary(const EvalReport& report) {
  if (report.config.budgets.size() < 2) {
    fail("invalid_argument", "sensitivity analysis needs at least two budgets");
  }
  std::vector<Sensitivity> out;
  for (const auto& c : report.cells) {
    if (!c.min_rmse_budget) continue;
    if (!out.empty() && out.back().technique == c.technique && out.back().aux == c.aux) continue;
    out.push_back({c.technique, c.aux, *c.min_rmse_budget, *c.inversion});
  }
  return out;
}

// ---------------------------------------------------------------------------
// Output

namespace {

std::string fmt(double v) { return csv::format_real(v); }

std::string threshold_label(double y) {
  std::string s = fmt(y);
  std::replace(s.begin(), s.end(), '.', '_');
  return s;
}

}  // namespace

std::string summary_csv(const EvalReport& report) {
  const auto& budgets = report.config.budgets;
  std::ostringstream out;
  out << "technique,aux,budget,status,reps,true_xi,mean_xi_hat,rmse,rmedse,failures_mean,"
         "failures_std,distinct_mean,f_"
      << budgets.back() << '_' << budgets.front() << ",min_rmse_budget,inversion";
  if (report.task == Task::kRegression) {
    for (double y : report.config.offset_thresholds) out << ",mean_n_ge_" << threshold_label(y);
  }
  out << '\n';
  for (const auto& c : report.cells) {
    out << c.technique << ',' << c.aux << ',' << c.budget << ',' << csv::escape(c.status);
    if (c.status != "ok") {
      out << ",,,,,,,,,,,";
      if (report.task == Task::kRegression) {
        for (std::size_t t = 0; t < report.config.offset_thresholds.size(); ++t) out << ',';
      }
      out << '\n';
      continue;
    }
    out << ',' << c.repetitions << ',' << fmt(c.true_xi) << ',' << fmt(c.mean_xi_hat) << ','
        << fmt(c.rmse) << ',' << fmt(c.rmedse) << ',' << fmt(c.failures_mean) << ','
        << fmt(c.failures_std) << ',' << fmt(c.distinct_mean) << ','
        << (c.failure_ratio ? fmt(*c.failure_ratio) : "") << ','
        << (c.min_rmse_budget ? std::to_string(*c.min_rmse_budget) : "") << ','
        << (c.inversion ? (*c.inversion ? "1" : "0") : "");
    if (report.task == Task::kRegression) {
      for (double m : c.offset_means) out << ',' << fmt(m);
    }
    out << '\n';
  }
  return out.str();
}

std::string raw_csv(const EvalReport& report) {
  std::ostringstream out;
  out << "technique,aux,budget,rep,seed,estimate,xi_hat,distinct_labeled,failures";
  if (report.task == Task::kRegression) {
    for (double y : report.config.offset_thresholds) out << ",n_ge_" << threshold_label(y);
  }
  out << '\n';
  for (const auto& r : report.rows) {
    out << r.technique << ',' << r.aux << ',' << r.budget << ',' << r.repetition << ',' << r.seed
        << ',' << fmt(r.estimate) << ',' << fmt(r.xi_hat) << ',' << r.distinct_labeled << ','
        << r.failures;
    for (std::size_t c : r.offset_counts) out << ',' << c;
    out << '\n';
  }
  return out.str();
}

std::vector<RepetitionRow> parse_raw_csv(std::string_view text) {
  const csv::Table table = csv::parse(text);
  const std::vector<std::string> required = {"technique", "aux",    "budget",
                                             "rep",       "seed",   "estimate",
                                             "xi_hat",    "distinct_labeled", "failures"};
  std::vector<std::size_t> col;
  for (const auto& name : required) {
    const auto c = table.column(name);
    if (!c) fail("parse", "raw CSV is missing column '" + name + "'");
    col.push_back(*c);
  }
  std::vector<std::size_t> offset_cols;
  for (std::size_t c = 0; c < table.header.size(); ++c) {
    if (table.header[c].rfind("n_ge_", 0) == 0) offset_cols.push_back(c);
  }
  auto integer = [](const std::string& f) {
    const auto v = csv::to_integer(f);
    if (!v || *v < 0) fail("parse", "invalid integer '" + f + "' in raw CSV");
    return static_cast<std::size_t>(*v);
  };
  auto real = [](const std::string& f) {
    const auto v = csv::to_double(f);
    if (!v) fail("parse", "invalid number '" + f + "' in raw CSV");
    return *v;
  };
  std::vector<RepetitionRow> rows;
  for (const auto& f : table.rows) {
    RepetitionRow r;
    r.technique = f[col[0]];
    r.aux = f[col[1]];
    r.budget = integer(f[col[2]]);
    r.repetition = integer(f[col[3]]);
    try {
      r.seed = std::stoull(f[col[4]]);
    } catch (const std::exception&) {
      fail("parse", "invalid seed '" + f[col[4]] + "' in raw CSV");
    }
    r.estimate = real(f[col[5]]);
    r.xi_hat = real(f[col[6]]);
    r.distinct_labeled = integer(f[col[7]]);
    r.failures = integer(f[col[8]]);
    for (std::size_t c : offset_cols) r.offset_counts.push_back(integer(f[c]));
    rows.push_back(std::move(r));
  }
  return rows;
}

std::string rmse_curve_csv(const EvalReport& report) {
  std::ostringstream out;
  out << "technique,aux,budget,rmse,rmedse,failures_mean\n";
  for (const auto& c : report.cells) {
    if (c.status != "ok") continue;
    out << c.technique << ',' << c.aux << ',' << c.budget << ',' << fmt(c.rmse) << ','
        << fmt(c.rmedse) << ',' << fmt(c.failures_mean) << '\n';
  }
  return out.str();
}

std::string offset_histogram_csv(const EvalReport& report) {
  std::ostringstream out;
  out << "technique,aux,budget,threshold,mean_count\n";
  for (const auto& c : report.cells) {
    if (c.status != "ok") continue;
    for (std::size_t t = 0; t < c.offset_means.size(); ++t) {
      out << c.technique << ',' << c.aux << ',' << c.budget << ','
          << fmt(report.config.offset_thresholds[t]) << ',' << fmt(c.offset_means[t]) << '\n';
    }
  }
  return out.str();
}

nlohmann::json manifest(const EvalReport& report) {
  nlohmann::json skipped = nlohmann::json::array();
  for (const auto& c : report.cells) {
    if (c.status == "ok") continue;
    skipped.push_back({{"technique", c.technique}, {"aux", c.aux}, {"budget", c.budget},
                       {"status", c.status}});
  }
  nlohmann::json knobs = to_json(report.config.knobs);
  return {
      {"config", to_json(report.config)},
      {"task", task_name(report.task)},
      {"true_xi", report.truth.xi},
      {"true_error", report.truth.error},
      {"unnormalized_offsets", report.truth.unnormalized_offsets},
      {"seed_derivation", "hash(master seed, technique, aux, budget, repetition)"},
      {"rows", report.rows.size()},
      {"skipped", skipped},
  };
}

}  // namespace opsample
