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

#include "opsample/cli.hpp"

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <memory>
#include <numeric>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "opsample/auxvar.hpp"
#include "opsample/csv.hpp"
#include "opsample/error.hpp"
#include "opsample/harness.hpp"
#include "opsample/population.hpp"
#include "opsample/techniques.hpp"

namespace opsample {

namespace {

namespace fs = std::filesystem;
using json = nlohmann::json;

fs::path default_output_dir() {
  const char* env = std::getenv(kOutputDirEnv);
  return env != nullptr && *env != '\0' ? fs::path(env) : fs::path(".");
}

json read_json(const fs::path& path) {
  const std::string text = csv::read_file(path);
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    fail("parse", path.string() + ": " + e.what());
  }
}

void write_output(const fs::path& path, std::string_view content) {
  if (path.has_parent_path()) {
    std::error_code ec;
    fs::create_directories(path.parent_path(), ec);
    if (ec) fail("io", "cannot create directory " + path.parent_path().string());
  }
  csv::write_file(path, content);
}

std::string dashed(std::string key) {
  for (char& c : key) {
    if (c == '_') c = '-';
  }
  return key;
}

// Flags named after config keys; only flags actually given are collected,
// so they can be layered over a config file.
class Overrides {
 public:
  template <typename T>
  CLI::Option* add(CLI::App* app, const std::string& key, const std::string& help,
                   const std::string& extra_names = "") {
    auto value = std::make_shared<T>();
    std::string names = "--" + dashed(key);
    if (!extra_names.empty()) names += "," + extra_names;
    CLI::Option* opt = app->add_option(names, *value, help);
    if constexpr (requires { typename T::value_type; } && !std::is_same_v<T, std::string>) {
      opt->delimiter(',');
    }
    entries_.push_back([opt, value, key](json& j) {
      if (opt->count() > 0) j[key] = *value;
    });
    return opt;
  }

  CLI::Option* add_flag(CLI::App* app, const std::string& key, const std::string& help) {
    CLI::Option* opt = app->add_flag("--" + dashed(key), help);
    entries_.push_back([opt, key](json& j) {
      if (opt->count() > 0) j[key] = true;
    });
    return opt;
  }

  json collect() const {
    json j = json::object();
    for (const auto& e : entries_) e(j);
    return j;
  }

 private:
  std::vector<std::function<void(json&)>> entries_;
};

void add_knob_flags(CLI::App* app, Overrides& o) {
  o.add<double>(app, "deepest_r", "DeepEST probability of a weight-based step");
  o.add<double>(app, "deepest_threshold_quantile", "DeepEST weight threshold as a quantile of chi");
  o.add<std::string>(app, "deepest_weighting", "literal | transposed");
  o.add_flag(app, "deepest_literal_regression", "Use the published squared-offset step estimator");
  o.add<std::size_t>(app, "ces_initial", "CES initial sample size");
  o.add<std::size_t>(app, "ces_group", "CES group size");
  o.add<std::size_t>(app, "ces_candidates", "CES candidate groups per step");
  o.add<std::size_t>(app, "ces_bins", "CES bins per dimension");
  o.add<std::size_t>(app, "partitions", "Partition count for ssrs, gbs and twoups", "--k");
  o.add<std::uint64_t>(app, "kmeans_seed", "Seed of the k-means initialisation");
  o.add<std::size_t>(app, "ssrs_min_per_partition", "Units reserved per stratum before Neyman allocation");
  o.add<double>(app, "gbs_variance_floor", "Lower bound of GBS partition variances");
  o.add<double>(app, "pps_floor_fraction", "Floor of chi relative to its maximum");
}

json layered(const std::string& config_path, const json& flags) {
  json j = config_path.empty() ? json::object() : read_json(config_path);
  if (!j.is_object()) fail("parse", "configuration must be a JSON object");
  for (const auto& [k, v] : flags.items()) {
    if (v.is_object() && j.contains(k) && j[k].is_object()) {
      for (const auto& [k2, v2] : v.items()) j[k][k2] = v2;
    } else {
      j[k] = v;
    }
  }
  return j;
}

fs::path output_dir(const std::string& flag) {
  return flag.empty() ? default_output_dir() : fs::path(flag);
}

void print(std::ostream& out, const json& j) { out << j.dump(2) << '\n'; }

// --- gen ---------------------------------------------------------------------

struct GenArgs {
  Overrides flags;
  std::string config;
  std::string out;
  std::string out_dir;
};

int cmd_gen(GenArgs& a, std::ostream& out) {
  json j = layered(a.config, a.flags.collect());
  const SyntheticConfig config = synthetic_config_from_json(j);
  validate(config);
  const std::uint64_t seed = j.value("seed", std::uint64_t{0});
  const Population pop = generate_synthetic(config, seed);
  const fs::path csv_path = a.out.empty() ? output_dir(a.out_dir) / "population.csv" : fs::path(a.out);
  fs::path manifest_path = csv_path;
  manifest_path.replace_extension(".manifest.json");

  if (csv_path.has_parent_path()) fs::create_directories(csv_path.parent_path());
  write_population_csv(pop, csv_path);
  const TrueAccuracy truth = true_accuracy(pop);
  json manifest = {
      {"synthetic", to_json(config)},
      {"seed", seed},
      {"rows", pop.size()},
      {"task", task_name(pop.task())},
      {"aux", synthetic_aux_name(pop.task())},
      {"realized_xi", truth.xi},
      {"realized_error", truth.error},
      {"population", csv_path.string()},
  };
  write_output(manifest_path, manifest.dump(2) + "\n");
  manifest["manifest"] = manifest_path.string();
  print(out, manifest);
  return 0;
}

// --- run ---------------------------------------------------------------------

struct RunArgs {
  Overrides flags;
  std::string config;
  std::string out;
  std::string out_dir;
  std::string trace_csv;
  bool trace = false;
};

int cmd_run(RunArgs& a, std::ostream& out) {
  const json j = layered(a.config, a.flags.collect());
  if (!j.contains("population")) fail("invalid_argument", "--population is required");
  const std::string population_path = j["population"].get<std::string>();
  const std::uint64_t seed = j.value("seed", std::uint64_t{0});
  TechniqueConfig config = technique_config_from_json(j);
  config.keep_trace = true;
  validate(config);

  const Population pop = load_population(population_path);
  const SamplingFrame frame = prepare_frame(pop, config);
  LabelingOracle oracle(pop);
  RandomStream rng(seed);
  const TechniqueResult result = run_technique(frame, oracle, config, rng);

  const fs::path path = a.out.empty() ? output_dir(a.out_dir) / "result.json" : fs::path(a.out);
  json doc = {{"population", population_path},
              {"seed", seed},
              {"config", to_json(config)},
              {"result", to_json(result, a.trace)}};
  write_output(path, doc.dump(2) + "\n");
  if (!a.trace_csv.empty()) write_output(a.trace_csv, trace_to_csv(result.trace));

  json summary = {{"technique", technique_name(result.technique)},
                  {"aux", result.aux},
                  {"budget", result.budget},
                  {"xi_hat", result.xi_hat},
                  {"distinct_labeled", result.distinct_labeled},
                  {"failures", result.failures},
                  {"flags", result.flags},
                  {"output", path.string()}};
  if (!result.allocation.empty()) {
    summary["allocation"] = result.allocation;
    summary["allocation_total"] =
        std::accumulate(result.allocation.begin(), result.allocation.end(), std::size_t{0});
  }
  print(out, summary);
  return 0;
}

// --- eval --------------------------------------------------------------------

struct EvalArgs {
  Overrides flags;
  Overrides knob_flags;
  std::string config;
  std::string manifest;
  std::string out_dir;
};

int cmd_eval(EvalArgs& a, std::ostream& out) {
  if (!a.config.empty() && !a.manifest.empty()) {
    fail("invalid_argument", "--config and --manifest are mutually exclusive");
  }
  json base = json::object();
  if (!a.config.empty()) base = read_json(a.config);
  if (!a.manifest.empty()) {
    const json m = read_json(a.manifest);
    if (!m.contains("config")) fail("parse", "manifest has no 'config' entry");
    base = m["config"];
  }
  json flags = a.flags.collect();
  const json knobs = a.knob_flags.collect();
  if (!knobs.empty()) flags["knobs"] = knobs;
  for (const auto& [k, v] : flags.items()) {
    if (k == "knobs" && base.contains("knobs")) {
      for (const auto& [k2, v2] : v.items()) base["knobs"][k2] = v2;
    } else {
      base[k] = v;
    }
  }
  if (flags.contains("population")) base.erase("synthetic");
  const EvalConfig config = eval_config_from_json(base);
  validate(config);

  const Population pop = resolve_population(config);
  const EvalReport report = run_experiment(config, pop);
  const fs::path dir = output_dir(a.out_dir);
  write_output(dir / "summary.csv", summary_csv(report));
  write_output(dir / "raw.csv", raw_csv(report));
  write_output(dir / "rmse_curve.csv", rmse_curve_csv(report));
  if (report.task == Task::kRegression) {
    write_output(dir / "offset_hist.csv", offset_histogram_csv(report));
  }
  write_output(dir / "manifest.json", manifest(report).dump(2) + "\n");

  std::size_t skipped = 0;
  for (const auto& c : report.cells) skipped += c.status == "ok" ? 0 : 1;
  print(out, {{"cells", report.cells.size()},
              {"skipped", skipped},
              {"runs", report.rows.size()},
              {"true_xi", report.truth.xi},
              {"output_dir", dir.string()}});
  return 0;
}

// --- oracle ------------------------------------------------------------------

struct OracleArgs {
  Overrides flags;
  std::string config;
};

int cmd_oracle(OracleArgs& a, std::ostream& out) {
  const json j = layered(a.config, a.flags.collect());
  if (!j.contains("population")) fail("invalid_argument", "--population is required");
  const TechniqueConfig config = technique_config_from_json(j);
  const Population pop = load_population(j["population"].get<std::string>());
  const Enumeration e = enumerate_expectation(pop, config);
  double truth = 0.0;
  for (std::size_t i = 0; i < pop.size(); ++i) truth += target_value(pop.task(), pop[i]);
  truth /= static_cast<double>(pop.size());
  print(out, {{"technique", technique_name(config.technique)},
              {"budget", config.budget},
              {"expectation", e.expectation},
              {"truth", truth},
              {"gap", std::abs(e.expectation - truth)},
              {"probability_mass", e.probability_mass},
              {"paths", e.paths}});
  return 0;
}

// --- report ------------------------------------------------------------------

struct ReportArgs {
  std::string raw;
  std::string manifest;
  std::string out_dir;
};

int cmd_report(ReportArgs& a, std::ostream& out) {
  const json m = read_json(a.manifest);
  for (const char* key : {"config", "task", "true_xi"}) {
    if (!m.contains(key)) fail("parse", std::string("manifest has no '") + key + "' entry");
  }
  EvalReport report;
  report.config = eval_config_from_json(m["config"]);
  report.task = parse_task(m["task"].get<std::string>());
  report.truth.xi = m["true_xi"].get<double>();
  report.rows = parse_raw_csv(csv::read_file(a.raw));
  std::vector<CellSummary> skipped;
  for (const auto& s : m.value("skipped", json::array())) {
    CellSummary c;
    c.technique = s.at("technique").get<std::string>();
    c.aux = s.at("aux").get<std::string>();
    c.budget = s.at("budget").get<std::size_t>();
    c.status = s.at("status").get<std::string>();
    c.true_xi = report.truth.xi;
    skipped.push_back(std::move(c));
  }
  report.cells = summarize(report.config, report.task, report.truth.xi, report.rows, skipped);

  const fs::path dir = output_dir(a.out_dir);
  write_output(dir / "summary.csv", summary_csv(report));
  json sens = json::array();
  std::string sens_csv = "technique,aux,min_rmse_budget,inversion\n";
  for (const auto& s : sensitivity_summary(report)) {
    sens.push_back({{"technique", s.technique},
                    {"aux", s.aux},
                    {"min_rmse_budget", s.min_rmse_budget},
                    {"inversion", s.inversion}});
    sens_csv += s.technique + "," + s.aux + "," + std::to_string(s.min_rmse_budget) + "," +
                (s.inversion ? "1" : "0") + "\n";
  }
  write_output(dir / "sensitivity.csv", sens_csv);
  print(out, {{"sensitivity", sens}, {"output_dir", dir.string()}});
  return 0;
}

// --- aux ---------------------------------------------------------------------

struct AuxArgs {
  std::string kind;
  std::string traces;
  std::string population;
  std::string name;
  std::string out;
  LsaOptions lsa;
  bool no_leave_one_out = false;
};

int cmd_aux(AuxArgs& a, std::ostream& out) {
  const fs::path traces_path(a.traces);
  const ActivationTraces traces = traces_path.extension() == ".bin"
                                      ? load_traces_binary(traces_path)
                                      : load_traces_csv(traces_path);
  a.lsa.leave_one_out = !a.no_leave_one_out;
  const ChiVector chi = a.kind == "dsa" ? compute_dsa(traces) : compute_lsa(traces, a.lsa);
  const std::string column = a.name.empty() ? a.kind : a.name;

  if (a.population.empty()) {
    std::string text = "id," + column + "\n";
    for (std::size_t i = 0; i < chi.size(); ++i) {
      text += std::to_string(i) + "," + csv::format_real(chi.values[i]) + "\n";
    }
    write_output(a.out, text);
  } else {
    const Population pop = load_population(a.population);
    require(pop.size() == chi.size(), "trace rows do not match population size");
    require(!pop.has_aux(column), "population already has a column named '" + column + "'");
    std::vector<PopulationRecord> records(pop.records().begin(), pop.records().end());
    for (std::size_t i = 0; i < records.size(); ++i) records[i].aux.push_back(chi.values[i]);
    std::vector<std::string> names = pop.aux_names();
    names.push_back(column);
    write_population_csv(Population(pop.task(), std::move(records), names, pop.label_names()),
                         a.out);
  }
  print(out, {{"kind", a.kind}, {"column", column}, {"rows", chi.size()},
              {"warnings", chi.warnings}, {"output", a.out}});
  return 0;
}

void print_error(std::ostream& err, const std::string& code, const std::string& message) {
  err << json{{"error", {{"code", code}, {"message", message}}}}.dump() << '\n';
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Sampling-based estimation of operational accuracy", "opsample"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "opsample 0.1.0");

  GenArgs gen;
  CLI::App* g = app.add_subcommand("gen", "Generate a synthetic population");
  g->add_option("--config", gen.config, "JSON file with synthetic keys");
  gen.flags.add<std::string>(g, "task", "classification | regression");
  gen.flags.add<std::size_t>(g, "size", "Population size", "--n");
  gen.flags.add<double>(g, "accuracy", "Target operational accuracy");
  gen.flags.add<double>(g, "rho", "Correlation between chi and the failure propensity");
  gen.flags.add<double>(g, "link_slope", "Slope of the failure link (classification)");
  gen.flags.add<double>(g, "chi_skew", "Exponential skew of chi; 0 keeps it Gaussian");
  gen.flags.add<double>(g, "offset_scale", "Log-scale spread of offsets (regression)");
  gen.flags.add<int>(g, "classes", "Number of labels (classification)");
  gen.flags.add<std::uint64_t>(g, "seed", "Generator seed");
  g->add_option("--out", gen.out, "Population CSV path");
  g->add_option("--out-dir", gen.out_dir, "Output directory when --out is absent");

  RunArgs run;
  CLI::App* r = app.add_subcommand("run", "Run one technique once");
  r->add_option("--config", run.config, "JSON file with technique keys");
  run.flags.add<std::string>(r, "population", "Population CSV or JSON");
  run.flags.add<std::string>(r, "technique", "srs | sups | rhcs | ces | deepest | ssrs | gbs | twoups");
  run.flags.add<std::string>(r, "aux", "Auxiliary variable column");
  run.flags.add<std::size_t>(r, "budget", "Number of draws");
  run.flags.add<std::uint64_t>(r, "seed", "Run seed");
  run.flags.add<double>(r, "failure_threshold", "Regression offset counted as a failure");
  add_knob_flags(r, run.flags);
  r->add_flag("--trace", run.trace, "Include the draw trace in the JSON result");
  r->add_option("--trace-csv", run.trace_csv, "Also write the draw trace as CSV");
  r->add_option("--out", run.out, "Result JSON path");
  r->add_option("--out-dir", run.out_dir, "Output directory when --out is absent");

  EvalArgs eval;
  CLI::App* e = app.add_subcommand("eval", "Run an experiment grid");
  e->add_option("--config", eval.config, "JSON evaluation configuration");
  e->add_option("--manifest", eval.manifest, "Rerun the configuration recorded in a manifest");
  eval.flags.add<std::string>(e, "population", "Population CSV or JSON");
  eval.flags.add<std::vector<std::string>>(e, "techniques", "Comma-separated technique list");
  eval.flags.add<std::vector<std::string>>(e, "aux", "Comma-separated auxiliary variables");
  eval.flags.add<std::vector<std::size_t>>(e, "budgets", "Comma-separated ascending budgets");
  eval.flags.add<std::size_t>(e, "reps", "Repetitions per cell");
  eval.flags.add<std::uint64_t>(e, "seed", "Master seed");
  eval.flags.add<std::vector<double>>(e, "offset_thresholds", "Comma-separated offset thresholds");
  eval.flags.add<double>(e, "failure_threshold", "Regression offset counted as a failure");
  eval.flags.add<std::size_t>(e, "jobs", "Worker threads");
  add_knob_flags(e, eval.knob_flags);
  e->add_option("--out-dir", eval.out_dir, "Output directory");

  OracleArgs oracle;
  CLI::App* o = app.add_subcommand("oracle", "Exact expectation of an estimator on a tiny population");
  o->add_option("--config", oracle.config, "JSON file with technique keys");
  oracle.flags.add<std::string>(o, "population", "Population CSV or JSON");
  oracle.flags.add<std::string>(o, "technique", "srs | sups | rhcs | ssrs | twoups | deepest");
  oracle.flags.add<std::string>(o, "aux", "Auxiliary variable column");
  oracle.flags.add<std::size_t>(o, "budget", "Number of draws");
  add_knob_flags(o, oracle.flags);

  ReportArgs report;
  CLI::App* p = app.add_subcommand("report", "Recompute summary and sensitivity from raw rows");
  p->add_option("--raw", report.raw, "Raw CSV written by eval")->required();
  p->add_option("--manifest", report.manifest, "Manifest written by eval")->required();
  p->add_option("--out-dir", report.out_dir, "Output directory");

  AuxArgs aux;
  CLI::App* x = app.add_subcommand("aux", "Compute surprise adequacy from activation traces");
  x->add_option("--kind", aux.kind, "dsa | lsa")->required()->check(CLI::IsMember({"dsa", "lsa"}));
  x->add_option("--traces", aux.traces, "Trace CSV, or .bin container")->required();
  x->add_option("--population", aux.population, "Append the scores to this population");
  x->add_option("--name", aux.name, "Column name (defaults to the kind)");
  x->add_option("--out", aux.out, "Output CSV")->required();
  x->add_option("--variance-floor", aux.lsa.variance_floor, "LSA: drop dimensions below this variance");
  x->add_option("--bandwidth-scale", aux.lsa.bandwidth_scale, "LSA: bandwidth multiplier");
  x->add_flag("--no-leave-one-out", aux.no_leave_one_out, "LSA: keep each row in its own density");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& ex) {
    return app.exit(ex, out, err);
  } catch (const CLI::CallForAllHelp& ex) {
    return app.exit(ex, out, err);
  } catch (const CLI::CallForVersion& ex) {
    return app.exit(ex, out, err);
  } catch (const CLI::ParseError& ex) {
    print_error(err, "usage", ex.what());
    return 2;
  }

  try {
    if (g->parsed()) return cmd_gen(gen, out);
    if (r->parsed()) return cmd_run(run, out);
    if (e->parsed()) return cmd_eval(eval, out);
    if (o->parsed()) return cmd_oracle(oracle, out);
    if (p->parsed()) return cmd_report(report, out);
    if (x->parsed()) return cmd_aux(aux, out);
  } catch (const Error& ex) {
    print_error(err, ex.code(), ex.what());
    return 1;
  } catch (const std::exception& ex) {
    print_error(err, "internal", ex.what());
    return 1;
  }
  return 1;
}

}  // namespace opsample
