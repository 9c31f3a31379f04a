#pragma once

// Experiment orchestration: reference solves, oracle aggregation, the
// classifier + clustering sweep, and report files.

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <ostream>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "etsa/acs.hpp"
#include "etsa/clustering.hpp"
#include "etsa/data.hpp"
#include "etsa/ml.hpp"
#include "etsa/model.hpp"
#include "etsa/tsa.hpp"
#include "etsa/work.hpp"

namespace etsa {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct CasePreset {
  CaseConfig config;
  VreProfile profile = VreProfile::Solar;
};

/// The four reference cases: BESS or PHS storage with solar or wind.
inline CasePreset case_preset(const std::string& name) {
  CasePreset p;
  CaseConfig& c = p.config;
  c.thermal_capacity = 480.0;
  c.thermal_cost = 60.0;
  c.vre_capacity = 1000.0;
  c.storage_emin = 0.0;
  c.storage_pc_max = 100.0;
  c.storage_pd_max = 100.0;
  c.nse_cost = 5000.0;
  const auto dash = name.find('-');
  const std::string storage = name.substr(0, dash);
  const std::string vre = dash == std::string::npos ? "" : name.substr(dash + 1);
  if (storage == "bess") {
    c.storage_emax = 400.0;
    c.eta_c = c.eta_d = 0.92;
    c.discharge_cost = 1.5;
  } else if (storage == "phs") {
    c.storage_emax = 1600.0;
    c.eta_c = c.eta_d = 0.9;
    c.discharge_cost = 0.5;
  } else {
    throw ConfigError("unknown case '" + name + "' (expected bess-solar, bess-wind, phs-solar or phs-wind)");
  }
  if (vre == "solar") {
    c.vre_cost = 1.0;
    p.profile = VreProfile::Solar;
  } else if (vre == "wind") {
    c.vre_cost = 2.5;
    p.profile = VreProfile::Wind;
  } else {
    throw ConfigError("unknown case '" + name + "' (expected bess-solar, bess-wind, phs-solar or phs-wind)");
  }
  return p;
}

enum class Mode { Full, Oracle, Ml };

inline const char* to_string(Mode m) {
  switch (m) {
    case Mode::Full: return "full";
    case Mode::Oracle: return "oracle";
    case Mode::Ml: return "ml";
  }
  return "?";
}

inline Mode parse_mode(const std::string& s) {
  if (s == "full") return Mode::Full;
  if (s == "oracle") return Mode::Oracle;
  if (s == "ml") return Mode::Ml;
  throw ConfigError("unknown mode '" + s + "' (expected full, oracle or ml)");
}

inline SignatureMode parse_signature(const std::string& s) {
  if (s == "full") return SignatureMode::Full;
  if (s == "reduced") return SignatureMode::Reduced;
  throw ConfigError("unknown signature '" + s + "' (expected full or reduced)");
}

inline const char* signature_name(SignatureMode m) { return m == SignatureMode::Full ? "full" : "reduced"; }

inline CutRule parse_cut_rule(const std::string& s) {
  if (s == "two-empty") return CutRule::TwoEmpty;
  if (s == "empty-end") return CutRule::EmptyEnd;
  throw ConfigError("unknown cut rule '" + s + "' (expected two-empty or empty-end)");
}

inline const char* cut_rule_name(CutRule r) { return r == CutRule::TwoEmpty ? "two-empty" : "empty-end"; }

inline ClusterBudget parse_budget(const std::string& s) {
  if (s == "per-submodel") return ClusterBudget::PerSubmodel;
  if (s == "global") return ClusterBudget::Global;
  throw ConfigError("unknown cluster budget '" + s + "' (expected per-submodel or global)");
}

/// Parses "30..100:10", "30..100" (step 10), "5" or comma lists of those.
inline std::vector<std::size_t> parse_sweep(const std::string& text) {
  std::vector<std::size_t> out;
  auto num = [&](const std::string& s) -> std::size_t {
    std::size_t pos = 0;
    unsigned long long v = 0;
    try {
      v = std::stoull(s, &pos);
    } catch (const std::exception&) {
      pos = 0;
    }
    if (pos == 0 || pos != s.size() || v == 0) throw ConfigError("bad cluster count '" + s + "' in '" + text + "'");
    return static_cast<std::size_t>(v);
  };
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto dots = item.find("..");
    if (dots == std::string::npos) {
      out.push_back(num(item));
      continue;
    }
    const auto colon = item.find(':', dots);
    const std::size_t lo = num(item.substr(0, dots));
    const std::size_t hi = num(item.substr(dots + 2, colon == std::string::npos ? std::string::npos : colon - dots - 2));
    const std::size_t step = colon == std::string::npos ? 10 : num(item.substr(colon + 1));
    if (hi < lo) throw ConfigError("empty cluster range '" + item + "'");
    for (std::size_t k = lo; k <= hi; k += step) out.push_back(k);
  }
  if (out.empty()) throw ConfigError("empty cluster sweep");
  return out;
}

struct ExperimentConfig {
  std::string case_name = "bess-solar";
  std::optional<CaseConfig> custom_case;  // required when case_name == "custom"
  VreProfile profile = VreProfile::Solar;  // synthetic profile for custom cases
  Mode mode = Mode::Oracle;
  std::vector<std::size_t> clusters{30, 40, 50, 60, 70, 80, 90, 100};
  ClusterBudget budget = ClusterBudget::PerSubmodel;
  SignatureMode signature = SignatureMode::Full;
  double dual_quantum = 1e-6;
  CutRule cut_rule = CutRule::TwoEmpty;
  std::uint64_t seed = 1;  // classifier
  std::size_t threads = 1;
  // Evaluation series: CSV when `input` is set, otherwise synthetic.
  std::string input;
  std::uint64_t synth_seed = 7;
  std::size_t years = 1;
  std::size_t hours = 0;  // keep only the first `hours` when > 0
  double demand_scale = 1.0;
  // Training series for mode ml.
  std::string train_input;
  std::uint64_t train_seed = 0;  // 0 selects synth_seed + 1
  std::size_t train_years = 3;
  std::size_t train_hours = 0;  // keep only the first `train_hours` when > 0
  std::string model_path;  // reuse a saved classifier instead of training
  ForestGrid grid;
  std::string out = "out";

  CaseConfig case_config() const {
    if (case_name == "custom") {
      if (!custom_case) throw ConfigError("case 'custom' needs a \"case\" object in the config file");
      return *custom_case;
    }
    return case_preset(case_name).config;
  }
  VreProfile vre_profile() const { return case_name == "custom" ? profile : case_preset(case_name).profile; }
  std::uint64_t effective_train_seed() const { return train_seed ? train_seed : synth_seed + 1; }

  void validate() const {
    case_config().validate();
    if (threads == 0) throw ConfigError("threads must be >= 1");
    if (years == 0 || train_years == 0) throw ConfigError("years must be >= 1");
    if (!(demand_scale > 0.0)) throw ConfigError("demand_scale must be > 0");
    if (!(dual_quantum > 0.0)) throw ConfigError("dual_quantum must be > 0");
    for (std::size_t k : clusters)
      if (k == 0) throw ConfigError("cluster counts must be >= 1");
    if (mode == Mode::Ml && model_path.empty()) {
      const bool same_csv = !input.empty() && input == train_input;
      const bool same_synth = input.empty() && train_input.empty() && effective_train_seed() == synth_seed;
      if (same_csv || same_synth) throw ConfigError("mode ml needs a training series distinct from the test series");
    }
  }
};

inline nlohmann::json case_to_json(const CaseConfig& c) {
  return {{"thermal_capacity", c.thermal_capacity}, {"thermal_cost", c.thermal_cost},
          {"vre_capacity", c.vre_capacity},         {"vre_cost", c.vre_cost},
          {"storage_emin", c.storage_emin},         {"storage_emax", c.storage_emax},
          {"storage_pc_max", c.storage_pc_max},     {"storage_pd_max", c.storage_pd_max},
          {"eta_c", c.eta_c},                       {"eta_d", c.eta_d},
          {"discharge_cost", c.discharge_cost},     {"nse_cost", c.nse_cost}};
}

inline CaseConfig case_from_json(const nlohmann::json& j) {
  CaseConfig c;
  const std::set<std::string> known{"thermal_capacity", "thermal_cost", "vre_capacity",   "vre_cost",
                                    "storage_emin",     "storage_emax", "storage_pc_max", "storage_pd_max",
                                    "eta_c",            "eta_d",        "discharge_cost", "nse_cost"};
  for (const auto& [k, v] : j.items()) {
    if (!known.count(k)) throw ConfigError("unknown case key '" + k + "'");
  }
  auto get = [&](const char* k, double& dst) {
    if (!j.contains(k)) throw ConfigError(std::string("case object lacks '") + k + "'");
    dst = j.at(k).get<double>();
  };
  get("thermal_capacity", c.thermal_capacity);
  get("thermal_cost", c.thermal_cost);
  get("vre_capacity", c.vre_capacity);
  get("vre_cost", c.vre_cost);
  get("storage_emin", c.storage_emin);
  get("storage_emax", c.storage_emax);
  get("storage_pc_max", c.storage_pc_max);
  get("storage_pd_max", c.storage_pd_max);
  get("eta_c", c.eta_c);
  get("eta_d", c.eta_d);
  get("discharge_cost", c.discharge_cost);
  get("nse_cost", c.nse_cost);
  return c;
}

/// With `runtime` false the thread count and output directory are left out,
/// so runs that differ only in those write identical files.
inline nlohmann::json config_to_json(const ExperimentConfig& c, bool runtime = true) {
  nlohmann::json j;
  j["case"] = c.case_name;
  if (c.custom_case) j["custom_case"] = case_to_json(*c.custom_case);
  j["profile"] = c.profile == VreProfile::Solar ? "solar" : "wind";
  j["mode"] = to_string(c.mode);
  j["clusters"] = c.clusters;
  j["cluster_budget"] = to_string(c.budget);
  j["signature"] = signature_name(c.signature);
  j["dual_quantum"] = c.dual_quantum;
  j["cut_rule"] = cut_rule_name(c.cut_rule);
  j["seed"] = c.seed;
  if (runtime) j["threads"] = c.threads;
  j["input"] = c.input;
  j["synth_seed"] = c.synth_seed;
  j["years"] = c.years;
  j["hours"] = c.hours;
  j["demand_scale"] = c.demand_scale;
  j["train_input"] = c.train_input;
  j["train_seed"] = c.train_seed;
  j["train_years"] = c.train_years;
  j["train_hours"] = c.train_hours;
  j["model"] = c.model_path;
  nlohmann::json fr = nlohmann::json::array();
  for (auto f : c.grid.fraction) fr.push_back(to_string(f));
  j["grid"] = {{"trees", c.grid.trees}, {"max_depth", c.grid.max_depth}, {"min_leaf", c.grid.min_leaf},
               {"feature_fraction", fr}};
  if (runtime) j["out"] = c.out;
  return j;
}

/// Reads a config document; keys that are absent keep their defaults and
/// unknown keys are rejected.
inline ExperimentConfig config_from_json(const nlohmann::json& j, ExperimentConfig c = {}) {
  static const std::set<std::string> known{
      "case",  "custom_case", "profile",     "mode",        "clusters",   "cluster_budget", "signature",
      "dual_quantum", "cut_rule", "seed",    "threads",     "input",      "synth_seed",     "years",
      "hours", "demand_scale", "train_input", "train_seed", "train_years", "train_hours", "model",         "grid",
      "out"};
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  for (const auto& [k, v] : j.items()) {
    if (!known.count(k)) throw ConfigError("unknown config key '" + k + "'");
  }
  try {
    if (j.contains("case")) c.case_name = j["case"].get<std::string>();
    if (j.contains("custom_case")) c.custom_case = case_from_json(j["custom_case"]);
    if (j.contains("profile")) {
      const auto p = j["profile"].get<std::string>();
      if (p != "solar" && p != "wind") throw ConfigError("profile must be solar or wind");
      c.profile = p == "solar" ? VreProfile::Solar : VreProfile::Wind;
    }
    if (j.contains("mode")) c.mode = parse_mode(j["mode"].get<std::string>());
    if (j.contains("clusters")) {
      c.clusters = j["clusters"].is_string() ? parse_sweep(j["clusters"].get<std::string>())
                                             : j["clusters"].get<std::vector<std::size_t>>();
    }
    if (j.contains("cluster_budget")) c.budget = parse_budget(j["cluster_budget"].get<std::string>());
    if (j.contains("signature")) c.signature = parse_signature(j["signature"].get<std::string>());
    if (j.contains("dual_quantum")) c.dual_quantum = j["dual_quantum"].get<double>();
    if (j.contains("cut_rule")) c.cut_rule = parse_cut_rule(j["cut_rule"].get<std::string>());
    if (j.contains("seed")) c.seed = j["seed"].get<std::uint64_t>();
    if (j.contains("threads")) c.threads = j["threads"].get<std::size_t>();
    if (j.contains("input")) c.input = j["input"].get<std::string>();
    if (j.contains("synth_seed")) c.synth_seed = j["synth_seed"].get<std::uint64_t>();
    if (j.contains("years")) c.years = j["years"].get<std::size_t>();
    if (j.contains("hours")) c.hours = j["hours"].get<std::size_t>();
    if (j.contains("demand_scale")) c.demand_scale = j["demand_scale"].get<double>();
    if (j.contains("train_input")) c.train_input = j["train_input"].get<std::string>();
    if (j.contains("train_seed")) c.train_seed = j["train_seed"].get<std::uint64_t>();
    if (j.contains("train_years")) c.train_years = j["train_years"].get<std::size_t>();
    if (j.contains("train_hours")) c.train_hours = j["train_hours"].get<std::size_t>();
    if (j.contains("model")) c.model_path = j["model"].get<std::string>();
    if (j.contains("grid")) {
      const auto& g = j["grid"];
      if (g.contains("trees")) c.grid.trees = g["trees"].get<std::vector<std::size_t>>();
      if (g.contains("max_depth")) c.grid.max_depth = g["max_depth"].get<std::vector<std::size_t>>();
      if (g.contains("min_leaf")) c.grid.min_leaf = g["min_leaf"].get<std::vector<std::size_t>>();
      if (g.contains("feature_fraction")) {
        c.grid.fraction.clear();
        for (const auto& f : g["feature_fraction"]) {
          const auto s = f.get<std::string>();
          if (s == "sqrt") {
            c.grid.fraction.push_back(FeatureFraction::Sqrt);
          } else if (s == "third") {
            c.grid.fraction.push_back(FeatureFraction::Third);
          } else {
            throw ConfigError("unknown feature fraction '" + s + "' (expected sqrt or third)");
          }
        }
      }
    }
    if (j.contains("out")) c.out = j["out"].get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  return c;
}

inline ExperimentConfig read_config(const std::string& path, ExperimentConfig base = {}) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(path + ": " + e.what());
  }
  return config_from_json(j, std::move(base));
}

/// The evaluation series of `c`.
inline SeriesFrame evaluation_series(const ExperimentConfig& c) {
  SeriesFrame f;
  if (!c.input.empty()) {
    f = load_series(c.input, {}, c.demand_scale);
  } else {
    SynthConfig s;
    s.seed = c.synth_seed;
    s.years = c.years;
    s.profile = c.vre_profile();
    s.demand_scale = c.demand_scale;
    f = synth_series(s);
  }
  if (c.hours > 0) {
    if (c.hours > f.horizon_len) {
      throw ConfigError("hours = " + std::to_string(c.hours) + " exceeds the series length " +
                        std::to_string(f.horizon_len));
    }
    f = f.slice(0, c.hours);
  }
  return f;
}

/// The training series of `c` (mode ml).
inline SeriesFrame training_series(const ExperimentConfig& c) {
  SeriesFrame f;
  if (!c.train_input.empty()) {
    f = load_series(c.train_input, {}, c.demand_scale);
  } else {
    SynthConfig s;
    s.seed = c.effective_train_seed();
    s.years = c.train_years;
    s.profile = c.vre_profile();
    s.demand_scale = c.demand_scale;
    f = synth_series(s);
  }
  if (c.train_hours > 0) {
    if (c.train_hours > f.horizon_len) {
      throw ConfigError("train_hours = " + std::to_string(c.train_hours) + " exceeds the series length " +
                        std::to_string(f.horizon_len));
    }
    f = f.slice(0, c.train_hours);
  }
  return f;
}

/// Cut-flag labels of a series, solving it one year at a time.
inline std::vector<bool> label_series(const CaseConfig& c, const SeriesFrame& f, const FullSolveOptions& opts = {},
                                      double activity_tol = 1e-7) {
  std::vector<bool> y;
  y.reserve(f.horizon_len);
  for (std::size_t b = 0; b < f.horizon_len; b += kHoursPerYear) {
    const auto full = solve_full_scale(c, f.slice(b, std::min(f.horizon_len, b + kHoursPerYear)), opts);
    const auto diag = diagnose(full.model, full.solution, full.reps, c);
    const auto part = label_periods(diag, c.storage_emin, activity_tol);
    y.insert(y.end(), part.begin(), part.end());
  }
  return y;
}

struct TrainedClassifier {
  FeatureSelection selection;
  TrainResult training;
};

inline TrainedClassifier train_classifier(const CaseConfig& c, const SeriesFrame& train, const ExperimentConfig& cfg) {
  FullSolveOptions fo;
  fo.threads = cfg.threads;
  const auto y = label_series(c, train, fo);
  const FeatureMatrix x = build_features(train, c);
  TrainedClassifier out;
  out.selection = select_features(x, y);
  if (out.selection.kept.empty()) throw std::runtime_error("train: feature selection kept no columns");
  TrainOptions o;
  o.grid = cfg.grid;
  o.seed = cfg.seed;
  o.threads = cfg.threads;
  out.training = train_forest(x.select(out.selection.kept), y, o);
  return out;
}

/// One row of a report: a named run and its comparison with the reference.
struct ReportRow {
  std::string run;
  std::size_t clusters = 0;  // 0 when not a cluster sweep point
  RunReport report;
};

inline constexpr const char* kWorkMetric = "simplex_iterations_x_rows";

inline void write_report_csv(std::ostream& os, const std::string& case_name, std::span<const ReportRow> rows) {
  os << "case,run,clusters,horizon,submodels,periods_total,ofv_full,ofv_agg";
  for (std::size_t q = 0; q < kQuantities; ++q) os << ",err_" << quantity_name(static_cast<Quantity>(q));
  os << ",absolute_errors,work_full,work_parallel_bound,speedup,work_metric,full_solve\n";
  for (const auto& r : rows) {
    const auto& p = r.report;
    os << case_name << ',' << r.run << ',' << r.clusters << ',' << p.horizon << ',' << p.submodels << ','
       << p.periods_total << ',' << detail::fmt_num(p.ofv_full) << ',' << detail::fmt_num(p.ofv_agg);
    std::string abs;
    for (std::size_t q = 0; q < kQuantities; ++q) {
      os << ',' << detail::fmt_num(p.errors_pct[q].value);
      if (p.errors_pct[q].denominator_zero) abs += (abs.empty() ? "" : ";") + std::string(quantity_name(static_cast<Quantity>(q)));
    }
    os << ',' << abs << ',' << detail::fmt_num(p.work_full) << ',' << detail::fmt_num(p.work_parallel_bound) << ','
       << detail::fmt_num(p.speedup) << ',' << kWorkMetric << ',' << (p.work_full_chunked ? "chunked" : "monolithic")
       << '\n';
  }
}

/// Percent errors per cluster count; quantities whose full-scale value is
/// zero are absolute differences.
inline void write_error_vs_clusters(std::ostream& os, std::span<const ReportRow> rows) {
  os << "CL,OFV,VRE,Thermal,NSP,Ch,Dis\n";
  for (const auto& r : rows) {
    os << r.clusters;
    for (const auto& e : r.report.errors_pct) os << ',' << detail::fmt_num(e.value);
    os << '\n';
  }
}

inline void write_speedup_vs_clusters(std::ostream& os, std::span<const ReportRow> rows) {
  os << "CL,periods_total,work_full,work_parallel_bound,speedup\n";
  for (const auto& r : rows) {
    os << r.clusters << ',' << r.report.periods_total << ',' << detail::fmt_num(r.report.work_full) << ','
       << detail::fmt_num(r.report.work_parallel_bound) << ',' << detail::fmt_num(r.report.speedup) << '\n';
  }
}

inline void write_classifier_csv(std::ostream& os, std::span<const std::pair<std::string, ClassifierReport>> rows) {
  os << "set,tp,fn,fp,tn,accuracy,balanced_accuracy\n";
  for (const auto& [name, r] : rows) {
    os << name << ',' << r.tp << ',' << r.fn << ',' << r.fp << ',' << r.tn << ',' << detail::fmt_num(r.accuracy())
       << ',' << detail::fmt_num(r.balanced_accuracy()) << '\n';
  }
}

struct ExperimentResult {
  std::vector<ReportRow> rows;
  std::vector<ReportRow> sweep;          // ml: one row per cluster count
  TechTotals split_totals;               // ml: predicted disaggregation, unclustered
  std::vector<TechTotals> sweep_totals;  // ml: per cluster count
  std::optional<ClassifierReport> validation;
  std::optional<ClassifierReport> test;
  std::size_t horizon = 0;
  std::size_t flags = 0;            // cut flags of the reference solution
  std::size_t predicted_flags = 0;  // ml
  std::vector<std::string> files;   // written artifacts, relative to out
};

namespace detail {

class OutputDir {
 public:
  explicit OutputDir(const std::string& dir, std::vector<std::string>& files) : dir_(dir), files_(files) {
    std::error_code ec;
    std::filesystem::create_directories(dir_, ec);
    if (ec) throw std::runtime_error("cannot create output directory '" + dir + "': " + ec.message());
  }

  template <typename F>
  void write(const std::string& name, F&& fill) {
    const auto path = dir_ / name;
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("cannot write '" + path.string() + "'");
    fill(os);
    os.flush();
    if (!os) throw std::runtime_error("write failed for '" + path.string() + "'");
    files_.push_back(name);
  }

 private:
  std::filesystem::path dir_;
  std::vector<std::string>& files_;
};

}  // namespace detail

/// Runs one experiment and writes its artifacts under cfg.out.
inline ExperimentResult run_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  const CaseConfig c = cfg.case_config();
  const SeriesFrame frame = evaluation_series(cfg);
  frame.validate();
  ExperimentResult res;
  res.horizon = frame.horizon_len;
  detail::OutputDir out(cfg.out, res.files);
  out.write("config.json", [&](std::ostream& os) { os << config_to_json(cfg, false).dump(1) << '\n'; });

  FullSolveOptions fo;
  fo.threads = cfg.threads;
  const FullScaleResult full = solve_full_scale(c, frame, fo);
  OracleOptions oo;
  oo.signature = cfg.signature;
  oo.dual_quantum = cfg.dual_quantum;
  oo.cut_rule = cfg.cut_rule;
  const OraclePlan plan = oracle_plan(full, c, oo);
  res.flags = static_cast<std::size_t>(std::count(plan.flags.begin(), plan.flags.end(), true));
  out.write("diagnostics.csv", [&](std::ostream& os) { write_diagnostics_csv(os, plan.diagnostics, plan.flags); });

  if (cfg.mode == Mode::Full) {
    const Partition ident = identity_partition(frame.horizon_len);
    PartitionResult pr;
    pr.submodels.push_back({full.model, full.reps, full.solution});
    pr.objective = full.solution.objective;
    res.rows.push_back({"full", 0, compare(full, pr, ident)});
  } else if (cfg.mode == Mode::Oracle) {
    const PartitionResult split = solve_partition(c, frame, plan.disaggregated, cfg.threads, fo.model);
    res.rows.push_back({"oracle-split", 0, compare(full, split, plan.disaggregated)});
    const PartitionResult agg = solve_partition(c, frame, plan.partition, cfg.threads, fo.model);
    res.rows.push_back({"oracle", 0, compare(full, agg, plan.partition)});
    out.write("partition.json", [&](std::ostream& os) { write_partition(os, plan.partition); });
  } else {
    ForestModel model;
    if (!cfg.model_path.empty()) {
      std::ifstream in(cfg.model_path);
      if (!in) throw ConfigError("cannot open model file '" + cfg.model_path + "'");
      model = read_forest(in);
    } else {
      const SeriesFrame train = training_series(cfg);
      train.validate();
      const TrainedClassifier tc = train_classifier(c, train, cfg);
      model = tc.training.model;
      res.validation = tc.training.validation;
      out.write("importance.csv", [&](std::ostream& os) { write_importance_csv(os, tc.selection); });
      out.write("model.forest", [&](std::ostream& os) { write_forest(os, model); });
    }
    const FeatureMatrix x = build_features(frame, c);
    const std::vector<bool> pred = model.predict(x);
    res.predicted_flags = static_cast<std::size_t>(std::count(pred.begin(), pred.end(), true));
    const std::vector<bool> truth = label_periods(plan.diagnostics, c.storage_emin);
    res.flags = static_cast<std::size_t>(std::count(truth.begin(), truth.end(), true));
    res.test = confusion(truth, pred);
    std::vector<std::pair<std::string, ClassifierReport>> cls;
    if (res.validation) cls.emplace_back("validation", *res.validation);
    cls.emplace_back("test", *res.test);
    out.write("classifier.csv", [&](std::ostream& os) { write_classifier_csv(os, cls); });

    const Partition split = disaggregate(pred);
    out.write("partition.json", [&](std::ostream& os) { write_partition(os, split); });
    const PartitionResult split_res = solve_partition(c, frame, split, cfg.threads, fo.model);
    res.rows.push_back({"ml-split", 0, compare(full, split_res, split)});
    res.split_totals = totals_of(split_res);
    const std::vector<double> nd = net_demand(frame, c);
    nlohmann::json plans = nlohmann::json::array();
    for (std::size_t k : cfg.clusters) {
      const ClusterPlan cp = plan_clusters(split, nd, k, cfg.budget);
      const Partition p = apply_plan(split, cp);
      const PartitionResult pr = solve_partition(c, frame, p, cfg.threads, fo.model);
      res.rows.push_back({"ml", k, compare(full, pr, p)});
      res.sweep.push_back(res.rows.back());
      res.sweep_totals.push_back(totals_of(pr));
      plans.push_back(cluster_plan_to_json(cp));
    }
    out.write("clusters.json", [&](std::ostream& os) { os << nlohmann::json{{"plans", plans}}.dump(1) << '\n'; });
    out.write("error_vs_clusters.csv", [&](std::ostream& os) { write_error_vs_clusters(os, res.sweep); });
    out.write("speedup_vs_clusters.csv", [&](std::ostream& os) { write_speedup_vs_clusters(os, res.sweep); });
  }
  out.write("report.csv", [&](std::ostream& os) { write_report_csv(os, cfg.case_name, res.rows); });
  return res;
}

struct TrainOutcome {
  TrainedClassifier classifier;
  std::vector<std::string> files;
};

/// Trains the classifier on the training series of `cfg` and writes the
/// model, feature importances and validation scores under cfg.out.
inline TrainOutcome run_training(const ExperimentConfig& cfg) {
  cfg.validate();
  const CaseConfig c = cfg.case_config();
  const SeriesFrame train = training_series(cfg);
  train.validate();
  TrainOutcome res;
  res.classifier = train_classifier(c, train, cfg);
  detail::OutputDir out(cfg.out, res.files);
  out.write("model.forest", [&](std::ostream& os) { write_forest(os, res.classifier.training.model); });
  out.write("importance.csv", [&](std::ostream& os) { write_importance_csv(os, res.classifier.selection); });
  const std::vector<std::pair<std::string, ClassifierReport>> cls{{"validation", res.classifier.training.validation}};
  out.write("classifier.csv", [&](std::ostream& os) { write_classifier_csv(os, cls); });
  return res;
}

}  // namespace etsa
