// etsa: exact time series aggregation experiments from the command line.
//
//   etsa run --case bess-solar --mode oracle --hours 672 --out out/oracle
//   etsa run --case bess-wind --mode ml --clusters 30..100:10 --threads 4
//   etsa train --case bess-wind --out out/model
//   etsa inspect out/oracle/partition.json

#include <cstdio>
#include <exception>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "etsa/pipeline.hpp"

namespace {

struct Flags {
  std::string config;
  std::string case_name;
  std::string mode;
  std::string clusters;
  std::string budget;
  std::string signature;
  std::string cut_rule;
  std::string input;
  std::string train_input;
  std::string model;
  std::string out;
  std::size_t threads = 0;
  std::uint64_t seed = 0;
  std::uint64_t synth_seed = 0;
  std::uint64_t train_seed = 0;
  std::size_t hours = 0;
  std::size_t years = 0;
  std::size_t train_years = 0;
  std::size_t train_hours = 0;
  double demand_scale = 0.0;
};

void add_common(CLI::App* app, Flags& f) {
  app->add_option("--config", f.config, "JSON experiment config; flags override its values");
  app->add_option("--case", f.case_name, "bess-solar, bess-wind, phs-solar, phs-wind or custom");
  app->add_option("--input", f.input, "hourly series CSV (timestamp, demand_mw, cf_*); synthetic when absent");
  app->add_option("--synth-seed", f.synth_seed, "seed of the synthetic evaluation series");
  app->add_option("--years", f.years, "years of synthetic evaluation series");
  app->add_option("--hours", f.hours, "keep only the first N hours of the evaluation series");
  app->add_option("--demand-scale", f.demand_scale, "multiplier applied to demand");
  app->add_option("--train-input", f.train_input, "hourly series CSV used for training");
  app->add_option("--train-seed", f.train_seed, "seed of the synthetic training series (default synth seed + 1)");
  app->add_option("--train-years", f.train_years, "years of synthetic training series");
  app->add_option("--train-hours", f.train_hours, "keep only the first N hours of the training series");
  app->add_option("--seed", f.seed, "random forest seed");
  app->add_option("--threads", f.threads, "worker threads");
  app->add_option("--out", f.out, "output directory");
}

etsa::ExperimentConfig resolve(const Flags& f) {
  etsa::ExperimentConfig c = f.config.empty() ? etsa::ExperimentConfig{} : etsa::read_config(f.config);
  if (!f.case_name.empty()) c.case_name = f.case_name;
  if (!f.mode.empty()) c.mode = etsa::parse_mode(f.mode);
  if (!f.clusters.empty()) c.clusters = etsa::parse_sweep(f.clusters);
  if (!f.budget.empty()) c.budget = etsa::parse_budget(f.budget);
  if (!f.signature.empty()) c.signature = etsa::parse_signature(f.signature);
  if (!f.cut_rule.empty()) c.cut_rule = etsa::parse_cut_rule(f.cut_rule);
  if (!f.input.empty()) c.input = f.input;
  if (!f.train_input.empty()) c.train_input = f.train_input;
  if (!f.model.empty()) c.model_path = f.model;
  if (!f.out.empty()) c.out = f.out;
  if (f.threads) c.threads = f.threads;
  if (f.seed) c.seed = f.seed;
  if (f.synth_seed) c.synth_seed = f.synth_seed;
  if (f.train_seed) c.train_seed = f.train_seed;
  if (f.hours) c.hours = f.hours;
  if (f.years) c.years = f.years;
  if (f.train_years) c.train_years = f.train_years;
  if (f.train_hours) c.train_hours = f.train_hours;
  if (f.demand_scale > 0.0) c.demand_scale = f.demand_scale;
  return c;
}

void print_row(const etsa::ReportRow& r) {
  std::printf("%-13s", r.run.c_str());
  if (r.clusters) std::printf(" K=%-4zu", r.clusters);
  std::printf(" submodels=%zu periods=%zu/%zu", r.report.submodels, r.report.periods_total, r.report.horizon);
  for (std::size_t q = 0; q < etsa::kQuantities; ++q) {
    std::printf(" %s=%.3g%s", etsa::quantity_name(static_cast<etsa::Quantity>(q)), r.report.errors_pct[q].value,
                r.report.errors_pct[q].denominator_zero ? "" : "%");
  }
  std::printf(" speedup=%.4g\n", r.report.speedup);
}

void print_classifier(const char* name, const etsa::ClassifierReport& r) {
  std::printf("%s: tp=%zu fn=%zu fp=%zu tn=%zu accuracy=%.4f balanced=%.4f\n", name, r.tp, r.fn, r.fp, r.tn,
              r.accuracy(), r.balanced_accuracy());
}

int inspect(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open '" + path + "'");
  std::string head;
  in >> head;
  in.seekg(0);
  if (head == etsa::kForestMagic) {
    const auto m = etsa::read_forest(in);
    std::printf("forest: %zu trees, max_depth=%zu, min_leaf=%zu, fraction=%s, %zu features\n", m.trees.size(),
                m.params.max_depth, m.params.min_leaf, etsa::to_string(m.params.fraction), m.features.size());
    for (const auto& f : m.features) std::printf("  %s\n", f.c_str());
    return 0;
  }
  if (!head.empty() && head[0] == '{') {
    const auto j = nlohmann::json::parse(in);
    if (j.contains("submodels") && !j.contains("k")) {
      const auto p = etsa::partition_from_json(j);
      std::size_t linked = 0;
      std::size_t periods = 0;
      std::size_t hours = 0;
      for (const auto& s : p.submodels) {
        linked += s.kind == etsa::SubmodelKind::Linked ? 1 : 0;
        periods += s.periods.size();
        for (const auto& rp : s.periods) hours += rp.weight();
      }
      std::printf("partition: %zu submodels (%zu linked, %zu unlinked), %zu periods covering %zu hours\n",
                  p.submodels.size(), linked, p.submodels.size() - linked, periods, hours);
      return 0;
    }
    if (j.contains("plans")) {
      for (const auto& pj : j["plans"]) {
        const auto plan = etsa::cluster_plan_from_json(pj);
        std::size_t total = 0;
        for (const auto& s : plan.linked) total += s.clusters.size();
        std::printf("plan K=%zu (%s): %zu linked submodels, %zu clusters\n", plan.k, etsa::to_string(plan.budget),
                    plan.linked.size(), total);
      }
      return 0;
    }
    std::cout << j.dump(1) << '\n';
    return 0;
  }
  const auto f = etsa::load_series(path);
  std::printf("series: %zu hours, %zu VRE columns\n", f.horizon_len, f.vre_names.size());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Exact time series aggregation for storage dispatch models"};
  app.require_subcommand(1);

  Flags rf;
  auto* run = app.add_subcommand("run", "solve the full model and an aggregated one, then write reports");
  add_common(run, rf);
  run->add_option("--mode", rf.mode, "full, oracle or ml");
  run->add_option("--clusters", rf.clusters, "cluster sweep, e.g. 30..100:10 or 20,40,80");
  run->add_option("--cluster-budget", rf.budget, "per-submodel or global");
  run->add_option("--signature", rf.signature, "full or reduced");
  run->add_option("--cut-rule", rf.cut_rule, "two-empty or empty-end");
  run->add_option("--model", rf.model, "saved classifier to use instead of training");

  Flags tf;
  auto* train = app.add_subcommand("train", "train the empty-storage classifier and save it");
  add_common(train, tf);

  std::string inspect_path;
  auto* insp = app.add_subcommand("inspect", "summarize a partition, cluster plan, model or series file");
  insp->add_option("file", inspect_path, "file to summarize")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) {
      const auto cfg = resolve(rf);
      const auto res = etsa::run_experiment(cfg);
      std::printf("case %s, mode %s, %zu hours, %zu cut flags\n", cfg.case_name.c_str(), etsa::to_string(cfg.mode),
                  res.horizon, res.flags);
      if (res.validation) print_classifier("validation", *res.validation);
      if (res.test) print_classifier("test", *res.test);
      for (const auto& r : res.rows) print_row(r);
      std::printf("wrote %zu files to %s\n", res.files.size(), cfg.out.c_str());
    } else if (*train) {
      const auto cfg = resolve(tf);
      const auto res = etsa::run_training(cfg);
      std::printf("kept %zu of %zu features\n", res.classifier.selection.kept.size(),
                  res.classifier.selection.names.size());
      print_classifier("validation", res.classifier.training.validation);
      std::printf("wrote %zu files to %s\n", res.files.size(), cfg.out.c_str());
    } else {
      return inspect(inspect_path);
    }
  } catch (const etsa::ConfigError& e) {
    std::fprintf(stderr, "etsa: configuration error: %s\n", e.what());
    return 2;
  } catch (const etsa::SeriesError& e) {
    std::fprintf(stderr, "etsa: input error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "etsa: %s\n", e.what());
    return 1;
  }
  return 0;
}
