#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "etsa/pipeline.hpp"

using namespace etsa;

namespace {

std::string temp_dir(const std::string& name) {
  const auto p = std::filesystem::temp_directory_path() / ("etsa_pipeline_" + name);
  std::filesystem::remove_all(p);
  return p.string();
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

}  // namespace

TEST(Sweep, ParsesRangesAndLists) {
  EXPECT_EQ(parse_sweep("30..100:10"), (std::vector<std::size_t>{30, 40, 50, 60, 70, 80, 90, 100}));
  EXPECT_EQ(parse_sweep("5..20"), (std::vector<std::size_t>{5, 15}));
  EXPECT_EQ(parse_sweep("3,7,1..3:1"), (std::vector<std::size_t>{3, 7, 1, 2, 3}));
  EXPECT_THROW(parse_sweep(""), ConfigError);
  EXPECT_THROW(parse_sweep("0"), ConfigError);
  EXPECT_THROW(parse_sweep("a..b"), ConfigError);
  EXPECT_THROW(parse_sweep("10..5"), ConfigError);
  EXPECT_THROW(parse_sweep("4x"), ConfigError);
}

TEST(Config, PresetsMatchTheReferenceCases) {
  const auto bs = case_preset("bess-solar");
  EXPECT_EQ(bs.profile, VreProfile::Solar);
  EXPECT_DOUBLE_EQ(bs.config.storage_emax, 400);
  EXPECT_DOUBLE_EQ(bs.config.eta_c, 0.92);
  EXPECT_DOUBLE_EQ(bs.config.discharge_cost, 1.5);
  EXPECT_DOUBLE_EQ(bs.config.vre_cost, 1.0);
  const auto pw = case_preset("phs-wind");
  EXPECT_EQ(pw.profile, VreProfile::Wind);
  EXPECT_DOUBLE_EQ(pw.config.storage_emax, 1600);
  EXPECT_DOUBLE_EQ(pw.config.eta_d, 0.9);
  EXPECT_DOUBLE_EQ(pw.config.vre_cost, 2.5);
  EXPECT_DOUBLE_EQ(pw.config.thermal_capacity, 480);
  EXPECT_DOUBLE_EQ(pw.config.nse_cost, 5000);
  EXPECT_THROW(case_preset("bess-hydro"), ConfigError);
  EXPECT_THROW(case_preset("flywheel-solar"), ConfigError);
}

TEST(Config, JsonRoundTripAndUnknownKeys) {
  ExperimentConfig c;
  c.case_name = "custom";
  c.custom_case = case_preset("phs-solar").config;
  c.custom_case->storage_emax = 999;
  c.profile = VreProfile::Wind;
  c.mode = Mode::Ml;
  c.clusters = {4, 8};
  c.budget = ClusterBudget::Global;
  c.signature = SignatureMode::Reduced;
  c.cut_rule = CutRule::EmptyEnd;
  c.seed = 9;
  c.threads = 3;
  c.hours = 100;
  c.train_hours = 400;
  c.grid.trees = {5};
  c.grid.fraction = {FeatureFraction::Third};
  const auto j = config_to_json(c);
  const auto d = config_from_json(j);
  EXPECT_EQ(config_to_json(d), j);
  EXPECT_DOUBLE_EQ(d.case_config().storage_emax, 999);
  EXPECT_EQ(d.vre_profile(), VreProfile::Wind);

  EXPECT_THROW(config_from_json(nlohmann::json{{"clusterz", "1"}}), ConfigError);
  EXPECT_THROW(config_from_json(nlohmann::json{{"mode", "fast"}}), ConfigError);
  EXPECT_THROW(config_from_json(nlohmann::json{{"threads", "many"}}), ConfigError);
  EXPECT_THROW(config_from_json(nlohmann::json::array()), ConfigError);
  EXPECT_EQ(config_from_json(nlohmann::json{{"clusters", "2..6:2"}}).clusters, (std::vector<std::size_t>{2, 4, 6}));
  EXPECT_EQ(config_to_json(c, false).count("threads"), 0u);
}

TEST(Config, ValidationMessages) {
  ExperimentConfig c;
  c.case_name = "custom";
  EXPECT_THROW(c.validate(), ConfigError);
  c.case_name = "bess-wind";
  c.threads = 0;
  EXPECT_THROW(c.validate(), ConfigError);
  c.threads = 1;
  c.mode = Mode::Ml;
  c.train_seed = c.synth_seed;
  EXPECT_THROW(c.validate(), ConfigError);
  c.train_seed = 0;
  EXPECT_NO_THROW(c.validate());
  EXPECT_EQ(c.effective_train_seed(), c.synth_seed + 1);
  c.input = c.train_input = "same.csv";
  EXPECT_THROW(c.validate(), ConfigError);
  EXPECT_THROW(read_config("/nonexistent/etsa.json"), ConfigError);
}

TEST(Pipeline, OracleRunIsExactAndWritesArtifacts) {
  ExperimentConfig c;
  c.case_name = "phs-wind";
  c.hours = 336;
  c.out = temp_dir("oracle");
  const auto res = run_experiment(c);
  ASSERT_EQ(res.rows.size(), 2u);
  for (const auto& r : res.rows) {
    EXPECT_LE(std::abs(r.report.errors_pct[0].value), 1e-6);
    EXPECT_EQ(r.report.horizon, 336u);
  }
  EXPECT_LT(res.rows[1].report.periods_total, res.rows[0].report.periods_total);
  for (const char* f : {"config.json", "diagnostics.csv", "partition.json", "report.csv"})
    EXPECT_TRUE(std::filesystem::exists(c.out + "/" + f)) << f;
  std::ifstream pj(c.out + "/partition.json");
  EXPECT_NO_THROW(read_partition(pj).validate(336));
  const auto cfg = read_config(c.out + "/config.json");
  EXPECT_EQ(cfg.case_name, "phs-wind");
  EXPECT_EQ(cfg.hours, 336u);
  const auto report = slurp(c.out + "/report.csv");
  EXPECT_EQ(report.rfind("case,run,clusters,horizon,", 0), 0u);
  EXPECT_NE(report.find("phs-wind,oracle,0,336,"), std::string::npos);
}

TEST(Pipeline, FullRunReportsNoError) {
  ExperimentConfig c;
  c.case_name = "bess-solar";
  c.mode = Mode::Full;
  c.hours = 168;
  c.out = temp_dir("full");
  const auto res = run_experiment(c);
  ASSERT_EQ(res.rows.size(), 1u);
  EXPECT_EQ(res.rows[0].report.errors_pct[0].value, 0.0);
  EXPECT_DOUBLE_EQ(res.rows[0].report.speedup, 1.0);
}

TEST(Pipeline, MlRunIsDeterministicAcrossThreadCounts) {
  ExperimentConfig c;
  c.case_name = "bess-wind";
  c.mode = Mode::Ml;
  c.hours = 336;
  c.train_hours = 1344;
  c.clusters = {2, 10, 336};
  c.grid.trees = {20};
  c.grid.max_depth = {8};
  c.grid.min_leaf = {1};
  c.grid.fraction = {FeatureFraction::Sqrt};
  const std::string one = temp_dir("ml1");
  c.out = one;
  const auto a = run_experiment(c);
  c.threads = 8;
  c.out = temp_dir("ml8");
  const auto b = run_experiment(c);
  ASSERT_EQ(a.files, b.files);
  for (const auto& f : a.files) EXPECT_EQ(slurp(one + "/" + f), slurp(c.out + "/" + f)) << f;
  ASSERT_TRUE(a.test.has_value());
  ASSERT_TRUE(a.validation.has_value());
  EXPECT_EQ(a.test->total(), 336u);
  ASSERT_EQ(a.sweep.size(), 3u);
  // At K equal to the horizon no submodel is clustered.
  const auto ref = errors_between(a.split_totals, a.sweep_totals.back());
  for (const auto& e : ref) EXPECT_EQ(e.value, 0.0);
  EXPECT_LE(a.sweep[0].report.periods_total, a.sweep[1].report.periods_total);
  const auto ev = slurp(c.out + "/error_vs_clusters.csv");
  EXPECT_EQ(ev.rfind("CL,OFV,VRE,Thermal,NSP,Ch,Dis\n2,", 0), 0u);

  // A saved model gives the same predictions without retraining.
  ExperimentConfig reuse = c;
  reuse.model_path = c.out + "/model.forest";
  reuse.out = temp_dir("reuse");
  const auto r = run_experiment(reuse);
  EXPECT_FALSE(r.validation.has_value());
  EXPECT_EQ(r.test->tp, a.test->tp);
  EXPECT_EQ(slurp(reuse.out + "/error_vs_clusters.csv"), ev);
}

TEST(Pipeline, TrainingWritesAModel) {
  ExperimentConfig c;
  c.case_name = "bess-wind";
  c.train_hours = 672;
  c.grid.trees = {10};
  c.grid.max_depth = {4};
  c.grid.min_leaf = {1};
  c.grid.fraction = {FeatureFraction::Sqrt};
  c.out = temp_dir("train");
  const auto res = run_training(c);
  EXPECT_FALSE(res.classifier.selection.kept.empty());
  std::ifstream in(c.out + "/model.forest");
  const auto m = read_forest(in);
  EXPECT_EQ(m.trees.size(), 10u);
  EXPECT_EQ(m.features, res.classifier.selection.kept);
}

TEST(Pipeline, ReportsBadInputs) {
  ExperimentConfig c;
  c.hours = kHoursPerYear + 1;
  c.out = temp_dir("bad");
  EXPECT_THROW(run_experiment(c), ConfigError);
  c.hours = 0;
  c.input = "/nonexistent/series.csv";
  EXPECT_THROW(run_experiment(c), SeriesError);
  c.input.clear();
  c.mode = Mode::Ml;
  c.hours = 48;
  c.model_path = "/nonexistent/model.forest";
  EXPECT_THROW(run_experiment(c), ConfigError);
}
