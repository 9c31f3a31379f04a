#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "etsa/ml.hpp"

using namespace etsa;

namespace {

// Two informative columns and three noise columns; the label is a planted
// rule on the informative ones with 5% label noise.
struct Planted {
  FeatureMatrix x;
  std::vector<bool> y;
};

Planted planted(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0, 1);
  std::bernoulli_distribution flip(0.05);
  Planted p;
  p.x.rows = n;
  p.x.names = {"a", "b", "n1", "n2", "n3"};
  p.x.data.resize(n * 5);
  p.y.resize(n);
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t c = 0; c < 5; ++c) p.x.at(r, c) = g(rng);
    const bool rule = p.x.at(r, 0) + 0.5 * p.x.at(r, 1) > 0.3;
    p.y[r] = flip(rng) ? !rule : rule;
  }
  return p;
}

}  // namespace

TEST(Features, NamesLagsAndEdgePadding) {
  SeriesFrame f;
  f.horizon_len = 5;
  f.demand = {100, 0, 300, 400, 500};
  f.vre_names = {"solar"};
  f.capacity_factor = {{0.1, 0.2, 0.3, 0.4, 0.5}};
  CaseConfig c;
  c.vre_capacity = 1000;
  c.thermal_capacity = 100;
  const auto x = build_features(f, c, 2);
  EXPECT_EQ(x.cols(), 25u);
  EXPECT_EQ(x.rows, 5u);
  EXPECT_EQ(x.names.front(), "D[-2]");
  EXPECT_EQ(x.names[2], "D[+0]");
  EXPECT_EQ(x.names.back(), "Crit[+2]");
  EXPECT_EQ(x.zero_demand_rows, 1u);
  EXPECT_DOUBLE_EQ(x.at(0, x.index_of("D[-2]")), 100.0);  // padded with hour 0
  EXPECT_DOUBLE_EQ(x.at(4, x.index_of("D[+1]")), 500.0);  // padded with hour 4
  EXPECT_DOUBLE_EQ(x.at(2, x.index_of("D[-1]")), 0.0);
  EXPECT_DOUBLE_EQ(x.at(2, x.index_of("VRE[+0]")), 300.0);
  EXPECT_DOUBLE_EQ(x.at(2, x.index_of("VRE_D[+0]")), 1.0);
  EXPECT_DOUBLE_EQ(x.at(1, x.index_of("VRE_D[+0]")), 0.0);
  EXPECT_DOUBLE_EQ(x.at(3, x.index_of("Crit[+0]")), 400.0 / 500.0);
  EXPECT_DOUBLE_EQ(x.at(3, x.index_of("F[+1]")), 0.5);
  EXPECT_EQ(build_features(f, c).cols(), 105u);
  EXPECT_THROW(x.index_of("nope"), std::out_of_range);
}

TEST(Features, SelectAndSliceKeepValues) {
  const auto p = planted(10, 1);
  const auto s = p.x.select(std::vector<std::string>{"n2", "a"});
  EXPECT_EQ(s.cols(), 2u);
  EXPECT_DOUBLE_EQ(s.at(3, 1), p.x.at(3, 0));
  const auto t = p.x.slice_rows(4, 7);
  EXPECT_EQ(t.rows, 3u);
  EXPECT_DOUBLE_EQ(t.at(0, 2), p.x.at(4, 2));
}

TEST(Standardize, ZeroMeanUnitVarianceAndConstantColumns) {
  FeatureMatrix x;
  x.rows = 4;
  x.names = {"v", "k"};
  x.data = {1, 5, 2, 5, 3, 5, 4, 5};
  const auto s = Standardizer::fit(x);
  EXPECT_DOUBLE_EQ(s.mean[0], 2.5);
  const auto z = s.transform(x);
  double sum = 0.0;
  double sq = 0.0;
  for (std::size_t r = 0; r < 4; ++r) {
    sum += z.at(r, 0);
    sq += z.at(r, 0) * z.at(r, 0);
    EXPECT_EQ(z.at(r, 1), 0.0);
  }
  EXPECT_NEAR(sum, 0.0, 1e-12);
  EXPECT_NEAR(sq / 4.0, 1.0, 1e-12);
}

TEST(Selection, KeepsInformativeColumns) {
  const auto p = planted(3000, 2);
  const auto s = select_features(p.x, p.y);
  EXPECT_TRUE(s.converged);
  double total = 0.0;
  for (double v : s.importance) total += v;
  EXPECT_NEAR(total, 1.0, 1e-12);
  EXPECT_GT(s.importance[0], s.importance[1]);
  EXPECT_GT(s.importance[1], 0.2);
  EXPECT_GT(s.coef[0], 0.0);
  for (std::size_t c = 2; c < 5; ++c) EXPECT_LT(s.importance[c], s.importance[1]);
  ASSERT_GE(s.kept.size(), 2u);
  EXPECT_EQ(s.kept[0], "a");
  EXPECT_EQ(s.kept[1], "b");
  std::ostringstream os;
  write_importance_csv(os, s);
  EXPECT_EQ(os.str().rfind("feature,importance,coefficient,kept\na,", 0), 0u);
}

TEST(Confusion, ReproducesReferenceAccuracies) {
  // Test-year and validation confusion matrices as (tp, fn; fp, tn).
  ClassifierReport test{642, 873, 339, 6882};
  EXPECT_NEAR(100 * test.accuracy(), 86.0, 0.5);
  EXPECT_NEAR(100 * test.balanced_accuracy(), 69.0, 0.5);
  ClassifierReport val{690, 292, 113, 4149};
  EXPECT_NEAR(100 * val.accuracy(), 92.0, 0.5);
  EXPECT_NEAR(100 * val.balanced_accuracy(), 84.0, 0.5);
}

TEST(Confusion, CountsAndDegenerateClasses) {
  const std::vector<bool> truth{true, true, false, false, false};
  const std::vector<bool> pred{true, false, true, false, false};
  const auto r = confusion(truth, pred);
  EXPECT_EQ(r.tp, 1u);
  EXPECT_EQ(r.fn, 1u);
  EXPECT_EQ(r.fp, 1u);
  EXPECT_EQ(r.tn, 2u);
  EXPECT_DOUBLE_EQ(r.accuracy(), 0.6);
  EXPECT_DOUBLE_EQ(r.balanced_accuracy(), (0.5 + 2.0 / 3.0) / 2.0);
  // Majority-class predictor: balanced accuracy one half.
  const auto maj = confusion(truth, std::vector<bool>(5, false));
  EXPECT_DOUBLE_EQ(maj.balanced_accuracy(), 0.5);
  // Only one class present: mean over that class.
  const auto one = confusion({false, false}, {false, true});
  EXPECT_DOUBLE_EQ(one.balanced_accuracy(), 0.5);
  EXPECT_THROW(confusion({true}, {true, false}), std::invalid_argument);
}

TEST(Forest, LearnsAPlantedRule) {
  const auto train = planted(2000, 3);
  const auto test = planted(1000, 4);
  ForestParams p;
  p.trees = 50;
  const auto m = fit_forest(train.x, train.y, p);
  const auto r = evaluate(m, test.x, test.y);
  EXPECT_GT(r.balanced_accuracy(), 0.85);
  EXPECT_EQ(features_per_split(FeatureFraction::Sqrt, 105), 10u);
  EXPECT_EQ(features_per_split(FeatureFraction::Third, 105), 35u);
  EXPECT_EQ(features_per_split(FeatureFraction::Third, 2), 1u);
}

TEST(Forest, SeedDeterminesTheModelAndThreadsDoNot) {
  const auto d = planted(800, 5);
  ForestParams p;
  p.trees = 20;
  p.seed = 42;
  const auto a = fit_forest(d.x, d.y, p, 1);
  const auto b = fit_forest(d.x, d.y, p, 8);
  EXPECT_EQ(a, b);
  p.seed = 43;
  EXPECT_FALSE(fit_forest(d.x, d.y, p, 1) == a);
}

TEST(Forest, DepthAndLeafLimitsHold) {
  const auto d = planted(600, 6);
  ForestParams p;
  p.trees = 5;
  p.max_depth = 3;
  p.min_leaf = 20;
  const auto m = fit_forest(d.x, d.y, p);
  for (const auto& t : m.trees) {
    // Walk the tree to check depth and leaf sizes.
    std::vector<std::pair<std::int32_t, std::size_t>> stack{{0, 0}};
    while (!stack.empty()) {
      const auto [i, depth] = stack.back();
      stack.pop_back();
      const auto& n = t.nodes[static_cast<std::size_t>(i)];
      EXPECT_LE(depth, 3u);
      EXPECT_GE(n.count[0] + n.count[1], 20u);
      if (n.left >= 0) {
        stack.push_back({n.left, depth + 1});
        stack.push_back({n.right, depth + 1});
      }
    }
  }
}

TEST(Forest, RejectsSingleClassLabels) {
  const auto d = planted(50, 7);
  EXPECT_THROW(fit_forest(d.x, std::vector<bool>(50, true), ForestParams{}), std::invalid_argument);
  EXPECT_THROW(fit_forest(d.x, std::vector<bool>(49, true), ForestParams{}), std::invalid_argument);
}

TEST(Forest, PersistenceRoundTrip) {
  const auto d = planted(500, 8);
  ForestParams p;
  p.trees = 7;
  p.fraction = FeatureFraction::Third;
  const auto m = fit_forest(d.x, d.y, p);
  std::stringstream ss;
  write_forest(ss, m);
  const auto back = read_forest(ss);
  EXPECT_EQ(back, m);
  EXPECT_EQ(back.predict(d.x), m.predict(d.x));
  std::stringstream bad("etsa-forest 9\n");
  EXPECT_THROW(read_forest(bad), std::runtime_error);
  std::stringstream cut(ss.str().substr(0, ss.str().size() / 2));
  EXPECT_THROW(read_forest(cut), std::runtime_error);
}

TEST(Forest, PredictLooksUpColumnsByName) {
  const auto d = planted(500, 9);
  ForestParams p;
  p.trees = 9;
  const auto m = fit_forest(d.x.select(std::vector<std::string>{"a", "b"}), d.y, p);
  const auto reordered = d.x.select(std::vector<std::string>{"n3", "b", "n1", "a"});
  EXPECT_EQ(m.predict(reordered), m.predict(d.x));
  EXPECT_THROW(m.predict(d.x.select(std::vector<std::string>{"a"})), std::out_of_range);
}

TEST(Train, GridSearchPicksTheBestValidationScore) {
  const auto d = planted(1500, 10);
  TrainOptions o;
  o.grid.trees = {10};
  o.grid.max_depth = {1, 0};
  o.grid.min_leaf = {1};
  o.grid.fraction = {FeatureFraction::Sqrt};
  const auto r = train_forest(d.x, d.y, o);
  ASSERT_EQ(r.grid.size(), 2u);
  double best = 0.0;
  for (const auto& g : r.grid) best = std::max(best, g.validation.balanced_accuracy());
  EXPECT_DOUBLE_EQ(r.validation.balanced_accuracy(), best);
  EXPECT_EQ(r.validation.total(), 300u);
  const auto again = train_forest(d.x, d.y, o);
  EXPECT_EQ(again.model, r.model);
  TrainOptions bad = o;
  bad.train_fraction = 1.0;
  EXPECT_THROW(train_forest(d.x, d.y, bad), std::invalid_argument);
}
