#include <gtest/gtest.h>

#include <limits>
#include <random>
#include <sstream>

#include "etsa/clustering.hpp"

using namespace etsa;

namespace {

// Smallest SSE over every way of cutting `v` into exactly k contiguous
// clusters, by enumerating all cut sets.
double brute_force_sse(const std::vector<double>& v, std::size_t k) {
  const std::size_t n = v.size();
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t mask = 0; mask < (std::size_t{1} << (n - 1)); ++mask) {
    if (static_cast<std::size_t>(__builtin_popcountll(mask)) != k - 1) continue;
    std::vector<Interval> cl;
    std::size_t begin = 0;
    for (std::size_t i = 0; i + 1 < n; ++i) {
      if (mask >> i & 1) {
        cl.push_back({begin, i + 1});
        begin = i + 1;
      }
    }
    cl.push_back({begin, n});
    best = std::min(best, clustering_sse(v, cl));
  }
  return best;
}

Partition linked_runs(std::vector<std::size_t> lengths) {
  Partition p;
  std::size_t h = 0;
  for (std::size_t len : lengths) {
    Submodel s;
    for (std::size_t i = 0; i < len; ++i) s.periods.push_back(hour_period(h++));
    p.submodels.push_back(std::move(s));
    p.submodels.push_back(Submodel{SubmodelKind::Unlinked, {hour_period(h++)}});
  }
  return p;
}

}  // namespace

TEST(Agglomerate, WorkedExamples) {
  const std::vector<double> a{10, 10, 10, 50, 50};
  EXPECT_EQ(contiguous_agglomerate(a, 2), (std::vector<Interval>{{0, 3}, {3, 5}}));
  const std::vector<double> b{1, 2, 8, 9, 4};
  EXPECT_EQ(contiguous_agglomerate(b, 3), (std::vector<Interval>{{0, 2}, {2, 4}, {4, 5}}));
  EXPECT_EQ(contiguous_agglomerate(b, 5).size(), 5u);
  EXPECT_EQ(contiguous_agglomerate(b, 50).size(), 5u);
  EXPECT_EQ(contiguous_agglomerate(b, 1), (std::vector<Interval>{{0, 5}}));
  EXPECT_THROW(contiguous_agglomerate(b, 0), std::invalid_argument);
  EXPECT_THROW(contiguous_agglomerate(std::vector<double>{}, 2), std::invalid_argument);
}

TEST(Agglomerate, TiesGoToTheLowerIndex) {
  const std::vector<double> v{1, 1, 1, 1};
  EXPECT_EQ(contiguous_agglomerate(v, 3), (std::vector<Interval>{{0, 2}, {2, 3}, {3, 4}}));
}

TEST(Agglomerate, BoundedByTheBruteForceOptimum) {
  std::mt19937_64 rng(12);
  std::normal_distribution<double> g(0, 1);
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t n = 2 + static_cast<std::size_t>(trial % 11);
    std::vector<double> v(n);
    // Level shifts plus noise, the shape of net demand within a submodel.
    double level = 0.0;
    for (auto& x : v) {
      if (g(rng) > 1.0) level += 5.0 * g(rng);
      x = level + g(rng);
    }
    double previous = -1.0;
    for (std::size_t k = n; k >= 1; --k) {
      const auto cl = contiguous_agglomerate(v, k);
      ASSERT_EQ(cl.size(), k);
      const double greedy = clustering_sse(v, cl);
      const double best = brute_force_sse(v, k);
      EXPECT_GE(greedy, best - 1e-9);
      // One merge away from the singletons, and the full collapse, are optimal.
      if (k + 1 >= n || k == 1) {
        EXPECT_NEAR(greedy, best, 1e-9 * (1 + best)) << "n=" << n << " k=" << k;
      }
      // Merging never lowers the SSE.
      EXPECT_GE(greedy, previous - 1e-12);
      previous = greedy;
    }
  }
}

TEST(Agglomerate, SseOfClusters) {
  const std::vector<double> v{1, 3, 10};
  EXPECT_DOUBLE_EQ(clustering_sse(v, std::vector<Interval>{{0, 2}, {2, 3}}), 2.0);
  EXPECT_DOUBLE_EQ(clustering_sse(v, std::vector<Interval>{{0, 1}, {1, 2}, {2, 3}}), 0.0);
}

TEST(Plan, PerSubmodelBudgetAndExactLimit) {
  const Partition p = linked_runs({6, 3, 9});
  std::vector<double> nd(p.hours());
  for (std::size_t h = 0; h < nd.size(); ++h) nd[h] = static_cast<double>((h * 37) % 11);
  const auto plan = plan_clusters(p, nd, 4);
  ASSERT_EQ(plan.linked.size(), 3u);
  EXPECT_EQ(plan.linked[0].submodel, 0u);
  EXPECT_EQ(plan.linked[0].clusters.size(), 4u);
  EXPECT_EQ(plan.linked[1].clusters.size(), 3u);
  const auto q = apply_plan(p, plan);
  EXPECT_NO_THROW(q.validate(p.hours()));
  EXPECT_EQ(q.periods_total(), 4u + 3u + 4u + 3u);
  // K at the longest submodel length leaves every submodel unchanged.
  EXPECT_EQ(apply_plan(p, plan_clusters(p, nd, 9)), p);
}

TEST(Plan, GlobalBudgetSpendsTheTotal) {
  const Partition p = linked_runs({6, 3, 9});
  std::vector<double> nd(p.hours(), 0.0);
  for (std::size_t h = 10; h < 14; ++h) nd[h] = 100.0 + static_cast<double>(h);
  const auto plan = plan_clusters(p, nd, 7, ClusterBudget::Global);
  std::size_t total = 0;
  for (const auto& s : plan.linked) total += s.clusters.size();
  EXPECT_EQ(total, 7u);
  // Fewer than one cluster per linked submodel is not possible.
  const auto tight = plan_clusters(p, nd, 1, ClusterBudget::Global);
  for (const auto& s : tight.linked) EXPECT_EQ(s.clusters.size(), 1u);
}

TEST(Plan, PeriodMeansUseSourceHours) {
  Submodel s;
  s.periods = {RepPeriod{{{0, 2}}}, RepPeriod{{{2, 3}}}};
  const std::vector<double> hourly{1, 3, 10};
  EXPECT_EQ(period_net_demand(s, hourly), (std::vector<double>{2, 10}));
}

TEST(Plan, ApplyRejectsBadPlans) {
  const Partition p = linked_runs({4});
  ClusterPlan plan{2, ClusterBudget::PerSubmodel, {{0, {{0, 1}, {2, 4}}}}};
  EXPECT_THROW(apply_plan(p, plan), std::invalid_argument);
  plan.linked[0] = {1, {{0, 1}}};
  EXPECT_THROW(apply_plan(p, plan), std::invalid_argument);
  plan.linked[0] = {0, {{0, 3}}};
  EXPECT_THROW(apply_plan(p, plan), std::invalid_argument);
  plan.linked = {{0, {{0, 4}}}, {0, {{0, 4}}}};
  EXPECT_THROW(apply_plan(p, plan), std::invalid_argument);
}

TEST(Plan, JsonRoundTrip) {
  const Partition p = linked_runs({5, 2});
  const std::vector<double> nd{1, 2, 3, 4, 5, 6, 7, 8, 9};
  const auto plan = plan_clusters(p, nd, 2, ClusterBudget::Global);
  std::stringstream ss;
  write_cluster_plan(ss, plan);
  EXPECT_EQ(read_cluster_plan(ss), plan);
  std::stringstream bad(R"({"k": 1, "budget": "both", "submodels": []})");
  EXPECT_THROW(read_cluster_plan(bad), std::invalid_argument);
}
