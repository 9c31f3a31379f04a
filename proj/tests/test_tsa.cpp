#include <gtest/gtest.h>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "etsa/parallel.hpp"
#include "etsa/tsa.hpp"
#include "etsa/work.hpp"

using namespace etsa;

namespace {

CaseConfig make_case(bool phs, bool wind) {
  CaseConfig c;
  c.thermal_capacity = 480;
  c.thermal_cost = 60;
  c.vre_capacity = 1000;
  c.vre_cost = wind ? 2.5 : 1.0;
  c.storage_emax = phs ? 1600 : 400;
  c.storage_pc_max = 100;
  c.storage_pd_max = 100;
  c.eta_c = c.eta_d = phs ? 0.9 : 0.92;
  c.discharge_cost = phs ? 0.5 : 1.5;
  c.nse_cost = 5000;
  return c;
}

SeriesFrame frame(bool wind, std::size_t hours, std::uint64_t seed = 7) {
  SynthConfig s;
  s.seed = seed;
  s.profile = wind ? VreProfile::Wind : VreProfile::Solar;
  return synth_series(s).slice(0, hours);
}

double rel(double a, double b) { return std::abs(a - b) / std::max(1.0, std::abs(b)); }

}  // namespace

TEST(Partition, DisaggregateBuildsUnlinkedAndLinkedRuns) {
  const std::vector<bool> flags{true, false, false, true, true, false};
  const auto p = disaggregate(flags);
  ASSERT_EQ(p.submodels.size(), 5u);
  EXPECT_EQ(p.submodels[0].kind, SubmodelKind::Unlinked);
  EXPECT_EQ(p.submodels[1].kind, SubmodelKind::Linked);
  EXPECT_EQ(p.submodels[1].periods.size(), 2u);
  EXPECT_EQ(p.submodels[4].periods[0].sources[0], (HourRange{5, 6}));
  EXPECT_NO_THROW(p.validate(6));
  EXPECT_THROW(p.validate(7), std::invalid_argument);

  const auto s = disaggregate_at_splits({false, true, false, false});
  ASSERT_EQ(s.submodels.size(), 2u);
  EXPECT_EQ(s.submodels[1].hours(), 2u);
}

TEST(Partition, ValidateFindsGapsOverlapsAndShapes) {
  Partition p = identity_partition(4);
  EXPECT_NO_THROW(p.validate(4));
  Partition gap = p;
  gap.submodels[0].periods.erase(gap.submodels[0].periods.begin() + 1);
  EXPECT_THROW(gap.validate(4), std::invalid_argument);
  Partition overlap = p;
  overlap.submodels.push_back(Submodel{SubmodelKind::Unlinked, {hour_period(2)}});
  EXPECT_THROW(overlap.validate(4), std::invalid_argument);
  Partition two = p;
  two.submodels[0].kind = SubmodelKind::Unlinked;
  EXPECT_THROW(two.validate(4), std::invalid_argument);
  Partition none;
  none.submodels.push_back(Submodel{});
  EXPECT_THROW(none.validate(0), std::invalid_argument);
}

TEST(Partition, AggregationGroupsEqualSignatures) {
  const auto p = disaggregate({true, false, false, false, true, true});
  std::vector<Signature> sig(6);
  auto key = [](StorageState s) {
    Signature g;
    g.state = s;
    return g;
  };
  sig[0] = key(StorageState::Empty);
  sig[1] = key(StorageState::Charging);
  sig[2] = key(StorageState::Charging);
  sig[3] = key(StorageState::Discharging);
  sig[4] = key(StorageState::Idle);
  sig[5] = key(StorageState::Empty);
  const auto a = aggregate_partition(p, sig);
  EXPECT_NO_THROW(a.validate(6));
  ASSERT_EQ(a.submodels.size(), 3u);
  EXPECT_EQ(a.submodels[0].kind, SubmodelKind::Unlinked);
  EXPECT_EQ(a.submodels[0].periods[0].sources, (std::vector<HourRange>{{0, 1}, {5, 6}}));
  EXPECT_EQ(a.submodels[1].periods.size(), 2u);
  EXPECT_EQ(a.submodels[1].periods[0].weight(), 2u);
  EXPECT_EQ(a.submodels[2].periods[0].sources, (std::vector<HourRange>{{4, 5}}));
  EXPECT_EQ(a.periods_total(), 4u);
}

TEST(Partition, JsonRoundTrip) {
  auto p = aggregate_partition(disaggregate({true, false, true, true}), std::vector<Signature>(4));
  std::stringstream ss;
  write_partition(ss, p);
  const auto q = read_partition(ss);
  EXPECT_EQ(p, q);
  std::stringstream bad("{\"submodels\": [{\"kind\": \"weird\", \"periods\": []}]}");
  EXPECT_THROW(read_partition(bad), std::exception);
}

TEST(Oracle, AggregationIsExactOnAFortnight) {
  for (const bool wind : {false, true}) {
    const CaseConfig c = make_case(false, wind);
    const auto f = frame(wind, 336);
    const auto full = solve_full_scale(c, f);
    ASSERT_TRUE(full.kkt.passed);
    const auto plan = oracle_plan(full, c);
    const auto split = solve_partition(c, f, plan.disaggregated);
    const auto agg = solve_partition(c, f, plan.partition);
    EXPECT_LT(plan.partition.periods_total(), 336u);
    const auto rep = compare(full, agg, plan.partition);
    EXPECT_LE(rel(rep.ofv_agg, rep.ofv_full), 1e-8);
    EXPECT_LE(rel(split.objective, rep.ofv_full), 1e-8);
    const auto qf = quantities_of(rep.full);
    const auto qa = quantities_of(rep.agg);
    for (std::size_t q = 0; q < kQuantities; ++q) EXPECT_LE(rel(qa[q], qf[q]), 1e-6) << quantity_name(Quantity(q));
    // Disaggregation alone reproduces every hourly value.
    const auto hp = hourly_primal(plan.disaggregated, split, 336);
    for (std::size_t h = 0; h < 336; ++h) {
      const auto& a = plan.diagnostics[h].primal;
      for (std::size_t s = 0; s < kSymbols; ++s)
        EXPECT_NEAR(hp[h].get(Symbol(s)), a.get(Symbol(s)), 1e-7) << "hour " << h;
    }
  }
}

TEST(Oracle, ReducedSignatureIsCoarser) {
  const CaseConfig c = make_case(true, false);
  const auto f = frame(false, 336);
  const auto full = solve_full_scale(c, f);
  OracleOptions o;
  o.signature = SignatureMode::Reduced;
  const auto red = oracle_plan(full, c, o);
  const auto fine = oracle_plan(full, c);
  EXPECT_LE(red.partition.periods_total(), fine.partition.periods_total());
  EXPECT_EQ(red.disaggregated, fine.disaggregated);
  o.aggregate = false;
  EXPECT_EQ(oracle_plan(full, c, o).partition, fine.disaggregated);
}

TEST(Oracle, EmptyEndRuleSplitsAtEveryEmptyHour) {
  const CaseConfig c = make_case(false, true);
  const auto f = frame(true, 336);
  const auto full = solve_full_scale(c, f);
  OracleOptions o;
  o.cut_rule = CutRule::EmptyEnd;
  o.aggregate = false;
  const auto plan = oracle_plan(full, c, o);
  for (const auto& s : plan.partition.submodels) EXPECT_EQ(s.kind, SubmodelKind::Linked);
  const auto res = solve_partition(c, f, plan.partition);
  EXPECT_LE(rel(res.objective, full.solution.objective), 1e-8);
}

TEST(FullScale, ChunkedSolveMatchesTheMonolithicOptimum) {
  for (const bool phs : {false, true}) {
    const CaseConfig c = make_case(phs, true);
    const auto f = frame(true, 2016, 3);
    FullSolveOptions chunked;
    chunked.max_monolithic_hours = 1000;
    const auto a = solve_full_scale(c, f, chunked);
    FullSolveOptions mono;
    mono.max_monolithic_hours = 4000;
    const auto b = solve_full_scale(c, f, mono);
    EXPECT_FALSE(b.chunked);
    EXPECT_TRUE(a.chunked);
    EXPECT_GT(a.chunks, 1u);
    EXPECT_TRUE(a.kkt.passed);
    EXPECT_TRUE(b.kkt.passed);
    EXPECT_LE(rel(a.solution.objective, b.solution.objective), 1e-9);
    EXPECT_TRUE(verify_kkt(a.model.lp, a.solution, 1e-7).passed);
  }
}

TEST(FullScale, ThreadsDoNotChangeTheSolution) {
  const CaseConfig c = make_case(false, true);
  const auto f = frame(true, 1512, 5);
  FullSolveOptions o;
  o.max_monolithic_hours = 500;
  const auto a = solve_full_scale(c, f, o);
  o.threads = 4;
  const auto b = solve_full_scale(c, f, o);
  EXPECT_EQ(a.solution.x, b.solution.x);
  EXPECT_EQ(a.solution.y, b.solution.y);
  EXPECT_EQ(a.chunks, b.chunks);
}

TEST(SolvePartition, SumsSubmodelsAndIgnoresThreadCount) {
  const CaseConfig c = make_case(false, false);
  const auto f = frame(false, 96);
  std::vector<bool> flags(96, false);
  for (std::size_t h = 0; h < 96; h += 7) flags[h] = true;
  const Partition p = disaggregate(flags);
  const auto a = solve_partition(c, f, p, 1);
  const auto b = solve_partition(c, f, p, 8);
  double z = 0.0;
  for (const auto& s : a.submodels) z += s.solution.objective;
  EXPECT_DOUBLE_EQ(a.objective, z);
  EXPECT_EQ(a.objective, b.objective);
  EXPECT_EQ(a.works(), b.works());
  Partition bad = p;
  bad.submodels.pop_back();
  EXPECT_THROW(solve_partition(c, f, bad), std::invalid_argument);
}

TEST(Reporting, RelativeErrorsAndZeroDenominators) {
  const auto e = relative_error_pct(101.0, 100.0);
  EXPECT_NEAR(e.value, 1.0, 1e-12);
  EXPECT_FALSE(e.denominator_zero);
  const auto z = relative_error_pct(0.5, 0.0);
  EXPECT_TRUE(z.denominator_zero);
  EXPECT_DOUBLE_EQ(z.value, 0.5);
  TechTotals a;
  a.ofv = 10;
  a.vre = 4;
  TechTotals b = a;
  b.vre = 5;
  const auto err = errors_between(a, b);
  EXPECT_DOUBLE_EQ(err[0].value, 0.0);
  EXPECT_DOUBLE_EQ(err[1].value, 25.0);
  EXPECT_TRUE(err[3].denominator_zero);
  EXPECT_STREQ(quantity_name(Quantity::Discharging), "Discharging");
}

TEST(Reporting, SpeedupIsFullWorkOverTheLargestSubmodel) {
  // Reference runtimes of a split model and of a clustered model.
  EXPECT_EQ(std::lround(speedup(187e-3, std::vector<double>{77e-4, 1e-4})), 24);
  EXPECT_EQ(std::lround(speedup(187e-3, std::vector<double>{51e-5})), 367);
  EXPECT_THROW(speedup(1.0, std::vector<double>{}), std::invalid_argument);
  EXPECT_DOUBLE_EQ(work_units(10, 7), 70.0);
}

TEST(Parallel, CoversEveryIndexOnceAndRethrowsTheLowestFailure) {
  std::vector<std::atomic<int>> hits(1000);
  parallel_for(hits.size(), 8, [&](std::size_t i) { hits[i]++; });
  for (auto& h : hits) EXPECT_EQ(h.load(), 1);
  try {
    parallel_for(100, 4, [](std::size_t i) {
      if (i == 70 || i == 30) throw std::runtime_error(std::to_string(i));
    });
    FAIL();
  } catch (const std::runtime_error& e) {
    EXPECT_STREQ(e.what(), "30");
  }
}
