#include <gtest/gtest.h>

#include <algorithm>
#include <random>
#include <sstream>

#include "etsa/model.hpp"

using namespace etsa;

namespace {

CaseConfig storage_case() {
  CaseConfig c;
  c.thermal_capacity = 480;
  c.thermal_cost = 60;
  c.vre_capacity = 1000;
  c.vre_cost = 1;
  c.storage_emin = 0;
  c.storage_emax = 1000;
  c.storage_pc_max = 50;
  c.storage_pd_max = 50;
  c.eta_c = 0.9;
  c.eta_d = 0.9;
  c.discharge_cost = 0.5;
  c.nse_cost = 5000;
  return c;
}

RepPeriodSeries series(std::vector<double> demand, std::vector<double> cf, std::vector<std::size_t> w = {}) {
  RepPeriodSeries r;
  r.weights = w.empty() ? std::vector<std::size_t>(demand.size(), 1) : w;
  r.avg_demand = std::move(demand);
  r.avg_cf = {std::move(cf)};
  return r;
}

}  // namespace

TEST(Model, LayoutOfTheBuiltLp) {
  const auto m = build_lp(storage_case(), series({100, 200, 300}, {0.1, 0.2, 0.3}, {1, 2, 3}), true);
  EXPECT_EQ(m.lp.n_vars, 18u);
  EXPECT_EQ(m.lp.n_eq, 7u);
  EXPECT_EQ(m.map.col(2, Symbol::Soc), 17u);
  EXPECT_EQ(m.map.soc_row(1), 4u);
  EXPECT_EQ(m.map.soc_final_row(), 6u);
  EXPECT_DOUBLE_EQ(m.lp.cost[m.map.col(1, Symbol::Thermal)], 120.0);
  EXPECT_DOUBLE_EQ(m.lp.cost[m.map.col(2, Symbol::Discharge)], 1.5);
  EXPECT_DOUBLE_EQ(m.lp.upper[m.map.col(1, Symbol::Vre)], 200.0);
  EXPECT_DOUBLE_EQ(m.lp.upper[m.map.col(2, Symbol::Nsp)], 300.0);
  EXPECT_EQ(m.lp.col_names[m.map.col(0, Symbol::Charge)], "p_c_0");
  EXPECT_EQ(m.lp.row_names.back(), "soc_final");
  std::ostringstream os;
  write_lp_file(os, m.lp);
  EXPECT_NE(os.str().find("soc_final: 1 e_2 = 0"), std::string::npos);
}

TEST(Model, WithoutStorageDispatchFollowsMeritOrder) {
  CaseConfig c = storage_case();
  c.storage_emax = 0;
  c.storage_pc_max = 0;
  c.storage_pd_max = 0;
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> dem(0, 1800);
  std::uniform_real_distribution<double> cf(0, 1);
  std::vector<double> d(24), f(24);
  std::vector<std::size_t> w(24);
  for (std::size_t r = 0; r < 24; ++r) {
    d[r] = dem(rng);
    f[r] = cf(rng);
    w[r] = 1 + r % 3;
  }
  const auto reps = series(d, f, w);
  const auto m = build_lp(c, reps);
  const auto sol = solve_model(m);
  ASSERT_EQ(sol.status, LpStatus::Optimal);
  double expected = 0.0;
  for (std::size_t r = 0; r < 24; ++r) {
    const double vre = std::min(d[r], c.vre_capacity * f[r]);
    const double th = std::min(d[r] - vre, c.thermal_capacity);
    const double ns = d[r] - vre - th;
    expected += w[r] * (vre * c.vre_cost + th * c.thermal_cost + ns * c.nse_cost);
  }
  EXPECT_NEAR(sol.objective, expected, 1e-9 * expected);
}

TEST(Model, StorageShiftsCheapEnergy) {
  // Surplus VRE in period 0, thermal-only period 1: charge at P_c max, then
  // discharge eta_c * eta_d * 50 MW.
  const auto m = build_lp(storage_case(), series({100, 100}, {0.3, 0.0}));
  const auto sol = solve_model(m);
  ASSERT_EQ(sol.status, LpStatus::Optimal);
  const auto reps = series({100, 100}, {0.3, 0.0});
  const auto p = extract_primal(sol, m.map, reps);
  EXPECT_NEAR(p[0].p_c, 50.0, 1e-9);
  EXPECT_NEAR(p[0].e, 45.0, 1e-9);
  EXPECT_NEAR(p[1].p_d, 40.5, 1e-9);
  EXPECT_NEAR(p[1].p_t, 59.5, 1e-9);
  EXPECT_NEAR(p[1].e, 0.0, 1e-9);
  EXPECT_NEAR(sol.objective, 150.0 + 59.5 * 60.0 + 40.5 * 0.5, 1e-8);
  EXPECT_TRUE(verify_kkt(m.lp, sol, 1e-9).passed);
}

TEST(Model, TieBreakStoresEnergyAsLateAsPossible) {
  // Periods 0 and 1 both have cheap surplus; a 45 MWh store can be filled in
  // either. The earliest-empty optimum charges in period 1.
  CaseConfig c = storage_case();
  c.storage_emax = 45;
  const auto reps = series({100, 100, 100}, {0.3, 0.3, 0.0});
  const auto m = build_lp(c, reps);
  ModelSolveOptions none;
  none.tie_break = TieBreak::None;
  const auto a = solve_model(m, none);
  const auto b = solve_model(m);
  ASSERT_EQ(b.status, LpStatus::Optimal);
  EXPECT_NEAR(a.objective, b.objective, 1e-9 * a.objective);
  const auto p = extract_primal(b, m.map, reps);
  EXPECT_NEAR(p[0].e, 0.0, 1e-9);
  EXPECT_NEAR(p[1].e, 45.0, 1e-9);
  EXPECT_TRUE(verify_kkt(m.lp, b, 1e-9).passed);
}

TEST(Model, WeightsScaleEnergyAndCost) {
  // Two identical hours as one period of weight 2.
  const CaseConfig c = storage_case();
  const auto one = build_lp(c, series({150, 150, 50}, {0.1, 0.1, 0.3}));
  const auto two = build_lp(c, series({150, 50}, {0.1, 0.3}, {2, 1}));
  const auto a = solve_model(one);
  const auto b = solve_model(two);
  ASSERT_EQ(a.status, LpStatus::Optimal);
  ASSERT_EQ(b.status, LpStatus::Optimal);
  EXPECT_NEAR(a.objective, b.objective, 1e-9 * a.objective);
}

TEST(Model, ReportsTotalsAndObjectives) {
  const auto reps = series({100, 100}, {0.3, 0.0}, {2, 2});
  const auto m = build_lp(storage_case(), reps);
  const auto sol = solve_model(m);
  const auto prim = extract_primal(sol, m.map, reps);
  const auto t = technology_totals(prim, reps.weights);
  EXPECT_NEAR(t.charge, 2 * prim[0].p_c + 2 * prim[1].p_c, 1e-12);
  EXPECT_NEAR(t.vre + t.thermal + t.nsp + t.discharge - t.charge, 400.0, 1e-9);
  const std::vector<LpSolution> sols{sol, sol};
  EXPECT_DOUBLE_EQ(total_objective(sols), 2 * sol.objective);
  LpSolution bad;
  bad.status = LpStatus::Infeasible;
  const std::vector<LpSolution> mixed{sol, bad};
  try {
    total_objective(mixed);
    FAIL();
  } catch (const NotOptimalError& e) {
    EXPECT_EQ(e.index(), 1u);
    EXPECT_EQ(e.status(), LpStatus::Infeasible);
  }
  EXPECT_THROW(extract_primal(bad, m.map, reps), NotOptimalError);
}

TEST(Model, RejectsMalformedInputs) {
  const CaseConfig c = storage_case();
  EXPECT_THROW(build_lp(c, RepPeriodSeries{}), std::invalid_argument);
  EXPECT_THROW(build_lp(c, series({1, 2}, {0.1, 0.2}, {1, 0})), std::invalid_argument);
  RepPeriodSeries two_vre = series({1}, {0.1});
  two_vre.avg_cf.push_back({0.2});
  EXPECT_THROW(build_lp(c, two_vre), std::invalid_argument);
}
