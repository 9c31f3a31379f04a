#include <gtest/gtest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "etsa/data.hpp"

using namespace etsa;

namespace {

std::string temp_file(const std::string& name, const std::string& content) {
  const auto path = std::filesystem::temp_directory_path() / ("etsa_test_" + name);
  std::ofstream(path) << content;
  return path.string();
}

}  // namespace

TEST(Series, SyntheticSeriesIsReproducible) {
  SynthConfig c;
  c.seed = 11;
  const auto a = synth_series(c);
  const auto b = synth_series(c);
  EXPECT_EQ(a.horizon_len, kHoursPerYear);
  EXPECT_EQ(a.demand, b.demand);
  EXPECT_EQ(a.capacity_factor, b.capacity_factor);
  c.seed = 12;
  EXPECT_NE(synth_series(c).demand, a.demand);
  a.validate();
}

TEST(Series, SyntheticSolarIsDarkAtMidnight) {
  SynthConfig c;
  c.years = 2;
  const auto f = synth_series(c);
  EXPECT_EQ(f.horizon_len, 2 * kHoursPerYear);
  ASSERT_EQ(f.vre_names, std::vector<std::string>{"solar"});
  double noon = 0.0;
  for (std::size_t d = 0; d < f.horizon_len / kHoursPerDay; ++d) {
    EXPECT_EQ(f.capacity_factor[0][d * kHoursPerDay], 0.0);
    noon += f.capacity_factor[0][d * kHoursPerDay + 12];
  }
  EXPECT_GT(noon, 0.0);
}

TEST(Series, SyntheticWindStaysInUnitRange) {
  SynthConfig c;
  c.profile = VreProfile::Wind;
  c.demand_scale = 2.0;
  const auto f = synth_series(c);
  ASSERT_EQ(f.vre_names, std::vector<std::string>{"wind"});
  f.validate();
  SynthConfig u = c;
  u.demand_scale = 1.0;
  const auto g = synth_series(u);
  for (std::size_t h = 0; h < 100; ++h) EXPECT_DOUBLE_EQ(f.demand[h], 2.0 * g.demand[h]);
}

TEST(Series, WriteThenLoadRoundTrips) {
  SynthConfig c;
  c.profile = VreProfile::Wind;
  const auto f = synth_series(c).slice(0, 200);
  std::ostringstream os;
  write_series(os, f);
  const auto path = temp_file("roundtrip.csv", os.str());
  const auto g = load_series(path);
  EXPECT_EQ(g.horizon_len, 200u);
  EXPECT_EQ(g.vre_names, f.vre_names);
  EXPECT_EQ(g.demand, f.demand);
  EXPECT_EQ(g.capacity_factor, f.capacity_factor);
  const auto scaled = load_series(path, {}, 0.5);
  EXPECT_DOUBLE_EQ(scaled.demand[7], 0.5 * f.demand[7]);
}

TEST(Series, LoadReportsBadInput) {
  EXPECT_THROW(load_series("/nonexistent/etsa.csv"), SeriesError);
  EXPECT_THROW(load_series(temp_file("nodemand.csv", "timestamp,cf_solar\n0,0.5\n")), SeriesError);
  EXPECT_THROW(load_series(temp_file("nocf.csv", "timestamp,demand_mw\n0,10\n")), SeriesError);
  EXPECT_THROW(load_series(temp_file("text.csv", "timestamp,demand_mw,cf_solar\n0,abc,0.5\n")), SeriesError);
  EXPECT_THROW(load_series(temp_file("neg.csv", "timestamp,demand_mw,cf_solar\n0,-1,0.5\n")), SeriesError);
  EXPECT_THROW(load_series(temp_file("cf.csv", "timestamp,demand_mw,cf_solar\n0,10,1.5\n")), SeriesError);
  EXPECT_THROW(load_series(temp_file("short.csv", "timestamp,demand_mw,cf_solar\n0,10\n")), SeriesError);
  EXPECT_THROW(load_series(temp_file("empty.csv", "timestamp,demand_mw,cf_solar\n")), SeriesError);
  try {
    load_series(temp_file("row.csv", "timestamp,demand_mw,cf_wind\n0,10,0.1\n1,x,0.2\n"));
    FAIL();
  } catch (const SeriesError& e) {
    EXPECT_NE(std::string(e.what()).find("row 2"), std::string::npos);
  }
}

TEST(Series, LoadsCustomSchema) {
  const auto path = temp_file("schema.csv", "t,load,pv_a,pv_b\n0,100,0.1,0.2\n1,200,0.3,0.4\n");
  SeriesSchema s;
  s.demand_column = "load";
  s.cf_prefix = "pv_";
  const auto f = load_series(path, s);
  EXPECT_EQ(f.vre_names, (std::vector<std::string>{"a", "b"}));
  EXPECT_EQ(f.demand, (std::vector<double>{100, 200}));
  EXPECT_DOUBLE_EQ(f.capacity_factor[1][1], 0.4);
}

TEST(Series, SliceAndValidate) {
  SeriesFrame f;
  f.horizon_len = 3;
  f.demand = {1, 2, 3};
  f.vre_names = {"v"};
  f.capacity_factor = {{0.1, 0.2, 0.3}};
  const auto s = f.slice(1, 3);
  EXPECT_EQ(s.demand, (std::vector<double>{2, 3}));
  EXPECT_THROW(f.slice(2, 4), std::out_of_range);
  f.capacity_factor[0][1] = 1.2;
  EXPECT_THROW(f.validate(), std::invalid_argument);
}

TEST(Series, AveragesOverSourceHours) {
  SeriesFrame f;
  f.horizon_len = 4;
  f.demand = {10, 20, 30, 40};
  f.vre_names = {"v"};
  f.capacity_factor = {{0.0, 0.2, 0.4, 0.6}};
  const std::vector<RepPeriod> periods{RepPeriod{{{0, 2}}}, RepPeriod{{{2, 3}, {3, 4}}}};
  const auto r = average_series(f, periods);
  EXPECT_EQ(r.weights, (std::vector<std::size_t>{2, 2}));
  EXPECT_DOUBLE_EQ(r.avg_demand[0], 15.0);
  EXPECT_DOUBLE_EQ(r.avg_demand[1], 35.0);
  EXPECT_DOUBLE_EQ(r.avg_cf[0][1], 0.5);
  EXPECT_THROW(average_series(f, std::vector<RepPeriod>{RepPeriod{}}), std::invalid_argument);
}

TEST(Series, NetDemandIsClippedAtZero) {
  SeriesFrame f;
  f.horizon_len = 2;
  f.demand = {100, 100};
  f.vre_names = {"v"};
  f.capacity_factor = {{0.05, 0.5}};
  CaseConfig c;
  c.vre_capacity = 1000;
  const auto nd = net_demand(f, c);
  EXPECT_DOUBLE_EQ(nd[0], 50.0);
  EXPECT_DOUBLE_EQ(nd[1], 0.0);
}

TEST(Case, ValidateRejectsBadParameters) {
  CaseConfig c;
  c.storage_emax = 10;
  EXPECT_NO_THROW(c.validate());
  c.eta_c = 1.5;
  EXPECT_THROW(c.validate(), std::invalid_argument);
  c.eta_c = 0.9;
  c.storage_emin = 20;
  EXPECT_THROW(c.validate(), std::invalid_argument);
  c.storage_emin = 0;
  c.thermal_cost = -1;
  EXPECT_THROW(c.validate(), std::invalid_argument);
}
