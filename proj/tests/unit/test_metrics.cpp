#include <gtest/gtest.h>

#include "lemsim/metrics/metrics.hpp"
#include "support.hpp"

namespace lemsim {
namespace {

using test::throws_code;

const MarketParams kParams;

LedgerRow self_consumed_row(std::int64_t wh) {
  LedgerRow r;
  r.dispatch.load = wh;
  r.dispatch.pv_generated = wh;
  return r;
}

LedgerRow wholesale_row(std::int64_t wh) {
  LedgerRow r;
  r.dispatch.load = wh;
  r.dispatch.grid_import = wh;
  r.settlement = wholesale_gate(EnergyWh{wh}, kParams);
  return r;
}

std::vector<std::int64_t> kw_to_w(std::vector<double> kw) {
  std::vector<std::int64_t> out;
  for (double v : kw) out.push_back(static_cast<std::int64_t>(v * 1000));
  return out;
}

TEST(Aep, SelfConsumedAndWholesale) {
  const std::vector<LedgerRow> rows{self_consumed_row(100'000), wholesale_row(200'000)};
  const double expected = (100.0 * 0.0827 + 200.0 * (0.1470 + 0.2297)) / 300.0;
  EXPECT_NEAR(compute_aep(rows, kParams), expected, 1e-12);
  EXPECT_NEAR(compute_aep(rows, kParams), 0.2787, 1e-12);
}

TEST(Aep, AllSelfConsumed) {
  const std::vector<LedgerRow> rows{self_consumed_row(5000), self_consumed_row(7000)};
  EXPECT_NEAR(compute_aep(rows, kParams), 0.0827, 1e-12);
}

TEST(Aep, ExportRevenueDoesNotEnter) {
  auto row = self_consumed_row(1000);
  row.dispatch.pv_generated = 3000;
  row.dispatch.grid_export = 2000;
  row.settlement = wholesale_gate(EnergyWh{-2000}, kParams);
  EXPECT_NEAR(compute_aep(std::vector<LedgerRow>{row}, kParams), 0.0827, 1e-12);
}

TEST(Aep, BalancingCanBeExcluded) {
  auto row = wholesale_row(1000);
  row.dispatch.load = 1200;
  row.dispatch.grid_import = 1200;
  row.settlement += settle_balancing(EnergyWh{1200}, EnergyWh{1000}, kParams, true);
  const std::vector<LedgerRow> rows{row};
  EXPECT_NEAR(compute_aep(rows, kParams, true), (1.0 * 0.3767 + 0.2 * (0.1570 + 0.2297)) / 1.2, 1e-12);
  EXPECT_NEAR(compute_aep(rows, kParams, false), 0.3767, 1e-12);
}

TEST(Aep, NoEnergy) {
  EXPECT_TRUE(throws_code(ErrorCode::NoEnergy, [] { (void)compute_aep(std::vector<LedgerRow>{LedgerRow{}}, kParams); }));
}

TEST(Opp, TwentyValueFixture) {
  const auto flow = kw_to_w({3, -10, 8, -12, 5, 7, -2, 1, 0, 4, -6, 9, 2, -1, 5, 6, -3, 2, 4, -5});
  const auto r = compute_opp(flow);
  EXPECT_EQ(r.k, 3);
  EXPECT_DOUBLE_EQ(r.opp_kw, 31.0 / 3.0);
}

TEST(Opp, ConstantFlow) {
  for (std::size_t n : {1U, 7U, 100U, 672U}) {
    EXPECT_DOUBLE_EQ(compute_opp(std::vector<std::int64_t>(n, 5000)).opp_kw, 5.0);
  }
}

TEST(Opp, SmallSeriesUsesMaximum) {
  const std::vector<std::int64_t> flow{1000, -4000, 2000};
  const auto r = compute_opp(flow);
  EXPECT_EQ(r.k, 1);
  EXPECT_DOUBLE_EQ(r.opp_kw, 4.0);
}

TEST(Opp, FullFractionIsMeanMagnitude) {
  const std::vector<std::int64_t> flow{1000, -4000, 2000, 0};
  EXPECT_DOUBLE_EQ(compute_opp(flow, 1.0).opp_kw, 7.0 / 4.0);
  EXPECT_TRUE(throws_code(ErrorCode::UnitOutOfRange, [&] { (void)compute_opp(flow, 0.0); }));
}

MetricsReport report(std::string id, double aep, double opp) {
  MetricsReport r;
  r.scenario_id = std::move(id);
  r.aep_eur_per_kwh = aep;
  r.opp_kw = opp;
  return r;
}

TEST(Compare, Ratios) {
  const auto c = compare_runs(report("a", 0.20, 40.0), report("a", 0.25, 50.0));
  EXPECT_DOUBLE_EQ(c.aep_ratio, 0.8);
  EXPECT_DOUBLE_EQ(c.opp_ratio, 0.8);
  const auto same = compare_runs(report("a", 0.3, 7.0), report("a", 0.3, 7.0));
  EXPECT_EQ(same.aep_ratio, 1.0);
  EXPECT_EQ(same.opp_ratio, 1.0);
}

TEST(Compare, Errors) {
  EXPECT_TRUE(throws_code(ErrorCode::ScenarioMismatch, [] { (void)compare_runs(report("a", 1, 1), report("b", 1, 1)); }));
  EXPECT_TRUE(throws_code(ErrorCode::DivByZero, [] { (void)compare_runs(report("a", 1, 1), report("a", 1, 0)); }));
}

TEST(Summary, RowMatchesHeader) {
  Scenario s;
  s.topology = default_topology(TopologyName::Rural);
  s.shares = {50, 25, 0};
  const auto on = report(s.id(), 0.2, 40.0);
  const auto off = report(s.id(), 0.25, 50.0);
  const auto row = summary_csv_row(s, on, off, compare_runs(on, off));
  const auto header = summary_csv_header();
  EXPECT_EQ(std::count(row.begin(), row.end(), ','), std::count(header.begin(), header.end(), ','));
  EXPECT_EQ(row.rfind("rural,50,25,0,", 0), 0U);
  const auto j = metrics_json(on, off, compare_runs(on, off));
  EXPECT_EQ(j["scenario_id"], s.id());
  EXPECT_DOUBLE_EQ(j["aep_ratio"].get<double>(), 0.8);
}

}  // namespace
}  // namespace lemsim
