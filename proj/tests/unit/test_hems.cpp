#include <gtest/gtest.h>

#include <fstream>

#include "lemsim/core/rng.hpp"
#include "lemsim/hems/hems.hpp"
#include "lemsim/hems/lp.hpp"
#include "support.hpp"

namespace lemsim {
namespace {

using test::throws_code;

const MarketParams kParams;

// Forecasts with zero heat, flat COP, no EV and the default feed-in tariff.
PlanForecasts flat(std::vector<std::int64_t> load, std::vector<std::int64_t> pv, std::vector<std::int64_t> price_buy) {
  const auto n = load.size();
  PlanForecasts fc;
  fc.start = Timestep{1};
  fc.load = std::move(load);
  fc.pv = std::move(pv);
  fc.heat.assign(n, 0);
  fc.cop.assign(n, 300);
  fc.price_buy = std::move(price_buy);
  fc.price_sell.assign(n, kParams.feed_in_tariff.value);
  fc.ev_available.assign(n, 0);
  return fc;
}

BatterySpec battery_1kwh() { return BatterySpec{1000, 4000, 1.0, 1.0, 0}; }

TEST(Plan, FixedLoadOnly) {
  const AgentSpecs specs;
  const auto fc = flat({1000, 1000}, {0, 0}, {14700, 14700});
  const auto plan = plan_schedule(initial_state(specs), specs, fc, CommittedPosition{}, kParams);
  EXPECT_EQ(plan.buy, (std::vector<std::int64_t>{1000, 1000}));
  EXPECT_EQ(plan.sell, (std::vector<std::int64_t>{0, 0}));
  EXPECT_EQ(plan.objective_value.value, cash(EnergyWh{2000}, PriceMct{37670}).value);
  EXPECT_EQ(plan.objective_value.value, 753400);
  EXPECT_TRUE(check_plan(plan, initial_state(specs), specs, fc).empty());
}

TEST(Plan, BatteryShiftsToCheapStep) {
  AgentSpecs specs;
  specs.battery = battery_1kwh();
  // 25000 and 40000 including levies.
  const auto fc = flat({0, 1000}, {0, 0}, {25000 - 22970, 40000 - 22970});
  const auto state = initial_state(specs);
  EXPECT_EQ(state.battery_soc.value, 0);
  const auto plan = plan_schedule(state, specs, fc, CommittedPosition{}, kParams);
  EXPECT_EQ(plan.batt_charge[0], 1000);
  EXPECT_EQ(plan.batt_discharge[1], 1000);
  EXPECT_EQ(plan.buy, (std::vector<std::int64_t>{1000, 0}));
  EXPECT_EQ(plan.objective_value.value, 250000);
  EXPECT_TRUE(check_plan(plan, state, specs, fc).empty());
}

TEST(Plan, PvSurplusIsSold) {
  AgentSpecs specs;
  specs.pv = PvSpec{8000, "pv/grid"};
  const auto fc = flat({1000}, {2000}, {14700});
  const auto plan = plan_schedule(initial_state(specs), specs, fc, CommittedPosition{}, kParams);
  EXPECT_EQ(plan.sell[0], 1000);
  EXPECT_EQ(plan.pv_curtail[0], 0);
  EXPECT_EQ(plan.objective_value.value, -82700);
  EXPECT_EQ(plan.net(Timestep{1}).value, -1000);
}

TEST(Plan, UnreachableEvTargetIsRelaxed) {
  AgentSpecs specs;
  specs.ev = EvSpec{50000, 11000, 1.0, "ev/0"};
  auto fc = flat({0, 0, 0, 0}, {0, 0, 0, 0}, {14700, 14700, 14700, 14700});
  fc.ev_available = {1, 1, 0, 0};
  fc.ev_requirement = EvRequirement{Timestep{3}, EnergyWh{50000}};
  auto state = initial_state(specs);
  state.ev_soc = EnergyWh{0};
  const auto plan = plan_schedule(state, specs, fc, CommittedPosition{}, kParams);
  EXPECT_TRUE(plan.relaxed);
  // Charging at full power is the closest it gets.
  EXPECT_EQ(plan.ev_charge[0], 2750);
  EXPECT_EQ(plan.ev_charge[1], 2750);
  EXPECT_EQ(plan.ev_charge[2], 0);
}

TEST(Plan, RandomInstancesSatisfyConstraints) {
  Rng rng(3, "plan");
  AgentSpecs specs;
  specs.pv = PvSpec{10000, "pv/grid"};
  specs.battery = BatterySpec{10000, 5000, 0.95, 0.95, 5000};
  specs.hp = HpSpec{6000, "cop/grid", 10000, 0.005, 5000};
  specs.ev = EvSpec{50000, 11000, 0.9, "ev/0"};
  for (int k = 0; k < 20; ++k) {
    const std::int64_t H = rng.uniform_int(12, 96);
    PlanForecasts fc = flat({}, {}, {});
    for (std::int64_t t = 0; t < H; ++t) {
      fc.load.push_back(rng.uniform_int(0, 800));
      fc.pv.push_back(rng.uniform_int(0, 2500));
      fc.heat.push_back(rng.uniform_int(0, 1200));
      fc.cop.push_back(rng.uniform_int(250, 400));
      fc.price_buy.push_back(rng.uniform_int(8270, 14700));
      fc.price_sell.push_back(rng.uniform_int(7000, 8270));
      fc.ev_available.push_back(t < H / 2 ? 1 : 0);
    }
    fc.ev_requirement = EvRequirement{fc.start + H / 2, EnergyWh{50000}};
    auto state = initial_state(specs);
    state.ev_soc = EnergyWh{45000};
    const auto plan = plan_schedule(state, specs, fc, CommittedPosition{}, kParams);
    const auto problems = check_plan(plan, state, specs, fc);
    EXPECT_TRUE(problems.empty()) << k << ": " << (problems.empty() ? "" : problems.front());
  }
}

// Heat pump household LP on which long interior point steps used to stall.
// Reference optimum from an independent simplex solver.
TEST(Lp, StalledStorageChainConverges) {
  std::ifstream in(std::string(LEMSIM_TEST_DATA) + "/lp_stall.txt");
  ASSERT_TRUE(in.good());
  int m = 0, n = 0;
  in >> m >> n;
  lp::Problem p;
  for (int i = 0; i < m; ++i) {
    double b = 0.0;
    in >> b;
    p.add_row(b);
  }
  for (int j = 0; j < n; ++j) {
    double c = 0.0, u = 0.0;
    int k = 0;
    in >> c >> u >> k;
    p.cost_.push_back(c);
    p.upper_.push_back(u);
    for (int q = 0; q < k; ++q) {
      int r = 0;
      double v = 0.0;
      in >> r >> v;
      p.row_idx_.push_back(r);
      p.val_.push_back(v);
    }
    p.col_start_.push_back(static_cast<int>(p.row_idx_.size()));
  }
  ASSERT_EQ(p.rows(), 192);
  ASSERT_EQ(p.cols(), 384);
  const auto sol = lp::solve(p);
  EXPECT_NEAR(sol.objective, 4.91019461296909, 1e-8);
}

TEST(LimitPrice, EndpointsAndMidpoint) {
  EXPECT_EQ(linear_limit_price(Side::Bid, 1, 96, kParams).value, 14700);
  EXPECT_EQ(linear_limit_price(Side::Bid, 96, 96, kParams).value, 8270);
  EXPECT_EQ(linear_limit_price(Side::Ask, 96, 96, kParams).value, 14700);
  EXPECT_EQ(linear_limit_price(Side::Ask, 1, 96, kParams).value, 8270);
  EXPECT_EQ(linear_limit_price(Side::Bid, 48, 96, kParams).value, 11519);  // 14700 - 6430*47/95
  EXPECT_TRUE(throws_code(ErrorCode::UnitOutOfRange, [] { (void)linear_limit_price(Side::Bid, 0, 96, kParams); }));
}

TEST(LimitPrice, MonotoneInRemainingSteps) {
  for (std::int64_t H : {12, 37, 96}) {
    for (std::int64_t s = 1; s < H; ++s) {
      ASSERT_GE(linear_limit_price(Side::Bid, s, H, kParams), linear_limit_price(Side::Bid, s + 1, H, kParams));
      ASSERT_LE(linear_limit_price(Side::Ask, s, H, kParams), linear_limit_price(Side::Ask, s + 1, H, kParams));
    }
  }
}

DispatchPlan plan_with_net(Timestep start, std::vector<std::int64_t> net) {
  DispatchPlan p;
  p.start = start;
  for (auto n : net) {
    p.buy.push_back(std::max<std::int64_t>(n, 0));
    p.sell.push_back(std::max<std::int64_t>(-n, 0));
  }
  return p;
}

TEST(MakeOrders, ResidualAgainstCommitted) {
  const Timestep now{10};
  HemsParams hems;
  hems.trading_horizon_steps = 12;
  CommittedPosition committed;
  committed.add_trade(now + 1, EnergyWh{500}, PriceMct{12000});
  committed.add_trade(now + 2, EnergyWh{700}, PriceMct{12000});
  const auto plan = plan_with_net(now + 1, {2000, 700, -1000});
  const auto orders = make_orders(plan, committed, hems, now, kParams, 4);
  ASSERT_EQ(orders.size(), 2U);
  EXPECT_EQ(orders[0].side, Side::Bid);
  EXPECT_EQ(orders[0].qty.value, 1500);
  EXPECT_EQ(orders[0].delivery_step, now + 1);
  EXPECT_EQ(orders[0].limit.value, 14700);
  EXPECT_EQ(orders[0].agent_id, 4);
  EXPECT_EQ(orders[1].side, Side::Ask);
  EXPECT_EQ(orders[1].qty.value, 1000);
  EXPECT_EQ(orders[1].delivery_step, now + 3);
  EXPECT_EQ(orders[1].limit, linear_limit_price(Side::Ask, 3, 12, kParams));
}

TEST(MakeOrders, StopsAtTradingHorizon) {
  HemsParams hems;
  hems.trading_horizon_steps = 12;
  const auto plan = plan_with_net(Timestep{1}, std::vector<std::int64_t>(96, 100));
  EXPECT_EQ(make_orders(plan, CommittedPosition{}, hems, Timestep{0}, kParams).size(), 12U);
}

TEST(Committed, VwapAndNet) {
  CommittedPosition c;
  c.add_trade(Timestep{5}, EnergyWh{1000}, PriceMct{10000});
  c.add_trade(Timestep{5}, EnergyWh{-3000}, PriceMct{12000});
  EXPECT_EQ(c.net_traded(Timestep{5}).value, -2000);
  EXPECT_EQ(c.vwap(Timestep{5})->value, 11500);
  EXPECT_FALSE(c.vwap(Timestep{6}).has_value());
  EXPECT_EQ(c.net_traded(Timestep{99}).value, 0);
}

Actuals actual(std::int64_t load, std::int64_t pv = 0) {
  Actuals a;
  a.now = Timestep{0};
  a.load = load;
  a.pv = pv;
  a.cop = 300;
  return a;
}

void expect_balanced(const Dispatch& d) {
  EXPECT_EQ(d.pv_used() + d.batt_discharge + d.grid_import,
            d.load + d.batt_charge + d.ev_charge + d.hp_elec + d.grid_export);
}

TEST(Realtime, MatchesContract) {
  const AgentSpecs specs;
  const auto r = realtime_dispatch(initial_state(specs), specs, actual(2000), EnergyWh{2000}, kParams, true);
  EXPECT_EQ(r.imbalance.value, 0);
  EXPECT_EQ(r.dispatch.grid_import, 2000);
}

TEST(Realtime, ShortfallWithoutFlexibility) {
  const AgentSpecs specs;
  const auto r = realtime_dispatch(initial_state(specs), specs, actual(3000), EnergyWh{2000}, kParams, true);
  EXPECT_EQ(r.imbalance.value, 1000);
  expect_balanced(r.dispatch);
}

TEST(Realtime, BatteryAbsorbsSurplusContract) {
  AgentSpecs specs;
  specs.battery = BatterySpec{5000, 4000, 1.0, 1.0, 0};
  const auto r = realtime_dispatch(initial_state(specs), specs, actual(1000), EnergyWh{2000}, kParams, true);
  EXPECT_EQ(r.dispatch.batt_charge, 1000);
  EXPECT_EQ(r.imbalance.value, 0);
  EXPECT_EQ(r.state.battery_soc.value, 1000);
  expect_balanced(r.dispatch);
}

TEST(Realtime, NoMarketSelfConsumption) {
  AgentSpecs specs;
  specs.pv = PvSpec{8000, "pv/grid"};
  specs.battery = BatterySpec{5000, 4000, 1.0, 1.0, 0};
  const auto r = realtime_dispatch(initial_state(specs), specs, actual(500, 2000), EnergyWh{0}, kParams, false);
  EXPECT_EQ(r.imbalance.value, 0);
  EXPECT_EQ(r.dispatch.batt_charge, 1000);
  EXPECT_EQ(r.dispatch.grid_export, 500);
  EXPECT_EQ(r.dispatch.grid_import, 0);
  expect_balanced(r.dispatch);
}

TEST(Realtime, NoMarketEvChargesAtFullPower) {
  AgentSpecs specs;
  specs.ev = EvSpec{50000, 11000, 1.0, "ev/0"};
  auto state = initial_state(specs);
  state.ev_soc = EnergyWh{10000};
  const auto r = realtime_dispatch(state, specs, actual(0), EnergyWh{0}, kParams, false);
  EXPECT_EQ(r.dispatch.ev_charge, 2750);
  EXPECT_EQ(r.dispatch.grid_import, 2750);
  EXPECT_EQ(r.imbalance.value, 0);
}

TEST(Realtime, RandomStepsConserveEnergy) {
  Rng rng(9, "realtime");
  AgentSpecs specs;
  specs.pv = PvSpec{10000, "pv/grid"};
  specs.battery = BatterySpec{10000, 5000, 0.95, 0.95, 5000};
  specs.hp = HpSpec{6000, "cop/grid", 10000, 0.005, 5000};
  specs.ev = EvSpec{50000, 11000, 0.9, "ev/0"};
  auto state = initial_state(specs);
  for (int k = 0; k < 2000; ++k) {
    Actuals a = actual(rng.uniform_int(0, 1500), rng.uniform_int(0, 2500));
    a.now = Timestep{k};
    a.heat = rng.uniform_int(0, 1000);
    a.cop = rng.uniform_int(250, 400);
    a.ev_state = rng.uniform_int(0, 9) == 0 ? -1 : 0;
    const bool lem = k % 2 == 0;
    const EnergyWh committed{rng.uniform_int(-3000, 3000)};
    const auto r = realtime_dispatch(state, specs, a, committed, kParams, lem);
    expect_balanced(r.dispatch);
    ASSERT_GE(r.state.battery_soc.value, 0);
    ASSERT_LE(r.state.battery_soc.value, 10000);
    ASSERT_GE(r.state.thermal_soc.value, 0);
    ASSERT_LE(r.state.thermal_soc.value, 10000);
    ASSERT_LE(r.state.ev_soc.value, 50000);
    if (!lem) ASSERT_EQ(r.imbalance.value, 0);
    if (lem) ASSERT_EQ(r.imbalance.value, r.dispatch.net() - committed.value);
    state = r.state;
  }
}

}  // namespace
}  // namespace lemsim
