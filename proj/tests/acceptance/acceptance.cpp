// One PASS/FAIL line per acceptance criterion. Arguments select criteria by
// number; without arguments all of them run. Exit code 1 if any fails.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <limits>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "lemsim/cli/cli.hpp"
#include "lemsim/core/rng.hpp"
#include "lemsim/hems/hems.hpp"
#include "lemsim/market/market.hpp"
#include "lemsim/metrics/metrics.hpp"
#include "lemsim/scenarios/scenarios.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;
using namespace lemsim;

namespace {

struct Outcome {
  bool pass{false};
  std::string detail;
};

fs::path scratch(const std::string& tag) {
  const auto dir = fs::temp_directory_path() / fmt::format("lemsim_acceptance_{}", tag);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Relative path -> content for every regular file below `dir`.
std::map<std::string, std::string> tree(const fs::path& dir) {
  std::map<std::string, std::string> out;
  for (const auto& e : fs::recursive_directory_iterator(dir)) {
    if (e.is_regular_file()) out[fs::relative(e.path(), dir).generic_string()] = slurp(e.path());
  }
  return out;
}

// ---------------------------------------------------------------------------

Outcome scenario_counts() {
  const auto cfg = validate_config(json::object());
  std::vector<std::string> bad;
  const auto raw = enumerate_all_scenarios(cfg.topologies, cfg.weeks, cfg.seed).size();
  const auto run = enumerate_scenarios(cfg.topologies, cfg.weeks, cfg.seed).size();
  if (raw != 500 || run != 400) bad.push_back(fmt::format("all: {}/{}", raw, run));
  for (const auto& t : cfg.topologies) {
    const auto r = enumerate_all_scenarios({t}, cfg.weeks, cfg.seed).size();
    const auto n = enumerate_scenarios({t}, cfg.weeks, cfg.seed).size();
    if (r != 125 || n != 100) bad.push_back(fmt::format("{}: {}/{}", to_string(t.name), r, n));
  }
  if (!bad.empty()) return {false, bad.front()};
  return {true, "500 raw / 400 runnable; 125 / 100 per topology"};
}

// ---------------------------------------------------------------------------

struct LimitOrder {
  Side side;
  std::int64_t qty;
  std::int64_t limit;
};

std::int64_t max_crossing_volume(const std::vector<LimitOrder>& orders) {
  std::int64_t best = 0;
  for (const auto& cand : orders) {
    const auto p = cand.limit;
    std::int64_t demand = 0, supply = 0;
    for (const auto& o : orders) {
      if (o.side == Side::Bid && o.limit >= p) demand += o.qty;
      if (o.side == Side::Ask && o.limit <= p) supply += o.qty;
    }
    best = std::max(best, std::min(demand, supply));
  }
  return best;
}

Outcome auction_oracle() {
  constexpr int kBooks = 2000;
  Rng rng(2024, "acceptance/auction");
  int violations = 0, crossed = 0;
  std::string first;
  auto fail = [&](int k, const std::string& what) {
    if (violations++ == 0) first = fmt::format("book {}: {}", k, what);
  };
  for (int k = 0; k < kBooks; ++k) {
    const auto n = rng.uniform_int(0, 6);
    std::vector<LimitOrder> orders;
    OrderBook book;
    const Timestep delivery{10};
    for (std::int64_t i = 0; i < n; ++i) {
      const LimitOrder o{rng.uniform_int(0, 1) == 0 ? Side::Bid : Side::Ask, rng.uniform_int(1, 5000),
                         rng.uniform_int(8270, 14700)};
      orders.push_back(o);
      Order posted;
      posted.agent_id = i;
      posted.side = o.side;
      posted.delivery_step = delivery;
      posted.qty = EnergyWh{o.qty};
      posted.limit = PriceMct{o.limit};
      book.post(posted, Timestep{0});
    }
    const auto r = clear_auction(book, delivery, Timestep{1});
    const auto expected = max_crossing_volume(orders);
    if (r.volume().value != expected) fail(k, fmt::format("volume {} != {}", r.volume().value, expected));
    if (expected > 0) ++crossed;
    if (r.trades.empty() != !r.clearing_price.has_value()) fail(k, "price without trades");
    std::vector<std::int64_t> filled(orders.size(), 0);
    for (const auto& t : r.trades) {
      const auto& b = orders[static_cast<std::size_t>(t.buyer)];
      const auto& s = orders[static_cast<std::size_t>(t.seller)];
      if (b.side != Side::Bid || s.side != Side::Ask) fail(k, "trade sides");
      if (!(s.limit <= t.price.value && t.price.value <= b.limit)) fail(k, "price outside limits");
      if (r.clearing_price && t.price != *r.clearing_price) fail(k, "non-uniform price");
      filled[static_cast<std::size_t>(t.buyer)] += t.qty.value;
      filled[static_cast<std::size_t>(t.seller)] += t.qty.value;
    }
    std::int64_t best_bid = -1, best_ask = std::numeric_limits<std::int64_t>::max();
    for (std::size_t i = 0; i < orders.size(); ++i) {
      if (filled[i] > orders[i].qty) fail(k, "overfill");
      if (filled[i] < orders[i].qty) {
        if (orders[i].side == Side::Bid) best_bid = std::max(best_bid, orders[i].limit);
        if (orders[i].side == Side::Ask) best_ask = std::min(best_ask, orders[i].limit);
      }
    }
    if (best_bid >= best_ask) fail(k, "residue still crosses");
  }
  const auto detail = fmt::format("{} books ({} with a cross), {} violations", kBooks, crossed, violations);
  return {violations == 0, violations == 0 ? detail : detail + "; " + first};
}

// ---------------------------------------------------------------------------

struct ToyInstance {
  DeviceState state;
  AgentSpecs specs;
  PlanForecasts fc;
};

ToyInstance toy(Rng& rng) {
  constexpr std::int64_t q = 500;
  ToyInstance x;
  const auto H = rng.uniform_int(1, 4);
  auto& fc = x.fc;
  fc.start = Timestep{100};
  const bool with_pv = rng.uniform_int(0, 1) == 1;
  for (std::int64_t t = 0; t < H; ++t) {
    fc.load.push_back(q * rng.uniform_int(0, 4));
    fc.pv.push_back(with_pv ? q * rng.uniform_int(0, 4) : 0);
    fc.heat.push_back(0);
    fc.cop.push_back(300);
    fc.price_buy.push_back(rng.uniform_int(8270, 14700));
    fc.price_sell.push_back(rng.uniform_int(0, 8270));
    fc.ev_available.push_back(rng.uniform_int(0, 3) == 0 ? 0 : 1);
  }
  const auto cap = q * rng.uniform_int(1, 4);
  const auto per_step = q * rng.uniform_int(1, 2);
  x.specs.battery = BatterySpec{cap, per_step * kStepsPerHour, 1.0, 1.0, q * rng.uniform_int(0, cap / q)};
  if (with_pv) x.specs.pv = PvSpec{10000, "pv/grid"};
  x.state = initial_state(x.specs);
  if (rng.uniform_int(0, 1) == 1) {
    const std::int64_t ev_cap = 2000;
    const auto ev_step = q * rng.uniform_int(1, 2);
    x.specs.ev = EvSpec{ev_cap, ev_step * kStepsPerHour, 1.0, "ev/0"};
    const auto D = rng.uniform_int(1, H);
    std::int64_t reachable = 0;
    for (std::int64_t t = 0; t < D; ++t) reachable += fc.ev_available[static_cast<std::size_t>(t)] * ev_step;
    const auto missing = q * rng.uniform_int(0, std::min(reachable, ev_cap) / q);
    x.state.ev_soc = EnergyWh{ev_cap - missing};
    x.state.ev_present = true;
    fc.ev_requirement = EvRequirement{fc.start + D, EnergyWh{ev_cap}};
  }
  return x;
}

// Exhaustive search over 500 Wh decisions for battery, EV and curtailment.
// Cost in micro-euros; buying pays the price plus levies, selling earns the
// sell price, each curtailed Wh costs 1 mct/kWh.
double oracle_cost(const ToyInstance& x, const MarketParams& params) {
  constexpr std::int64_t q = 500;
  const auto& fc = x.fc;
  const auto H = fc.horizon();
  const auto& b = *x.specs.battery;
  const auto bp = energy_per_step_wh(b.power_w);
  std::int64_t D = 0, ev_step = 0, ev_cap = 0;
  if (x.specs.ev && fc.ev_requirement && x.state.ev_soc.value < x.specs.ev->capacity_wh) {
    D = std::min(H, fc.ev_requirement->deadline - fc.start);
    ev_step = energy_per_step_wh(x.specs.ev->charge_power_w);
    ev_cap = x.specs.ev->capacity_wh;
    bool any = false;
    for (std::int64_t t = 0; t < D; ++t) any = any || fc.ev_available[static_cast<std::size_t>(t)] != 0;
    if (!any) D = 0;
  }
  const double inf = std::numeric_limits<double>::infinity();
  std::function<double(std::int64_t, std::int64_t, std::int64_t)> go = [&](std::int64_t t, std::int64_t soc,
                                                                          std::int64_t ev) -> double {
    if (t == H) return (D > 0 && ev != ev_cap) ? inf : 0.0;
    const auto k = static_cast<std::size_t>(t);
    const bool can_ev = t < D && fc.ev_available[k] != 0;
    double best = inf;
    for (std::int64_t db = -bp; db <= bp; db += q) {
      if (soc + db < 0 || soc + db > b.capacity_wh) continue;
      for (std::int64_t e = 0; e <= (can_ev ? ev_step : 0); e += q) {
        if (ev + e > std::max(ev_cap, ev)) continue;
        for (std::int64_t u = 0; u <= fc.pv[k]; u += q) {
          const auto net = fc.load[k] + db + e - (fc.pv[k] - u);
          const auto buy = std::max<std::int64_t>(net, 0);
          const auto sell = std::max<std::int64_t>(-net, 0);
          const double step = static_cast<double>(cash(EnergyWh{buy}, PriceMct{fc.price_buy[k] + params.levies.value}).value) -
                              static_cast<double>(cash(EnergyWh{sell}, PriceMct{fc.price_sell[k]}).value) +
                              static_cast<double>(u) / 100.0;
          best = std::min(best, step + go(t + 1, soc + db, ev + e));
        }
      }
    }
    return best;
  };
  return go(0, x.state.battery_soc.value, x.state.ev_soc.value);
}

Outcome scheduler_oracle() {
  constexpr int kInstances = 400;
  const MarketParams params;
  Rng rng(77, "acceptance/scheduler");
  int violations = 0, with_ev = 0;
  double worst = 0.0;
  std::string first;
  for (int k = 0; k < kInstances; ++k) {
    const auto x = toy(rng);
    if (x.fc.ev_requirement) ++with_ev;
    const auto plan = plan_schedule(x.state, x.specs, x.fc, CommittedPosition{}, params);
    const auto lp = static_cast<double>(plan.objective_value.value);
    const auto oracle = oracle_cost(x, params);
    const auto problems = check_plan(plan, x.state, x.specs, x.fc);
    const double rel = std::abs(lp - oracle) / std::max(1.0, std::abs(oracle));
    worst = std::max(worst, rel);
    std::string what;
    if (!std::isfinite(oracle)) what = "oracle found no feasible plan";
    else if (lp > oracle + 1e-6 * std::max(1.0, std::abs(oracle))) what = fmt::format("lp {} > oracle {}", lp, oracle);
    else if (rel > 1e-6) what = fmt::format("lp {} vs oracle {}", lp, oracle);
    else if (!problems.empty()) what = problems.front();
    else if (plan.relaxed) what = "plan relaxed on a feasible instance";
    if (!what.empty() && violations++ == 0) first = fmt::format("instance {}: {}", k, what);
  }
  const auto detail = fmt::format("{} instances ({} with EV deadlines), max rel gap {:.2e}, {} violations", kInstances,
                                  with_ev, worst, violations);
  return {violations == 0, violations == 0 ? detail : detail + "; " + first};
}

// ---------------------------------------------------------------------------

Outcome metric_fixtures() {
  const MarketParams params;
  LedgerRow self, bought;
  self.dispatch.load = 100'000;
  self.dispatch.pv_generated = 100'000;
  bought.dispatch.load = 200'000;
  bought.dispatch.grid_import = 200'000;
  bought.settlement = wholesale_gate(EnergyWh{200'000}, params);

  const double mixed = compute_aep(std::vector<LedgerRow>{self, bought}, params);
  const double collapse = compute_aep(std::vector<LedgerRow>{self}, params);
  const std::vector<std::int64_t> flow{3000, -10000, 8000, -12000, 5000, 7000, -2000, 1000, 0, 4000,
                                       -6000, 9000, 2000, -1000, 5000, 6000, -3000, 2000, 4000, -5000};
  const auto opp = compute_opp(flow, 0.15);

  const bool ok = std::abs(mixed - 0.2787) <= 1e-12 && std::abs(collapse - 0.0827) <= 1e-12 &&
                  opp.opp_kw == 31.0 / 3.0 && opp.k == 3;
  return {ok, fmt::format("aep {:.15f} / {:.15f}, opp {:.15f} (k={})", mixed, collapse, opp.opp_kw, opp.k)};
}

// ---------------------------------------------------------------------------

Outcome strategy_endpoints() {
  const MarketParams p;
  int bad = 0;
  for (std::int64_t H = kMinTradingHorizon; H <= kMaxTradingHorizon; ++H) {
    if (linear_limit_price(Side::Bid, 1, H, p).value != 14700) ++bad;
    if (linear_limit_price(Side::Bid, H, H, p).value != 8270) ++bad;
    if (linear_limit_price(Side::Ask, 1, H, p).value != 8270) ++bad;
    if (linear_limit_price(Side::Ask, H, H, p).value != 14700) ++bad;
    for (std::int64_t s = 1; s < H; ++s) {
      if (linear_limit_price(Side::Bid, s, H, p) < linear_limit_price(Side::Bid, s + 1, H, p)) ++bad;
      if (linear_limit_price(Side::Ask, s, H, p) > linear_limit_price(Side::Ask, s + 1, H, p)) ++bad;
    }
  }
  return {bad == 0, fmt::format("H in [{}, {}], {} violations", kMinTradingHorizon, kMaxTradingHorizon, bad)};
}

// ---------------------------------------------------------------------------

Outcome no_market_price() {
  const auto cfg = validate_config(json::object());
  GridTopology topo = default_topology(TopologyName::Countryside);
  topo.residential_count = 6;
  topo.non_residential_count = 1;
  const Scenario s{topo, {0, 50, 50}, 4, {Week::Summer, Week::Winter}, false};
  const auto profiles = build_profile_set(topo, cfg.profiles, cfg.seed, s.weeks);
  const auto m = compute_metrics(run_scenario(s, profiles, cfg));
  return {m.aep_eur_per_kwh == 0.3767, fmt::format("aep {:.17g}", m.aep_eur_per_kwh)};
}

// ---------------------------------------------------------------------------

Comparison lem_effect(const Shares& shares, std::vector<Week> weeks) {
  const auto cfg = validate_config(json::object());
  GridTopology topo = default_topology(TopologyName::Rural);
  topo.residential_count = 20;
  topo.non_residential_count = 0;
  Scenario s{topo, shares, 7, std::move(weeks), true};
  const auto profiles = build_profile_set(topo, cfg.profiles, cfg.seed, s.weeks);
  const auto on = compute_metrics(run_scenario(s, profiles, cfg));
  s.lem_enabled = false;
  const auto off = compute_metrics(run_scenario(s, profiles, cfg));
  return compare_runs(on, off);
}

Outcome directional_benefit() {
  const auto warm = lem_effect({100, 50, 50}, {Week::Summer, Week::Transition});
  const auto winter = lem_effect({25, 50, 100}, {Week::Winter});
  const bool ok = warm.aep_ratio < 1.0 && warm.opp_ratio < 1.0 && winter.opp_ratio >= 0.95;
  return {ok, fmt::format("summer+transition aep {:.4f} opp {:.4f}; winter opp {:.4f}", warm.aep_ratio,
                          warm.opp_ratio, winter.opp_ratio)};
}

// ---------------------------------------------------------------------------

// Checks every ledger row of every run below a sweep directory.
std::int64_t conservation_violations(const fs::path& sweep_dir, std::int64_t& rows, std::string& first) {
  std::int64_t bad = 0;
  auto flag = [&](const std::string& what) {
    if (bad++ == 0) first = what;
  };
  for (const auto& e : read_sweep_manifest(sweep_dir / "sweep_manifest.json").entries) {
    for (const char* side : {"lem_on", "lem_off"}) {
      const auto r = read_run_result(sweep_dir / e.result_path / side);
      std::map<std::pair<std::int64_t, std::int64_t>, std::int64_t> net;
      for (const auto& row : r.ledger) {
        ++rows;
        const auto& d = row.dispatch;
        if (d.pv_used() + d.batt_discharge + d.grid_import !=
            d.load + d.batt_charge + d.ev_charge + d.hp_elec + d.grid_export) {
          flag(fmt::format("{} {} step {} agent {}: bus", e.scenario_id, side, row.step, row.agent_id));
        }
        if (EnergyWh{d.net()} != row.settlement.contracted_net() + row.settlement.balancing_net()) {
          flag(fmt::format("{} {} step {} agent {}: settlement", e.scenario_id, side, row.step, row.agent_id));
        }
        net[{row.week_pos, row.step}] += d.net();
      }
      if (net.size() != r.flow_w.size()) {
        flag(fmt::format("{} {}: flow length", e.scenario_id, side));
        continue;
      }
      std::size_t i = 0;
      for (const auto& [key, n] : net) {
        if (r.flow_w[i++] != 4 * n) flag(fmt::format("{} {}: flow at {}", e.scenario_id, side, key.second));
      }
    }
  }
  return bad;
}

Outcome conservation_and_determinism() {
  const auto cfg = validate_config(json::parse(R"({
    "seed": 11,
    "weeks": ["summer"],
    "topologies": ["countryside"],
    "scenarios": [{"pv": 25, "ev": 0, "hp": 0}, {"pv": 50, "ev": 50, "hp": 50}, {"pv": 100, "ev": 100, "hp": 100}]
  })"));
  const auto base = scratch("determinism");
  const auto one = cmd_sweep(cfg, base / "jobs1", {1, false});
  const auto eight = cmd_sweep(cfg, base / "jobs8", {8, false});
  std::vector<std::string> problems;
  if (one.failed + eight.failed > 0) problems.push_back("sweep failures");
  if (slurp(one.summary) != slurp(eight.summary)) problems.push_back("summary.csv differs between --jobs 1 and 8");
  const auto t1 = tree(base / "jobs1");
  if (t1 != tree(base / "jobs8")) problems.push_back("run directories differ");
  std::int64_t rows = 0;
  std::string first;
  const auto bad = conservation_violations(base / "jobs1", rows, first);
  if (bad > 0) problems.push_back(fmt::format("{} conservation violations, first {}", bad, first));
  fs::remove_all(base);
  if (!problems.empty()) return {false, problems.front()};
  return {true, fmt::format("{} scenarios, {} files identical, {} ledger rows conserved", one.scenarios, t1.size(), rows)};
}

// ---------------------------------------------------------------------------

Outcome sweep_performance() {
  const auto cfg = validate_config(json::parse(R"({
    "seed": 7,
    "weeks": ["summer"],
    "topologies": [{"name": "rural", "residential_count": 28, "non_residential_count": 2}]
  })"));
  const int jobs = std::max(1U, std::thread::hardware_concurrency());
  const auto dir = scratch("performance");
  const auto t0 = std::chrono::steady_clock::now();
  const auto report = cmd_sweep(cfg, dir, {jobs, false});
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (report.failed > 0) {
    fs::remove_all(dir);
    return {false, fmt::format("{} of {} scenarios failed ({:.1f} s)", report.failed, report.scenarios, secs)};
  }
  std::int64_t rows = 0;
  std::string first;
  const auto bad = conservation_violations(dir, rows, first);
  fs::remove_all(dir);
  const bool ok = report.scenarios == 100 && report.failed == 0 && bad == 0 && secs < 600.0;
  auto detail = fmt::format("{} scenarios x 2 runs, 30 agents, {} jobs: {:.1f} s", report.scenarios, jobs, secs);
  if (bad > 0) detail += fmt::format("; {} conservation violations, first {}", bad, first);
  return {ok, detail};
}

}  // namespace

int main(int argc, char** argv) {
  spdlog::set_level(spdlog::level::warn);
  const std::vector<std::pair<std::string, Outcome (*)()>> criteria{
      {"scenario counts", scenario_counts},
      {"auction oracle", auction_oracle},
      {"scheduler oracle", scheduler_oracle},
      {"metric fixtures", metric_fixtures},
      {"linear strategy endpoints", strategy_endpoints},
      {"no-market average price", no_market_price},
      {"directional market benefit", directional_benefit},
      {"conservation and determinism", conservation_and_determinism},
      {"sweep performance", sweep_performance},
  };
  std::set<int> selected;
  for (int i = 1; i < argc; ++i) selected.insert(std::atoi(argv[i]));

  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int n = static_cast<int>(i) + 1;
    if (!selected.empty() && !selected.count(n)) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, fmt::format("exception: {}", e.what())};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    fmt::print("[{}] {}: {} ({}) [{:.1f} s]\n", n, criteria[i].first, o.pass ? "PASS" : "FAIL", o.detail, secs);
    std::fflush(stdout);
    if (!o.pass) ++failed;
  }
  return failed == 0 ? 0 : 1;
}
