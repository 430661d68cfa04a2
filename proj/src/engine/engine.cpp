#include "lemsim/engine/engine.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <sstream>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "lemsim/core/error.hpp"
#include "lemsim/engine/worker_pool.hpp"

namespace lemsim {

namespace {

std::size_t at(std::int64_t i) { return static_cast<std::size_t>(i); }

std::vector<std::int64_t> forecast_values(ForecastMethod method, const History& hist, const std::vector<std::int64_t>& truth,
                                          std::int64_t from, std::int64_t horizon, Unit unit) {
  if (method == ForecastMethod::Perfect) {
    std::vector<std::int64_t> out(at(horizon));
    for (std::int64_t i = 0; i < horizon; ++i) {
      const auto idx = std::min<std::int64_t>(from + i, static_cast<std::int64_t>(truth.size()) - 1);
      out[at(i)] = truth[at(idx)];
    }
    return out;
  }
  const TimeSeries ts = method == ForecastMethod::Naive ? forecast_naive(hist, horizon, unit)
                                                         : forecast_naive_average(hist, horizon, unit);
  return {ts.values().begin(), ts.values().end()};
}

// Plan of an agent without anything to shift: it trades its forecast net load.
DispatchPlan passive_plan(const PlanForecasts& fc) {
  DispatchPlan plan;
  plan.start = fc.start;
  const auto H = at(fc.horizon());
  for (auto* v : {&plan.pv_use, &plan.pv_curtail, &plan.batt_charge, &plan.batt_discharge, &plan.ev_charge,
                  &plan.hp_elec, &plan.buy, &plan.sell, &plan.battery_soc, &plan.ev_soc, &plan.thermal_soc}) {
    v->assign(H, 0);
  }
  for (std::size_t t = 0; t < H; ++t) {
    const auto net = fc.load[t] - fc.pv[t];
    plan.pv_use[t] = fc.pv[t];
    plan.buy[t] = std::max<std::int64_t>(net, 0);
    plan.sell[t] = std::max<std::int64_t>(-net, 0);
  }
  return plan;
}

// Delivery, metering and (with a LEM) the planning phase of one agent.
void agent_phase(World& w, AgentRuntime& a, Timestep now) {
  const std::int64_t l = w.local(now);
  Actuals act{now, a.load[at(l)], a.pv[at(l)], a.heat[at(l)], a.cop[at(l)], a.ev_state[at(l)],
              a.ev_next_departure[at(l)]};
  const Setpoints* sp = a.setpoints[at(l)] ? &*a.setpoints[at(l)] : nullptr;
  const auto rt = w.lem_enabled
                      ? realtime_dispatch(a.state, a.specs, act, EnergyWh{a.contracted[at(l)]}, w.market, true, sp)
                      : realtime_dispatch(a.state, a.specs, act, EnergyWh{0}, w.market, false);
  a.state = rt.state;
  a.meter[at(l)] = rt.dispatch;
  a.load_hist.append(act.load);
  a.pv_hist.append(act.pv);
  a.heat_hist.append(act.heat);
  a.cop_hist.append(act.cop);
  a.pending_orders.clear();
  if (!w.lem_enabled || l + 1 >= w.length) return;

  const auto& hp = a.agent.hems;
  const std::int64_t H = std::min(w.engine.plan_horizon_steps, w.length - (l + 1));
  const Timestep start = now + 1;
  PlanForecasts fc;
  fc.start = start;
  fc.load = forecast_values(hp.fc_load, a.load_hist, a.load, l + 1, H, Unit::Wh);
  fc.pv = forecast_values(hp.fc_pv, a.pv_hist, a.pv, l + 1, H, Unit::Wh);
  fc.heat = forecast_values(hp.fc_heat, a.heat_hist, a.heat, l + 1, H, Unit::WhTh);
  fc.cop = forecast_values(hp.fc_hp, a.cop_hist, a.cop, l + 1, H, Unit::CentiCop);
  for (auto& c : fc.cop) c = std::max<std::int64_t>(c, 100);
  // Slots that never cleared are priced pessimistically for each side: what
  // the final gate would pay or charge.
  const auto buy = forecast_price_naive(w.buy_prices, start, H, w.market.energy_price_buy);
  const auto sell = forecast_price_naive(w.sell_prices, start, H, w.market.feed_in_tariff);
  const auto lo = w.market.lem_price_floor.value;
  const auto hi = w.market.lem_price_cap.value;
  for (std::int64_t i = 0; i < H; ++i) {
    fc.price_buy.push_back(std::clamp(buy[i], lo, hi));
    fc.price_sell.push_back(std::clamp(sell[i], lo, hi));
  }
  if (a.specs.ev) {
    const auto ev = forecast_ev_close(a.state.ev_present, a.ev_next_departure[at(l)], EnergyWh{a.specs.ev->capacity_wh},
                                      start, H);
    fc.ev_available.assign(ev.availability.values().begin(), ev.availability.values().end());
    fc.ev_requirement = ev.requirement;
  } else {
    fc.ev_available.assign(at(H), 0);
  }

  const DispatchPlan plan = a.specs.has_storage() ? plan_schedule(a.state, a.specs, fc, a.committed, w.market)
                                                  : passive_plan(fc);
  const Setpoints next_sp{plan.batt_charge[0] - plan.batt_discharge[0], plan.ev_charge[0], plan.hp_elec[0],
                          plan.pv_curtail[0]};
  a.setpoints[at(l + 1)] = next_sp;

  // What the agent can deliver at now+1 if the forecasts hold; this is what
  // it contracts at the final gate.
  std::int64_t ev_next = 0;
  if (a.specs.ev) {
    const auto dep = a.ev_next_departure[at(l)];
    ev_next = a.state.ev_present && !(dep && *dep <= start) ? 0 : -1;
  }
  const Actuals expect{start,   fc.load[0], fc.pv[0], fc.heat[0], fc.cop[0], ev_next,
                       a.state.ev_present ? a.ev_next_departure[at(l)] : std::nullopt};
  const auto dry = realtime_dispatch(a.state, a.specs, expect, plan.net(start), w.market, true, &next_sp);
  a.deliverable[at(l + 1)] = dry.dispatch.net();
  a.pending_orders = make_orders(plan, a.committed, a.agent.hems, now, w.market, a.agent.id);
}

void cycle(World& w, Timestep now, WorkerPool& pool) {
  const std::int64_t l = w.local(now);
  if (l < 0 || l >= w.length) throw Error(ErrorCode::UnitOutOfRange, fmt::format("step {} outside the episode", now.index));

  pool.run(static_cast<std::int64_t>(w.agents.size()), [&](std::int64_t i) { agent_phase(w, w.agents[at(i)], now); });

  std::map<std::int64_t, std::size_t> by_id;
  for (std::size_t i = 0; i < w.agents.size(); ++i) by_id[w.agents[i].agent.id] = i;

  if (w.lem_enabled) {
    // Orders are posted in agent-id order so sequence numbers do not depend
    // on how the agent phase was scheduled.
    for (auto& a : w.agents) {
      const Timestep last = std::min(now + a.agent.hems.trading_horizon_steps, w.end() - 1);
      for (Timestep T = now + 1; T <= last; T = T + 1) w.book.cancel_all(a.agent.id, T);
      for (const auto& o : a.pending_orders) w.book.post(o, now);
      a.pending_orders.clear();
    }

    std::map<std::int64_t, std::pair<std::int64_t, std::int64_t>> vwap;  // delivery -> (sum q*p, sum q)
    for (const Timestep T : w.book.open_deliveries()) {
      if (T <= now || T > now + kStepsPerDay || T >= w.end()) continue;
      auto res = w.book.clear(T, now);
      const auto lt = at(w.local(T));
      for (const auto& tr : res.trades) {
        auto& buyer = w.agents[by_id.at(tr.buyer)];
        auto& seller = w.agents[by_id.at(tr.seller)];
        // Results become part of each agent's committed position before its next phase.
        buyer.committed.add_trade(T, tr.qty, tr.price);
        seller.committed.add_trade(T, -tr.qty, tr.price);
        buyer.settlement[lt].lem_buy_qty += tr.qty;
        buyer.settlement[lt].lem_buy_cash += cash(tr.qty, tr.price);
        seller.settlement[lt].lem_sell_qty += tr.qty;
        seller.settlement[lt].lem_sell_cash += cash(tr.qty, tr.price);
        auto& [value, vol] = vwap[T.index];
        value += tr.qty.value * tr.price.value;
        vol += tr.qty.value;
        w.trades.push_back(tr);
      }
    }
    for (const auto& [t, v] : vwap) w.prices.record(Timestep{t}, PriceMct{div_round_half_away(v.first, v.second)});

    if (l + 1 < w.length) {
      const Timestep T = now + 1;
      std::int64_t bq = 0, bv = 0, sq = 0, sv = 0;
      for (auto& a : w.agents) {
        const auto residual = EnergyWh{a.deliverable[at(l + 1)]} - a.committed.net_traded(T);
        a.settlement[at(l + 1)] += wholesale_gate(residual, w.market);
        a.contracted[at(l + 1)] = a.deliverable[at(l + 1)];
        const auto& st = a.settlement[at(l + 1)];
        bq += st.lem_buy_qty.value + st.wholesale_buy_qty.value;
        bv += (st.lem_buy_cash.value + st.wholesale_buy_cash.value) * 100;
        sq += st.lem_sell_qty.value + st.wholesale_sell_qty.value;
        sv += (st.lem_sell_cash.value + st.wholesale_sell_cash.value) * 100;
      }
      if (bq > 0) w.buy_prices.record(T, PriceMct{div_round_half_away(bv, bq)});
      if (sq > 0) w.sell_prices.record(T, PriceMct{div_round_half_away(sv, sq)});
      w.book.close(T);
    }
  }

  std::vector<Dispatch> meters;
  meters.reserve(w.agents.size());
  for (auto& a : w.agents) {
    const auto metered = EnergyWh{a.meter[at(l)].net()};
    if (!w.lem_enabled) {
      // Without a LEM the retailer supplies and takes everything at delivery.
      a.settlement[at(l)] += wholesale_gate(metered, w.market);
      a.contracted[at(l)] = metered.value;
    }
    a.settlement[at(l)] += settle_balancing(metered, EnergyWh{a.contracted[at(l)]}, w.market, w.lem_enabled);
    meters.push_back(a.meter[at(l)]);
  }
  w.flow_w[at(l)] = transformer_flow(meters);
}

std::vector<std::int64_t> map_series(const TimeSeries& ts, std::int64_t burn_in, std::int64_t length) {
  std::vector<std::int64_t> out(at(length));
  const std::int64_t n = ts.size();
  for (std::int64_t l = 0; l < length; ++l) {
    const std::int64_t idx = l < burn_in ? n - burn_in + l : l - burn_in;
    out[at(l)] = ts[((idx % n) + n) % n];
  }
  return out;
}

}  // namespace

std::int64_t transformer_flow(std::span<const Dispatch> meters) {
  std::int64_t net = 0;
  for (const auto& m : meters) net = checked::add(net, m.net());
  return checked::mul(net, kStepsPerHour);
}

World make_world(const Scenario& scenario, const AgentRoster& roster, const ProfileSet& profiles,
                 const SimConfig& config, Week week, std::int64_t episode) {
  World w;
  w.week = week;
  w.burn_in_steps = config.engine.burn_in_days * kStepsPerDay;
  w.length = kStepsPerWeek + w.burn_in_steps;
  w.base = Timestep{episode * w.length};
  w.lem_enabled = scenario.lem_enabled;
  w.market = config.market;
  w.engine = config.engine;
  w.prices = PriceHistory(w.base);
  w.buy_prices = PriceHistory(w.base);
  w.sell_prices = PriceHistory(w.base);
  w.flow_w.assign(at(w.length), 0);

  const auto B = w.burn_in_steps;
  const auto L = w.length;
  for (const auto& agent : roster.agents) {
    AgentRuntime a;
    a.agent = agent;
    a.specs = specs_from_devices(agent.devices);
    a.state = initial_state(a.specs);
    a.load.assign(at(L), 0);
    a.pv.assign(at(L), 0);
    a.heat.assign(at(L), 0);
    a.cop.assign(at(L), 100);
    a.ev_state.assign(at(L), 0);
    a.ev_next_departure.assign(at(L), std::nullopt);
    if (const auto* fl = agent.find<FixedLoadSpec>()) a.load = map_series(profiles.get(fl->load_profile_id, week), B, L);
    if (a.specs.pv) {
      const auto cf = map_series(profiles.get(a.specs.pv->capacity_factor_profile_id, week), B, L);
      for (std::int64_t l = 0; l < L; ++l) a.pv[at(l)] = pv_energy_wh(a.specs.pv->peak_power_w, cf[at(l)]);
    }
    if (a.specs.hp) {
      const auto* hd = agent.find<HeatDemandSpec>();
      if (hd) a.heat = map_series(profiles.get(hd->heat_profile_id, week), B, L);
      a.cop = map_series(profiles.get(a.specs.hp->cop_profile_id, week), B, L);
    }
    if (a.specs.ev) {
      a.ev_state = map_series(profiles.get(a.specs.ev->availability_profile_id, week), B, L);
      std::optional<Timestep> next;
      for (std::int64_t l = L - 1; l >= 0; --l) {
        a.ev_next_departure[at(l)] = next;
        const bool away = a.ev_state[at(l)] < 0;
        const bool left_here = away && (l == 0 || a.ev_state[at(l - 1)] >= 0);
        if (left_here) next = w.base + l;
      }
    }
    a.load_hist = History(w.base);
    a.pv_hist = History(w.base);
    a.heat_hist = History(w.base);
    a.cop_hist = History(w.base);
    a.committed = CommittedPosition(w.base);
    a.setpoints.assign(at(L), std::nullopt);
    a.deliverable.assign(at(L), 0);
    a.contracted.assign(at(L), 0);
    a.meter.assign(at(L), Dispatch{});
    a.settlement.assign(at(L), SettlementRecord{});
    w.agents.push_back(std::move(a));
  }
  std::sort(w.agents.begin(), w.agents.end(),
            [](const AgentRuntime& x, const AgentRuntime& y) { return x.agent.id < y.agent.id; });
  return w;
}

void run_timestep_cycle(World& world, Timestep now, const EngineRunOptions& opts) {
  WorkerPool pool(opts.threads);
  cycle(world, now, pool);
}

RunResult run_scenario(const Scenario& scenario, const ProfileSet& profiles, const SimConfig& config,
                       const EngineRunOptions& opts) {
  for (const Week wk : scenario.weeks) {
    if (!profiles.covers(wk)) {
      throw Error(ErrorCode::ProfileMissing, fmt::format("no profiles for the {} week", to_string(wk)));
    }
  }
  const AgentRoster roster = assign_devices(scenario.topology, scenario.shares, profiles, scenario.seed, config,
                                            scenario.weeks);
  RunResult out;
  out.meta.scenario_id = scenario.id();
  out.meta.scenario = scenario;
  out.meta.lem_enabled = scenario.lem_enabled;
  out.meta.seed = scenario.seed;
  out.meta.burn_in_steps = config.engine.burn_in_days * kStepsPerDay;
  out.meta.aep_include_balancing = config.engine.aep_include_balancing;
  out.meta.market = config.market;
  out.meta.agent_count = static_cast<std::int64_t>(roster.agents.size());

  WorkerPool pool(opts.threads);
  for (std::size_t k = 0; k < scenario.weeks.size(); ++k) {
    World w = make_world(scenario, roster, profiles, config, scenario.weeks[k], static_cast<std::int64_t>(k));
    spdlog::debug("{} {} week, lem {}", out.meta.scenario_id, to_string(w.week), w.lem_enabled ? "on" : "off");
    for (std::int64_t l = 0; l < w.length; ++l) cycle(w, w.base + l, pool);

    const auto B = w.burn_in_steps;
    for (std::int64_t l = B; l < w.length; ++l) {
      for (const auto& a : w.agents) {
        LedgerRow row;
        row.week_pos = static_cast<std::int64_t>(k);
        row.step = l - B;
        row.t = w.base + l;
        row.agent_id = a.agent.id;
        row.dispatch = a.meter[at(l)];
        row.contracted = EnergyWh{a.contracted[at(l)]};
        row.settlement = a.settlement[at(l)];
        out.ledger.push_back(row);
      }
      out.flow_w.push_back(w.flow_w[at(l)]);
    }
    for (const auto& tr : w.trades) {
      if (w.local(tr.delivery_step) >= B) out.trades.push_back(tr);
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Persistence

namespace {

constexpr const char* kLedgerHeader =
    "week,step,t,agent,load_wh,pv_generated_wh,pv_curtailed_wh,pv_exported_wh,self_consumed_wh,batt_charge_wh,"
    "batt_discharge_wh,ev_charge_wh,hp_elec_wh,heat_unserved_wh_th,grid_import_wh,grid_export_wh,contracted_wh,"
    "lem_buy_wh,lem_buy_ueur,lem_sell_wh,lem_sell_ueur,wholesale_buy_wh,wholesale_buy_ueur,wholesale_sell_wh,"
    "wholesale_sell_ueur,balancing_buy_wh,balancing_buy_ueur,balancing_sell_wh,balancing_sell_ueur";
constexpr const char* kTradesHeader = "delivery_step,clearing_step,buyer,seller,qty_wh,price_mct";
constexpr const char* kFlowHeader = "week,step,flow_w";

std::ofstream open_out(const std::filesystem::path& p) {
  std::ofstream f(p, std::ios::binary | std::ios::trunc);
  if (!f) throw Error(ErrorCode::IoError, fmt::format("cannot write {}", p.string()));
  return f;
}

std::ifstream open_in(const std::filesystem::path& p) {
  std::ifstream f(p, std::ios::binary);
  if (!f) throw Error(ErrorCode::IoError, fmt::format("cannot read {}", p.string()));
  return f;
}

std::vector<std::int64_t> split_ints(const std::string& line, std::size_t expected, const std::string& file) {
  std::vector<std::int64_t> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) {
    try {
      std::size_t pos = 0;
      out.push_back(std::stoll(cell, &pos));
      if (pos != cell.size()) throw std::invalid_argument(cell);
    } catch (const std::exception&) {
      throw Error(ErrorCode::ParseError, fmt::format("{}: bad value '{}'", file, cell));
    }
  }
  if (out.size() != expected) throw Error(ErrorCode::ParseError, fmt::format("{}: expected {} columns", file, expected));
  return out;
}

nlohmann::json market_to_json(const MarketParams& m) {
  return {{"energy_price_buy_mct", m.energy_price_buy.value},
          {"feed_in_tariff_mct", m.feed_in_tariff.value},
          {"levies_mct", m.levies.value},
          {"balancing_buy_mct", m.balancing_buy.value},
          {"balancing_sell_mct", m.balancing_sell.value},
          {"lem_price_floor_mct", m.lem_price_floor.value},
          {"lem_price_cap_mct", m.lem_price_cap.value},
          {"clearing_horizon_steps", m.clearing_horizon_steps},
          {"clearing_interval_steps", m.clearing_interval_steps}};
}

MarketParams market_from_json(const nlohmann::json& j) {
  MarketParams m;
  m.energy_price_buy = PriceMct{j.at("energy_price_buy_mct").get<std::int64_t>()};
  m.feed_in_tariff = PriceMct{j.at("feed_in_tariff_mct").get<std::int64_t>()};
  m.levies = PriceMct{j.at("levies_mct").get<std::int64_t>()};
  m.balancing_buy = PriceMct{j.at("balancing_buy_mct").get<std::int64_t>()};
  m.balancing_sell = PriceMct{j.at("balancing_sell_mct").get<std::int64_t>()};
  m.lem_price_floor = PriceMct{j.at("lem_price_floor_mct").get<std::int64_t>()};
  m.lem_price_cap = PriceMct{j.at("lem_price_cap_mct").get<std::int64_t>()};
  m.clearing_horizon_steps = j.at("clearing_horizon_steps").get<std::int64_t>();
  m.clearing_interval_steps = j.at("clearing_interval_steps").get<std::int64_t>();
  return m;
}

}  // namespace

void write_run_result(const RunResult& r, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::IoError, fmt::format("cannot create {}: {}", dir.string(), ec.message()));

  {
    auto f = open_out(dir / "ledger.csv");
    f << kLedgerHeader << '\n';
    for (const auto& row : r.ledger) {
      const auto& d = row.dispatch;
      const auto& s = row.settlement;
      f << fmt::format("{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},", row.week_pos, row.step, row.t.index,
                       row.agent_id, d.load, d.pv_generated, d.pv_curtailed, d.pv_exported(), d.self_consumed(),
                       d.batt_charge, d.batt_discharge, d.ev_charge, d.hp_elec, d.heat_unserved, d.grid_import,
                       d.grid_export, row.contracted.value)
        << fmt::format("{},{},{},{},{},{},{},{},{},{},{},{}\n", s.lem_buy_qty.value, s.lem_buy_cash.value,
                       s.lem_sell_qty.value, s.lem_sell_cash.value, s.wholesale_buy_qty.value,
                       s.wholesale_buy_cash.value, s.wholesale_sell_qty.value, s.wholesale_sell_cash.value,
                       s.balancing_buy_qty.value, s.balancing_buy_cash.value, s.balancing_sell_qty.value,
                       s.balancing_sell_cash.value);
    }
  }
  {
    auto f = open_out(dir / "trades.csv");
    f << kTradesHeader << '\n';
    for (const auto& t : r.trades) {
      f << fmt::format("{},{},{},{},{},{}\n", t.delivery_step.index, t.clearing_step.index, t.buyer, t.seller,
                       t.qty.value, t.price.value);
    }
  }
  {
    auto f = open_out(dir / "flow.csv");
    f << kFlowHeader << '\n';
    for (std::size_t i = 0; i < r.flow_w.size(); ++i) {
      f << fmt::format("{},{},{}\n", i / kStepsPerWeek, i % kStepsPerWeek, r.flow_w[i]);
    }
  }
  {
    nlohmann::ordered_json meta;
    meta["scenario_id"] = r.meta.scenario_id;
    meta["scenario"] = scenario_to_json(r.meta.scenario);
    meta["lem_enabled"] = r.meta.lem_enabled;
    meta["seed"] = r.meta.seed;
    meta["burn_in_steps"] = r.meta.burn_in_steps;
    meta["clearing_rule"] = r.meta.clearing_rule;
    meta["aep_include_balancing"] = r.meta.aep_include_balancing;
    meta["agent_count"] = r.meta.agent_count;
    meta["market"] = market_to_json(r.meta.market);
    auto f = open_out(dir / "meta.json");
    f << meta.dump(2) << '\n';
  }
}

RunResult read_run_result(const std::filesystem::path& dir) {
  RunResult r;
  {
    auto f = open_in(dir / "meta.json");
    nlohmann::json meta;
    try {
      meta = nlohmann::json::parse(f);
      r.meta.scenario_id = meta.at("scenario_id").get<std::string>();
      r.meta.scenario = scenario_from_json(meta.at("scenario"));
      r.meta.lem_enabled = meta.at("lem_enabled").get<bool>();
      r.meta.seed = meta.at("seed").get<std::uint64_t>();
      r.meta.burn_in_steps = meta.at("burn_in_steps").get<std::int64_t>();
      r.meta.clearing_rule = meta.at("clearing_rule").get<std::string>();
      r.meta.aep_include_balancing = meta.at("aep_include_balancing").get<bool>();
      r.meta.agent_count = meta.at("agent_count").get<std::int64_t>();
      r.meta.market = market_from_json(meta.at("market"));
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::ParseError, fmt::format("{}: {}", (dir / "meta.json").string(), e.what()));
    }
  }
  auto read_rows = [&](const char* name, const char* header, std::size_t cols, auto&& on_row) {
    auto f = open_in(dir / name);
    std::string line;
    if (!std::getline(f, line) || line != header) {
      throw Error(ErrorCode::ParseError, fmt::format("{}: unexpected header", (dir / name).string()));
    }
    while (std::getline(f, line)) {
      if (line.empty()) continue;
      on_row(split_ints(line, cols, name));
    }
  };
  read_rows("ledger.csv", kLedgerHeader, 29, [&](const std::vector<std::int64_t>& v) {
    LedgerRow row;
    row.week_pos = v[0];
    row.step = v[1];
    row.t = Timestep{v[2]};
    row.agent_id = v[3];
    auto& d = row.dispatch;
    d.load = v[4];
    d.pv_generated = v[5];
    d.pv_curtailed = v[6];
    d.batt_charge = v[9];
    d.batt_discharge = v[10];
    d.ev_charge = v[11];
    d.hp_elec = v[12];
    d.heat_unserved = v[13];
    d.grid_import = v[14];
    d.grid_export = v[15];
    row.contracted = EnergyWh{v[16]};
    auto& s = row.settlement;
    s.lem_buy_qty = EnergyWh{v[17]};
    s.lem_buy_cash = CashMicroEur{v[18]};
    s.lem_sell_qty = EnergyWh{v[19]};
    s.lem_sell_cash = CashMicroEur{v[20]};
    s.wholesale_buy_qty = EnergyWh{v[21]};
    s.wholesale_buy_cash = CashMicroEur{v[22]};
    s.wholesale_sell_qty = EnergyWh{v[23]};
    s.wholesale_sell_cash = CashMicroEur{v[24]};
    s.balancing_buy_qty = EnergyWh{v[25]};
    s.balancing_buy_cash = CashMicroEur{v[26]};
    s.balancing_sell_qty = EnergyWh{v[27]};
    s.balancing_sell_cash = CashMicroEur{v[28]};
    r.ledger.push_back(row);
  });
  read_rows("trades.csv", kTradesHeader, 6, [&](const std::vector<std::int64_t>& v) {
    r.trades.push_back(Trade{Timestep{v[0]}, Timestep{v[1]}, v[2], v[3], EnergyWh{v[4]}, PriceMct{v[5]}});
  });
  read_rows("flow.csv", kFlowHeader, 3, [&](const std::vector<std::int64_t>& v) { r.flow_w.push_back(v[2]); });
  return r;
}

}  // namespace lemsim
