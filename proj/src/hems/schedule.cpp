#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "lemsim/core/error.hpp"
#include "lemsim/hems/hems.hpp"
#include "lemsim/hems/lp.hpp"

namespace lemsim {

namespace {

// The LP works in kWh and EUR/kWh to keep coefficients near one.
constexpr double kWhPerWh = 1e-3;
constexpr double kEurPerMct = 1e-5;
constexpr double kUnmetPenaltyMct = 1e6;  // per kWh of EV target or heat left unserved
constexpr double kCurtailMct = 1.0;
// Among equally priced plans the EV charges as early as possible. The term is
// far below any price difference and is left out of objective_value.
constexpr double kEvDelayMct = 0.01;  // per kWh and step of delay

struct Index {
  int bus{-1}, batt{-1}, ev{-1}, ev_final{-1}, heat{-1};
};

std::size_t at(std::int64_t t) { return static_cast<std::size_t>(t); }

}  // namespace

AgentSpecs specs_from_devices(std::span<const DeviceSpec> devices) {
  AgentSpecs s;
  for (const auto& d : devices) {
    if (const auto* p = std::get_if<PvSpec>(&d)) s.pv = *p;
    if (const auto* p = std::get_if<BatterySpec>(&d)) s.battery = *p;
    if (const auto* p = std::get_if<EvSpec>(&d)) s.ev = *p;
    if (const auto* p = std::get_if<HpSpec>(&d)) s.hp = *p;
  }
  return s;
}

DeviceState initial_state(const AgentSpecs& specs) {
  DeviceState st;
  if (specs.battery) st.battery_soc = EnergyWh{specs.battery->soc0_wh};
  if (specs.ev) st.ev_soc = EnergyWh{specs.ev->capacity_wh};
  if (specs.hp) st.thermal_soc = EnergyWh{specs.hp->storage_soc0_wh_th};
  st.ev_present = true;
  return st;
}

std::int64_t to_ppm(double fraction) noexcept { return round_half_away(fraction * 1e6); }

void CommittedPosition::add_trade(Timestep delivery, EnergyWh signed_qty, PriceMct price) {
  if (delivery < start_) throw Error(ErrorCode::DeliveryInPast, "trade before the position window");
  const auto idx = static_cast<std::size_t>(delivery - start_);
  if (idx >= slots_.size()) slots_.resize(idx + 1);
  auto& s = slots_[idx];
  s.net = checked::add(s.net, signed_qty.value);
  const auto q = signed_qty.value < 0 ? -signed_qty.value : signed_qty.value;
  s.volume = checked::add(s.volume, q);
  s.value += static_cast<__int128>(q) * price.value;
}

EnergyWh CommittedPosition::net_traded(Timestep delivery) const {
  if (delivery < start_) return EnergyWh{0};
  const auto idx = static_cast<std::size_t>(delivery - start_);
  return idx < slots_.size() ? EnergyWh{slots_[idx].net} : EnergyWh{0};
}

std::optional<PriceMct> CommittedPosition::vwap(Timestep delivery) const {
  if (delivery < start_) return std::nullopt;
  const auto idx = static_cast<std::size_t>(delivery - start_);
  if (idx >= slots_.size() || slots_[idx].volume == 0) return std::nullopt;
  const auto& s = slots_[idx];
  const __int128 half = s.volume / 2;
  return PriceMct{static_cast<std::int64_t>((s.value + half) / s.volume)};
}

EnergyWh DispatchPlan::net(Timestep t) const {
  if (!covers(t)) return EnergyWh{0};
  return EnergyWh{buy[at(t - start)] - sell[at(t - start)]};
}

DispatchPlan plan_schedule(const DeviceState& state, const AgentSpecs& specs, const PlanForecasts& fc,
                           const CommittedPosition& committed, const MarketParams& params) {
  const std::int64_t H = fc.horizon();
  if (H < 1 || H > kStepsPerDay) throw Error(ErrorCode::UnitOutOfRange, "plan horizon must be in [1, 96]");
  for (const auto* v : {&fc.pv, &fc.price_buy, &fc.price_sell}) {
    if (static_cast<std::int64_t>(v->size()) != H) throw Error(ErrorCode::UnitOutOfRange, "forecast length mismatch");
  }
  const bool use_hp = specs.hp.has_value();
  if (use_hp && (static_cast<std::int64_t>(fc.heat.size()) != H || static_cast<std::int64_t>(fc.cop.size()) != H)) {
    throw Error(ErrorCode::UnitOutOfRange, "heat forecast length mismatch");
  }

  // EV charging chain: steps [0, D) before the known deadline inside the horizon.
  std::int64_t D = 0;
  if (specs.ev && state.ev_present && fc.ev_requirement && state.ev_soc.value < specs.ev->capacity_wh) {
    D = std::min<std::int64_t>(H, fc.ev_requirement->deadline - fc.start);
    if (static_cast<std::int64_t>(fc.ev_available.size()) < D) D = 0;
    bool any = false;
    for (std::int64_t t = 0; t < D; ++t) any = any || fc.ev_available[at(t)] != 0;
    if (!any) D = 0;
  }
  const bool use_ev = D > 0;
  const bool use_batt = specs.battery.has_value();

  const double eta_c = use_batt ? specs.battery->eta_charge : 1.0;
  const double eta_d = use_batt ? specs.battery->eta_discharge : 1.0;
  const double batt_p = use_batt ? static_cast<double>(energy_per_step_wh(specs.battery->power_w)) * kWhPerWh : 0.0;
  const double batt_cap = use_batt ? static_cast<double>(specs.battery->capacity_wh) * kWhPerWh : 0.0;
  const double ev_eta = use_ev ? specs.ev->eta_charge : 1.0;
  const double ev_p = use_ev ? static_cast<double>(energy_per_step_wh(specs.ev->charge_power_w)) * kWhPerWh : 0.0;
  const double ev_cap = use_ev ? static_cast<double>(specs.ev->capacity_wh) * kWhPerWh : 0.0;
  const double keep = use_hp ? 1.0 - specs.hp->storage_loss_per_step : 1.0;
  const double th_cap = use_hp ? static_cast<double>(specs.hp->storage_capacity_wh_th) * kWhPerWh : 0.0;
  const double hp_heat_max = use_hp ? static_cast<double>(energy_per_step_wh(specs.hp->max_thermal_w)) * kWhPerWh : 0.0;

  lp::Problem prob;
  std::vector<Index> row(at(H));
  for (std::int64_t t = 0; t < H; ++t) {
    const double rhs = static_cast<double>(committed.net_traded(fc.start + t).value + fc.pv[at(t)] - fc.load[at(t)]);
    row[at(t)].bus = prob.add_row(rhs * kWhPerWh);
    if (use_batt) row[at(t)].batt = prob.add_row(t == 0 ? static_cast<double>(state.battery_soc.value) * kWhPerWh : 0.0);
    if (use_ev && t < D) {
      row[at(t)].ev = prob.add_row(t == 0 ? static_cast<double>(state.ev_soc.value) * kWhPerWh : 0.0);
      if (t == D - 1) row[at(t)].ev_final = prob.add_row(ev_cap);
    }
    if (use_hp) {
      double rhs_h = -static_cast<double>(fc.heat[at(t)]) * kWhPerWh;
      if (t == 0) rhs_h += keep * static_cast<double>(state.thermal_soc.value) * kWhPerWh;
      row[at(t)].heat = prob.add_row(rhs_h);
    }
  }

  struct Cols {
    int rb, rs, curtail{-1}, c{-1}, d{-1}, s{-1}, e{-1}, es{-1}, h{-1}, hs{-1}, unmet_heat{-1};
  };
  std::vector<Cols> col(at(H));
  int ev_slack = -1;
  const double lev = static_cast<double>(params.levies.value);
  for (std::int64_t t = 0; t < H; ++t) {
    const auto& r = row[at(t)];
    auto& k = col[at(t)];
    const double big = (static_cast<double>(fc.load[at(t)] + fc.pv[at(t)] + std::abs(committed.net_traded(fc.start + t).value)) +
                        batt_p / kWhPerWh + ev_p / kWhPerWh + (use_hp ? hp_heat_max / kWhPerWh : 0.0) + 1000.0) *
                       kWhPerWh;
    k.rb = prob.add_column((static_cast<double>(fc.price_buy[at(t)]) + lev) * kEurPerMct, big, {{r.bus, -1.0}});
    k.rs = prob.add_column(-static_cast<double>(fc.price_sell[at(t)]) * kEurPerMct, big, {{r.bus, 1.0}});
    // Selling surplus is never worse than curtailing it unless the sell price is below the curtailment cost.
    if (fc.pv[at(t)] > 0 && static_cast<double>(fc.price_sell[at(t)]) < kCurtailMct) {
      k.curtail = prob.add_column(kCurtailMct * kEurPerMct, static_cast<double>(fc.pv[at(t)]) * kWhPerWh, {{r.bus, 1.0}});
    }
    if (use_batt) {
      k.c = prob.add_column(0.0, batt_p, {{r.bus, 1.0}, {r.batt, -eta_c}});
      k.d = prob.add_column(0.0, batt_p, {{r.bus, -1.0}, {r.batt, 1.0 / eta_d}});
      if (t + 1 < H) {
        k.s = prob.add_column(0.0, batt_cap, {{r.batt, 1.0}, {row[at(t + 1)].batt, -1.0}});
      } else {
        k.s = prob.add_column(0.0, batt_cap, {{r.batt, 1.0}});
      }
    }
    if (use_ev && t < D) {
      if (fc.ev_available[at(t)] != 0) {
        k.e = prob.add_column(kEvDelayMct * kEurPerMct * static_cast<double>(t), ev_p, {{r.bus, 1.0}, {r.ev, -ev_eta}});
      }
      if (t + 1 < D) {
        k.es = prob.add_column(0.0, ev_cap, {{r.ev, 1.0}, {row[at(t + 1)].ev, -1.0}});
      } else {
        k.es = prob.add_column(0.0, ev_cap, {{r.ev, 1.0}, {r.ev_final, 1.0}});
        ev_slack = prob.add_column(kUnmetPenaltyMct * kEurPerMct, ev_cap, {{r.ev_final, 1.0}});
      }
    }
    if (use_hp) {
      const double cop = static_cast<double>(fc.cop[at(t)]) / 100.0;
      k.h = prob.add_column(0.0, hp_heat_max / cop, {{r.bus, 1.0}, {r.heat, -cop}});
      if (t + 1 < H) {
        k.hs = prob.add_column(0.0, th_cap, {{r.heat, 1.0}, {row[at(t + 1)].heat, -keep}});
      } else {
        k.hs = prob.add_column(0.0, th_cap, {{r.heat, 1.0}});
      }
      if (fc.heat[at(t)] > energy_per_step_wh(specs.hp->max_thermal_w)) {
        k.unmet_heat = prob.add_column(kUnmetPenaltyMct * kEurPerMct, static_cast<double>(fc.heat[at(t)]) * kWhPerWh,
                                       {{r.heat, -1.0}});
      }
    }
  }

  const auto sol = lp::solve(prob);
  auto val = [&](int c) { return c < 0 ? 0.0 : sol.x[static_cast<std::size_t>(c)] / kWhPerWh; };
  auto wh = [&](int c) { return round_half_away(val(c)); };

  DispatchPlan plan;
  plan.start = fc.start;
  double tie_break = 0.0;
  for (std::int64_t t = 0; t < H; ++t) {
    const int e = col[at(t)].e;
    if (e >= 0) tie_break += prob.cost_[static_cast<std::size_t>(e)] * sol.x[static_cast<std::size_t>(e)];
  }
  plan.objective_value = CashMicroEur{round_half_away((sol.objective - tie_break) * 1e6)};
  for (auto* v : {&plan.pv_use, &plan.pv_curtail, &plan.batt_charge, &plan.batt_discharge, &plan.ev_charge,
                  &plan.hp_elec, &plan.buy, &plan.sell, &plan.battery_soc, &plan.ev_soc, &plan.thermal_soc}) {
    v->assign(at(H), 0);
  }

  std::int64_t soc_prev = state.battery_soc.value;
  std::int64_t ev_prev = state.ev_soc.value;
  std::int64_t th_prev = state.thermal_soc.value;
  for (std::int64_t t = 0; t < H; ++t) {
    const auto& k = col[at(t)];
    const std::int64_t pv = fc.pv[at(t)];
    const std::int64_t curtail = std::clamp<std::int64_t>(wh(k.curtail), 0, pv);
    std::int64_t c = 0, d = 0, e = 0, h = 0;
    if (use_batt) {
      const std::int64_t soc = std::clamp<std::int64_t>(wh(k.s), 0, specs.battery->capacity_wh);
      const std::int64_t p = energy_per_step_wh(specs.battery->power_w);
      const std::int64_t delta = soc - soc_prev;
      if (delta > 0) c = std::min(p, round_half_away(static_cast<double>(delta) / eta_c));
      if (delta < 0) d = std::min(p, round_half_away(static_cast<double>(-delta) * eta_d));
      plan.battery_soc[at(t)] = soc;
      soc_prev = soc;
    }
    if (specs.ev) {
      std::int64_t es = ev_prev;
      if (use_ev && t < D) {
        es = std::clamp<std::int64_t>(wh(k.es), ev_prev, specs.ev->capacity_wh);
        if (k.e < 0) es = ev_prev;
        const std::int64_t p = energy_per_step_wh(specs.ev->charge_power_w);
        e = std::min(p, round_half_away(static_cast<double>(es - ev_prev) / ev_eta));
      }
      plan.ev_soc[at(t)] = es;
      ev_prev = es;
    }
    if (use_hp) {
      // Derive the electricity from the rounded storage levels so the heat
      // balance stays within rounding of one Wh.
      const std::int64_t hs = std::clamp<std::int64_t>(wh(k.hs), 0, specs.hp->storage_capacity_wh_th);
      const double cop = static_cast<double>(fc.cop[at(t)]) / 100.0;
      const double need = static_cast<double>(hs) - keep * static_cast<double>(th_prev) +
                          static_cast<double>(fc.heat[at(t)]) - val(k.unmet_heat);
      h = std::max<std::int64_t>(0, round_half_away(need / cop));
      plan.thermal_soc[at(t)] = hs;
      th_prev = hs;
    }
    const std::int64_t use = pv - curtail;
    const std::int64_t net = fc.load[at(t)] - use + c - d + e + h;
    plan.pv_use[at(t)] = use;
    plan.pv_curtail[at(t)] = curtail;
    plan.batt_charge[at(t)] = c;
    plan.batt_discharge[at(t)] = d;
    plan.ev_charge[at(t)] = e;
    plan.hp_elec[at(t)] = h;
    plan.buy[at(t)] = std::max<std::int64_t>(net, 0);
    plan.sell[at(t)] = std::max<std::int64_t>(-net, 0);
  }
  plan.relaxed = ev_slack >= 0 && val(ev_slack) > 0.5;
  return plan;
}

std::vector<std::string> check_plan(const DispatchPlan& plan, const DeviceState& state, const AgentSpecs& specs,
                                    const PlanForecasts& fc) {
  std::vector<std::string> bad;
  constexpr double tol = 1.0 + 1e-6;
  const std::int64_t H = plan.horizon();
  if (H != fc.horizon()) bad.emplace_back("plan and forecast horizons differ");
  double soc = static_cast<double>(state.battery_soc.value);
  double ev = static_cast<double>(state.ev_soc.value);
  double th = static_cast<double>(state.thermal_soc.value);
  for (std::int64_t t = 0; t < std::min(H, fc.horizon()); ++t) {
    const auto i = at(t);
    auto fail = [&](std::string_view what) { bad.push_back(fmt::format("step {}: {}", t, what)); };
    for (auto v : {plan.pv_use[i], plan.pv_curtail[i], plan.batt_charge[i], plan.batt_discharge[i], plan.ev_charge[i],
                   plan.hp_elec[i], plan.buy[i], plan.sell[i]}) {
      if (v < 0) fail("negative flow");
    }
    if (plan.pv_use[i] + plan.pv_curtail[i] != fc.pv[i]) fail("pv split does not match generation");
    if (plan.pv_use[i] + plan.batt_discharge[i] + plan.buy[i] !=
        fc.load[i] + plan.batt_charge[i] + plan.ev_charge[i] + plan.hp_elec[i] + plan.sell[i]) {
      fail("bus balance violated");
    }
    if (specs.battery) {
      const auto& b = *specs.battery;
      const auto p = energy_per_step_wh(b.power_w);
      if (plan.batt_charge[i] > p || plan.batt_discharge[i] > p) fail("battery power limit");
      const auto s = static_cast<double>(plan.battery_soc[i]);
      if (s < 0 || s > static_cast<double>(b.capacity_wh)) fail("battery soc out of bounds");
      const double model = soc + b.eta_charge * static_cast<double>(plan.batt_charge[i]) -
                           static_cast<double>(plan.batt_discharge[i]) / b.eta_discharge;
      if (std::abs(s - model) > tol) fail("battery dynamics");
      soc = s;
    } else if (plan.batt_charge[i] != 0 || plan.batt_discharge[i] != 0) {
      fail("battery flow without battery");
    }
    if (specs.ev) {
      const auto& e = *specs.ev;
      const bool avail = state.ev_present && static_cast<std::int64_t>(fc.ev_available.size()) > t &&
                         fc.ev_available[i] != 0;
      if (plan.ev_charge[i] > (avail ? energy_per_step_wh(e.charge_power_w) : 0)) fail("ev charging limit");
      const auto s = static_cast<double>(plan.ev_soc[i]);
      if (s < 0 || s > static_cast<double>(e.capacity_wh)) fail("ev soc out of bounds");
      if (std::abs(s - ev - e.eta_charge * static_cast<double>(plan.ev_charge[i])) > tol) fail("ev dynamics");
      ev = s;
      if (fc.ev_requirement && !plan.relaxed && state.ev_present && fc.start + t + 1 == fc.ev_requirement->deadline &&
          s + tol < static_cast<double>(fc.ev_requirement->soc_target.value)) {
        fail("ev target missed");
      }
    } else if (plan.ev_charge[i] != 0) {
      fail("ev flow without ev");
    }
    if (specs.hp) {
      const auto& h = *specs.hp;
      const double cop = static_cast<double>(fc.cop[i]) / 100.0;
      const double cap = static_cast<double>(energy_per_step_wh(h.max_thermal_w));
      if (cop * static_cast<double>(plan.hp_elec[i]) > cap + cop * tol) fail("heat pump power limit");
      const auto s = static_cast<double>(plan.thermal_soc[i]);
      if (s < 0 || s > static_cast<double>(h.storage_capacity_wh_th)) fail("thermal soc out of bounds");
      const double needed = (s - (1.0 - h.storage_loss_per_step) * th + static_cast<double>(fc.heat[i])) / cop;
      if (std::abs(needed - static_cast<double>(plan.hp_elec[i])) > tol) fail("heat balance");
      th = s;
    } else if (plan.hp_elec[i] != 0) {
      fail("heat pump flow without heat pump");
    }
  }
  return bad;
}

}  // namespace lemsim
