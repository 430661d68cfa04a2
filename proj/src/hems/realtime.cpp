#include <algorithm>

#include "lemsim/hems/hems.hpp"

namespace lemsim {

namespace {

constexpr std::int64_t kPpm = 1000000;

std::int64_t ceil_div(std::int64_t a, std::int64_t b) { return a <= 0 ? 0 : (a + b - 1) / b; }

// Stored energy gained from `e` Wh at efficiency `eta` (ppm), rounded down.
std::int64_t gain(std::int64_t e, std::int64_t eta) { return e * eta / kPpm; }

// Largest input whose rounded-down gain does not exceed `room`.
std::int64_t max_input_for(std::int64_t room, std::int64_t eta) { return ((room + 1) * kPpm - 1) / eta; }

std::int64_t heat_from(std::int64_t elec, std::int64_t cop) { return elec * cop / 100; }

// Moves `value` toward `hi` (or `lo`) by at most |dev|, consuming dev.
void shift(std::int64_t& value, std::int64_t lo, std::int64_t hi, std::int64_t& dev) {
  if (dev > 0) {
    const auto step = std::min(dev, std::max<std::int64_t>(0, hi - value));
    value += step;
    dev -= step;
  } else if (dev < 0) {
    const auto step = std::min(-dev, std::max<std::int64_t>(0, value - lo));
    value -= step;
    dev += step;
  }
}

}  // namespace

FlexRange flex_range(const DeviceState& state, const AgentSpecs& specs, const Actuals& actual) {
  FlexRange r;
  r.pre = state;
  r.curtail_max = actual.pv;

  if (specs.battery) {
    const auto& b = *specs.battery;
    const auto p = energy_per_step_wh(b.power_w);
    const auto soc = state.battery_soc.value;
    r.batt_charge_max = std::clamp<std::int64_t>(max_input_for(b.capacity_wh - soc, to_ppm(b.eta_charge)), 0, p);
    r.batt_discharge_max = std::clamp<std::int64_t>(soc * to_ppm(b.eta_discharge) / kPpm, 0, p);
  }

  if (specs.ev) {
    const auto& e = *specs.ev;
    if (actual.ev_state < 0) {
      r.pre.ev_present = false;
    } else {
      r.pre.ev_present = true;
      if (actual.ev_state > 0) r.pre.ev_soc = EnergyWh{std::max<std::int64_t>(0, state.ev_soc.value - actual.ev_state)};
      const auto eta = to_ppm(e.eta_charge);
      const auto p = energy_per_step_wh(e.charge_power_w);
      const auto deficit = e.capacity_wh - r.pre.ev_soc.value;
      r.ev_max = std::clamp<std::int64_t>(max_input_for(deficit, eta), 0, p);
      if (actual.ev_next_departure) {
        const auto steps_left = std::max<std::int64_t>(1, *actual.ev_next_departure - actual.now);
        const auto later = (steps_left - 1) * gain(p, eta);
        const auto must_gain = std::max<std::int64_t>(0, deficit - later);
        r.ev_min = std::min(r.ev_max, ceil_div(must_gain * kPpm, eta));
      }
    }
  }

  if (specs.hp) {
    const auto& h = *specs.hp;
    const auto cap = energy_per_step_wh(h.max_thermal_w);
    const auto cop = std::max<std::int64_t>(1, actual.cop);
    const auto soc = state.thermal_soc.value;
    const auto decayed = soc * (kPpm - to_ppm(h.storage_loss_per_step)) / kPpm;
    const auto q = actual.heat;
    const auto heat_min = std::min(cap, std::max<std::int64_t>(0, q - decayed));
    const auto heat_max = std::max(heat_min, std::min(cap, h.storage_capacity_wh_th - decayed + q));
    r.hp_max = (heat_max * 100 + 99) / cop;
    r.hp_min = std::min(r.hp_max, ceil_div(heat_min * 100, cop));
    const auto hold = std::clamp<std::int64_t>(q + soc - decayed, heat_min, heat_max);
    r.hp_direct = std::clamp<std::int64_t>(ceil_div(hold * 100, cop), r.hp_min, r.hp_max);
  }
  return r;
}

RealtimeResult realtime_dispatch(const DeviceState& state, const AgentSpecs& specs, const Actuals& actual,
                                 EnergyWh committed_now, const MarketParams& /*params*/, bool lem_enabled,
                                 const Setpoints* planned) {
  const FlexRange r = flex_range(state, specs, actual);

  std::int64_t batt = 0;  // + charge, - discharge
  std::int64_t ev = lem_enabled ? r.ev_min : r.ev_max;
  std::int64_t hp = r.hp_direct;
  std::int64_t curtail = 0;
  if (lem_enabled && planned) {
    batt = std::clamp(planned->battery_net, -r.batt_discharge_max, r.batt_charge_max);
    ev = std::clamp(planned->ev_charge, r.ev_min, r.ev_max);
    hp = std::clamp(planned->hp_elec, r.hp_min, r.hp_max);
    curtail = std::clamp<std::int64_t>(planned->pv_curtail, 0, r.curtail_max);
  }

  const std::int64_t target = lem_enabled ? committed_now.value : 0;
  auto net_of = [&] { return actual.load - (actual.pv - curtail) + batt + ev + hp; };
  std::int64_t dev = target - net_of();
  shift(batt, -r.batt_discharge_max, r.batt_charge_max, dev);
  if (lem_enabled) shift(ev, r.ev_min, r.ev_max, dev);
  if (specs.hp) shift(hp, r.hp_min, r.hp_max, dev);
  if (lem_enabled) shift(curtail, 0, r.curtail_max, dev);

  RealtimeResult out;
  out.state = r.pre;
  auto& d = out.dispatch;
  d.load = actual.load;
  d.pv_generated = actual.pv;
  d.pv_curtailed = curtail;

  if (specs.battery) {
    const auto& b = *specs.battery;
    if (batt > 0) {
      d.batt_charge = batt;
      out.state.battery_soc += EnergyWh{gain(batt, to_ppm(b.eta_charge))};
    } else if (batt < 0) {
      d.batt_discharge = -batt;
      out.state.battery_soc -= EnergyWh{ceil_div(-batt * kPpm, to_ppm(b.eta_discharge))};
    }
  }
  if (specs.ev && r.pre.ev_present) {
    d.ev_charge = ev;
    out.state.ev_soc = EnergyWh{std::min(specs.ev->capacity_wh, r.pre.ev_soc.value + gain(ev, to_ppm(specs.ev->eta_charge)))};
  }
  if (specs.hp) {
    const auto& h = *specs.hp;
    d.hp_elec = hp;
    const auto decayed = state.thermal_soc.value * (kPpm - to_ppm(h.storage_loss_per_step)) / kPpm;
    auto soc = decayed + heat_from(hp, std::max<std::int64_t>(1, actual.cop)) - actual.heat;
    if (soc < 0) {
      d.heat_unserved = -soc;
      soc = 0;
    }
    out.state.thermal_soc = EnergyWh{std::min(soc, h.storage_capacity_wh_th)};
  }

  const std::int64_t net = net_of();
  d.grid_import = std::max<std::int64_t>(net, 0);
  d.grid_export = std::max<std::int64_t>(-net, 0);
  out.imbalance = EnergyWh{lem_enabled ? net - target : 0};
  return out;
}

}  // namespace lemsim
