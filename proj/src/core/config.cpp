#include "lemsim/core/config.hpp"

#include <fstream>

#include <fmt/format.h>

#include "lemsim/core/error.hpp"

namespace lemsim {

using nlohmann::json;

namespace {

const json& require(const json& obj, const char* key, std::string_view where) {
  auto it = obj.find(key);
  if (it == obj.end()) throw Error(ErrorCode::MissingField, fmt::format("{}.{} is required", where, key));
  return *it;
}

template <class T>
T get_or(const json& obj, const char* key, T fallback) {
  auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) return fallback;
  try {
    return it->get<T>();
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ParseError, fmt::format("field '{}': {}", key, e.what()));
  }
}

PriceMct price_or(const json& obj, const char* key, PriceMct fallback) {
  auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) return fallback;
  if (!it->is_number()) throw Error(ErrorCode::ParseError, fmt::format("price '{}' must be a number in ct/kWh", key));
  return price_from_ct(it->get<double>());
}

double ct(PriceMct p) { return static_cast<double>(p.value) / 1000.0; }

MarketParams parse_market(const json& j) {
  MarketParams m;
  if (j.is_null()) return m;
  m.energy_price_buy = price_or(j, "energy_price_buy", m.energy_price_buy);
  m.feed_in_tariff = price_or(j, "feed_in_tariff", m.feed_in_tariff);
  m.levies = price_or(j, "levies", m.levies);
  m.balancing_buy = price_or(j, "balancing_buy", m.balancing_buy);
  m.balancing_sell = price_or(j, "balancing_sell", m.balancing_sell);
  m.lem_price_floor = price_or(j, "lem_price_floor", m.lem_price_floor);
  m.lem_price_cap = price_or(j, "lem_price_cap", m.lem_price_cap);
  m.clearing_horizon_steps = get_or<std::int64_t>(j, "clearing_horizon_steps", m.clearing_horizon_steps);
  m.clearing_interval_steps = get_or<std::int64_t>(j, "clearing_interval_steps", m.clearing_interval_steps);
  return m;
}

void parse_hems(const json& j, SimConfig& cfg) {
  if (j.is_null()) return;
  auto& h = cfg.hems;
  if (auto f = j.find("forecasts"); f != j.end()) {
    auto method = [&](const char* key, ForecastMethod fallback) {
      auto it = f->find(key);
      return it == f->end() ? fallback : forecast_method_from_string(it->get<std::string>());
    };
    h.fc_load = method("load", h.fc_load);
    h.fc_heat = method("heat", h.fc_heat);
    h.fc_pv = method("pv", h.fc_pv);
    h.fc_hp = method("hp", h.fc_hp);
    h.fc_ev = method("ev", h.fc_ev);
    h.fc_price = method("price", h.fc_price);
  }
  if (auto it = j.find("trading_horizon_steps"); it != j.end()) {
    if (it->is_array()) {
      if (it->size() != 2) throw Error(ErrorCode::ParseError, "trading_horizon_steps range must be [min, max]");
      cfg.trading_horizon_min = (*it)[0].get<std::int64_t>();
      cfg.trading_horizon_max = (*it)[1].get<std::int64_t>();
    } else {
      cfg.trading_horizon_min = cfg.trading_horizon_max = it->get<std::int64_t>();
    }
  }
  if (auto it = j.find("strategy"); it != j.end() && it->get<std::string>() != "linear") {
    throw Error(ErrorCode::UnitOutOfRange, "only the linear trading strategy is supported");
  }
}

GridTopology parse_topology(const json& j) {
  if (j.is_string()) return default_topology(topology_from_string(j.get<std::string>()));
  auto t = default_topology(topology_from_string(require(j, "name", "topologies[]").get<std::string>()));
  t.transformer_kva = get_or(j, "transformer_kva", t.transformer_kva);
  t.residential_count = get_or(j, "residential_count", t.residential_count);
  t.non_residential_count = get_or(j, "non_residential_count", t.non_residential_count);
  t.annual_elec_mwh = get_or(j, "annual_elec_mwh", t.annual_elec_mwh);
  t.annual_heat_mwh = get_or(j, "annual_heat_mwh", t.annual_heat_mwh);
  t.annual_ev_mwh = get_or(j, "annual_ev_mwh", t.annual_ev_mwh);
  if (t.residential_count < 0 || t.non_residential_count < 0 || t.residential_count + t.non_residential_count == 0) {
    throw Error(ErrorCode::UnitOutOfRange, "topology needs at least one building");
  }
  return t;
}

Shares parse_shares(const json& j) {
  Shares s;
  s.pv = require(j, "pv", "scenarios[]").get<int>();
  s.ev = require(j, "ev", "scenarios[]").get<int>();
  s.hp = require(j, "hp", "scenarios[]").get<int>();
  for (int v : {s.pv, s.ev, s.hp}) {
    if (!is_valid_share(v)) throw Error(ErrorCode::UnitOutOfRange, fmt::format("share {} is not a multiple of 25 in [0, 100]", v));
  }
  if (s.pv == 0) throw Error(ErrorCode::UnitOutOfRange, "scenarios without PV are not runnable");
  return s;
}

DeviceDefaults parse_devices(const json& j) {
  DeviceDefaults d;
  if (j.is_null()) return d;
  d.pv_peak_w = get_or(j, "pv_peak_w", d.pv_peak_w);
  d.battery_capacity_wh = get_or(j, "battery_capacity_wh", d.battery_capacity_wh);
  d.battery_power_w = get_or(j, "battery_power_w", d.battery_power_w);
  d.battery_eta_charge = get_or(j, "battery_eta_charge", d.battery_eta_charge);
  d.battery_eta_discharge = get_or(j, "battery_eta_discharge", d.battery_eta_discharge);
  d.battery_soc0_fraction = get_or(j, "battery_soc0_fraction", d.battery_soc0_fraction);
  d.ev_capacity_wh = get_or(j, "ev_capacity_wh", d.ev_capacity_wh);
  d.ev_charge_power_w = get_or(j, "ev_charge_power_w", d.ev_charge_power_w);
  d.ev_eta_charge = get_or(j, "ev_eta_charge", d.ev_eta_charge);
  d.hp_min_thermal_w = get_or(j, "hp_min_thermal_w", d.hp_min_thermal_w);
  d.hp_storage_capacity_wh_th = get_or(j, "hp_storage_capacity_wh_th", d.hp_storage_capacity_wh_th);
  d.hp_storage_loss_per_step = get_or(j, "hp_storage_loss_per_step", d.hp_storage_loss_per_step);
  d.hp_storage_soc0_fraction = get_or(j, "hp_storage_soc0_fraction", d.hp_storage_soc0_fraction);

  // Reuse the per-device checks on a representative spec.
  validate_device(PvSpec{d.pv_peak_w, "pv"});
  validate_device(BatterySpec{d.battery_capacity_wh, d.battery_power_w, d.battery_eta_charge, d.battery_eta_discharge, 0});
  validate_device(EvSpec{d.ev_capacity_wh, d.ev_charge_power_w, d.ev_eta_charge, "ev"});
  validate_device(HpSpec{d.hp_min_thermal_w, "cop", d.hp_storage_capacity_wh_th, d.hp_storage_loss_per_step, 0});
  for (double f : {d.battery_soc0_fraction, d.hp_storage_soc0_fraction}) {
    if (!(f >= 0.0 && f <= 1.0)) throw Error(ErrorCode::UnitOutOfRange, "initial state fractions must be in [0, 1]");
  }
  return d;
}

ProfileOptions parse_profiles(const json& j) {
  ProfileOptions p;
  if (j.is_null()) return p;
  auto source = get_or<std::string>(j, "source", "synthetic");
  if (source == "synthetic") {
    p.source = ProfileSource::Synthetic;
  } else if (source == "csv") {
    p.source = ProfileSource::Csv;
    p.csv_dir = require(j, "dir", "profiles").get<std::string>();
  } else {
    throw Error(ErrorCode::UnitOutOfRange, fmt::format("unknown profile source '{}'", source));
  }
  p.household_kwh = get_or(j, "household_kwh", p.household_kwh);
  p.household_heat_kwh_th = get_or(j, "household_heat_kwh_th", p.household_heat_kwh_th);
  if (auto c = j.find("cop_centi"); c != j.end()) {
    p.cop_summer = get_or(*c, "summer", p.cop_summer);
    p.cop_transition = get_or(*c, "transition", p.cop_transition);
    p.cop_winter = get_or(*c, "winter", p.cop_winter);
  }
  if (p.household_kwh <= 0 || p.household_heat_kwh_th <= 0) {
    throw Error(ErrorCode::UnitOutOfRange, "annual demands must be > 0");
  }
  for (auto c : {p.cop_summer, p.cop_transition, p.cop_winter}) {
    if (c < 100 || c > 1000) throw Error(ErrorCode::UnitOutOfRange, "COP must be within [1, 10]");
  }
  return p;
}

EngineOptions parse_engine(const json& j) {
  EngineOptions e;
  if (j.is_null()) return e;
  e.burn_in_days = get_or(j, "burn_in_days", e.burn_in_days);
  e.plan_horizon_steps = get_or(j, "plan_horizon_steps", e.plan_horizon_steps);
  e.aep_include_balancing = get_or(j, "aep_include_balancing", e.aep_include_balancing);
  if (e.burn_in_days < 0 || e.burn_in_days > 7) throw Error(ErrorCode::UnitOutOfRange, "burn_in_days must be in [0, 7]");
  if (e.plan_horizon_steps < 1 || e.plan_horizon_steps > kStepsPerDay) {
    throw Error(ErrorCode::UnitOutOfRange, "plan_horizon_steps must be in [1, 96]");
  }
  return e;
}

const json& field(const json& raw, const char* key) {
  static const json null_value;
  auto it = raw.find(key);
  return it == raw.end() ? null_value : *it;
}

}  // namespace

SimConfig validate_config(const json& raw) {
  if (!raw.is_null() && !raw.is_object()) throw Error(ErrorCode::ParseError, "config must be a JSON object");
  const json doc = raw.is_null() ? json::object() : raw;

  SimConfig cfg;
  try {
    cfg.market = parse_market(field(doc, "market"));
    cfg.market.validate();
    parse_hems(field(doc, "hems"), cfg);
    if (cfg.trading_horizon_min < kMinTradingHorizon || cfg.trading_horizon_max > kMaxTradingHorizon ||
        cfg.trading_horizon_min > cfg.trading_horizon_max) {
      throw Error(ErrorCode::UnitOutOfRange, "trading horizon range must lie within [12, 96]");
    }
    cfg.hems.trading_horizon_steps = cfg.trading_horizon_max;
    cfg.hems.validate();

    if (auto it = doc.find("topologies"); it != doc.end()) {
      for (const auto& t : *it) cfg.topologies.push_back(parse_topology(t));
    } else {
      for (auto n : {TopologyName::Countryside, TopologyName::Rural, TopologyName::Suburban, TopologyName::Urban}) {
        cfg.topologies.push_back(default_topology(n));
      }
    }
    if (auto it = doc.find("weeks"); it != doc.end()) {
      for (const auto& w : *it) cfg.weeks.push_back(week_from_string(w.get<std::string>()));
      if (cfg.weeks.empty()) throw Error(ErrorCode::UnitOutOfRange, "weeks must not be empty");
    } else {
      cfg.weeks.assign(std::begin(kAllWeeks), std::end(kAllWeeks));
    }
    cfg.seed = get_or<std::uint64_t>(doc, "seed", cfg.seed);
    if (auto it = doc.find("scenarios"); it != doc.end()) {
      for (const auto& s : *it) cfg.scenario_shares.push_back(parse_shares(s));
    }
    cfg.devices = parse_devices(field(doc, "devices"));
    cfg.profiles = parse_profiles(field(doc, "profiles"));
    cfg.engine = parse_engine(field(doc, "engine"));
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ParseError, e.what());
  }
  return cfg;
}

SimConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, fmt::format("cannot open config {}", path.string()));
  json raw;
  try {
    in >> raw;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ParseError, fmt::format("{}: {}", path.string(), e.what()));
  }
  return validate_config(raw);
}

json to_json(const SimConfig& cfg) {
  json j;
  const auto& m = cfg.market;
  j["market"] = {{"energy_price_buy", ct(m.energy_price_buy)},
                 {"feed_in_tariff", ct(m.feed_in_tariff)},
                 {"levies", ct(m.levies)},
                 {"balancing_buy", ct(m.balancing_buy)},
                 {"balancing_sell", ct(m.balancing_sell)},
                 {"lem_price_floor", ct(m.lem_price_floor)},
                 {"lem_price_cap", ct(m.lem_price_cap)},
                 {"clearing_horizon_steps", m.clearing_horizon_steps},
                 {"clearing_interval_steps", m.clearing_interval_steps}};
  const auto& h = cfg.hems;
  j["hems"] = {{"forecasts",
                {{"load", to_string(h.fc_load)},
                 {"heat", to_string(h.fc_heat)},
                 {"pv", to_string(h.fc_pv)},
                 {"hp", to_string(h.fc_hp)},
                 {"ev", to_string(h.fc_ev)},
                 {"price", to_string(h.fc_price)}}},
               {"trading_horizon_steps", {cfg.trading_horizon_min, cfg.trading_horizon_max}},
               {"strategy", "linear"}};
  j["topologies"] = json::array();
  for (const auto& t : cfg.topologies) {
    j["topologies"].push_back({{"name", to_string(t.name)},
                               {"transformer_kva", t.transformer_kva},
                               {"residential_count", t.residential_count},
                               {"non_residential_count", t.non_residential_count},
                               {"annual_elec_mwh", t.annual_elec_mwh},
                               {"annual_heat_mwh", t.annual_heat_mwh},
                               {"annual_ev_mwh", t.annual_ev_mwh}});
  }
  j["weeks"] = json::array();
  for (auto w : cfg.weeks) j["weeks"].push_back(to_string(w));
  j["seed"] = cfg.seed;
  if (!cfg.scenario_shares.empty()) {
    j["scenarios"] = json::array();
    for (const auto& s : cfg.scenario_shares) j["scenarios"].push_back({{"pv", s.pv}, {"ev", s.ev}, {"hp", s.hp}});
  }
  const auto& d = cfg.devices;
  j["devices"] = {{"pv_peak_w", d.pv_peak_w},
                  {"battery_capacity_wh", d.battery_capacity_wh},
                  {"battery_power_w", d.battery_power_w},
                  {"battery_eta_charge", d.battery_eta_charge},
                  {"battery_eta_discharge", d.battery_eta_discharge},
                  {"battery_soc0_fraction", d.battery_soc0_fraction},
                  {"ev_capacity_wh", d.ev_capacity_wh},
                  {"ev_charge_power_w", d.ev_charge_power_w},
                  {"ev_eta_charge", d.ev_eta_charge},
                  {"hp_min_thermal_w", d.hp_min_thermal_w},
                  {"hp_storage_capacity_wh_th", d.hp_storage_capacity_wh_th},
                  {"hp_storage_loss_per_step", d.hp_storage_loss_per_step},
                  {"hp_storage_soc0_fraction", d.hp_storage_soc0_fraction}};
  const auto& p = cfg.profiles;
  j["profiles"] = {{"source", p.source == ProfileSource::Csv ? "csv" : "synthetic"},
                   {"household_kwh", p.household_kwh},
                   {"household_heat_kwh_th", p.household_heat_kwh_th},
                   {"cop_centi", {{"summer", p.cop_summer}, {"transition", p.cop_transition}, {"winter", p.cop_winter}}}};
  if (p.source == ProfileSource::Csv) j["profiles"]["dir"] = p.csv_dir.string();
  j["engine"] = {{"burn_in_days", cfg.engine.burn_in_days},
                 {"plan_horizon_steps", cfg.engine.plan_horizon_steps},
                 {"aep_include_balancing", cfg.engine.aep_include_balancing}};
  return j;
}

}  // namespace lemsim
