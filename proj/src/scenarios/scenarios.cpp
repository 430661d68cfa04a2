#include "lemsim/scenarios/scenarios.hpp"

#include <algorithm>
#include <fstream>
#include <numeric>

#include <fmt/format.h>

#include "lemsim/core/error.hpp"
#include "lemsim/core/rng.hpp"

namespace lemsim {

namespace {

constexpr int kShareLevels[] = {0, 25, 50, 75, 100};

template <class T>
std::int64_t count_devices(const AgentRoster& r) {
  return std::count_if(r.agents.begin(), r.agents.end(), [](const Agent& a) { return a.find<T>() != nullptr; });
}

std::vector<std::int64_t> shuffled_indices(std::uint64_t seed, std::string_view tech, std::int64_t n) {
  std::vector<std::int64_t> idx(static_cast<std::size_t>(n));
  std::iota(idx.begin(), idx.end(), 0);
  Rng rng(seed, tech);
  rng.shuffle(std::span<std::int64_t>(idx));
  return idx;
}

std::vector<bool> equipped(std::uint64_t seed, std::string_view tech, int share, std::int64_t n) {
  std::vector<bool> mask(static_cast<std::size_t>(n), false);
  const auto order = shuffled_indices(seed, tech, n);
  const auto k = share_count(share, n);
  for (std::int64_t i = 0; i < k; ++i) mask[static_cast<std::size_t>(order[static_cast<std::size_t>(i)])] = true;
  return mask;
}

void require_profile(const ProfileSet& profiles, const std::string& id, const std::vector<Week>& weeks) {
  for (Week w : weeks) {
    if (!profiles.has(id, w)) {
      throw Error(ErrorCode::ProfileMissing, fmt::format("profile '{}' missing for {} week", id, to_string(w)));
    }
  }
}

}  // namespace

std::int64_t AgentRoster::count_with_pv() const { return count_devices<PvSpec>(*this); }
std::int64_t AgentRoster::count_with_ev() const { return count_devices<EvSpec>(*this); }
std::int64_t AgentRoster::count_with_hp() const { return count_devices<HpSpec>(*this); }

std::int64_t share_count(int share_percent, std::int64_t households) {
  const std::int64_t num = static_cast<std::int64_t>(share_percent) * households;
  const std::int64_t q = num / 100;
  const std::int64_t r = num % 100;
  if (r > 50 || (r == 50 && q % 2 == 1)) return q + 1;
  return q;
}

std::vector<Scenario> enumerate_all_scenarios(const std::vector<GridTopology>& topologies,
                                              const std::vector<Week>& weeks, std::uint64_t seed) {
  std::vector<Scenario> out;
  out.reserve(topologies.size() * 125);
  for (const auto& topo : topologies) {
    for (int pv : kShareLevels) {
      for (int ev : kShareLevels) {
        for (int hp : kShareLevels) out.push_back(Scenario{topo, Shares{pv, ev, hp}, seed, weeks, true});
      }
    }
  }
  return out;
}

std::vector<Scenario> enumerate_scenarios(const std::vector<GridTopology>& topologies, const std::vector<Week>& weeks,
                                          std::uint64_t seed) {
  auto all = enumerate_all_scenarios(topologies, weeks, seed);
  std::erase_if(all, [](const Scenario& s) { return !s.runnable(); });
  return all;
}

std::vector<Scenario> scenarios_from_config(const SimConfig& cfg) {
  if (cfg.scenario_shares.empty()) return enumerate_scenarios(cfg.topologies, cfg.weeks, cfg.seed);
  std::vector<Scenario> out;
  for (const auto& topo : cfg.topologies) {
    for (const auto& sh : cfg.scenario_shares) out.push_back(Scenario{topo, sh, cfg.seed, cfg.weeks, true});
  }
  return out;
}

AgentRoster assign_devices(const GridTopology& topology, const Shares& shares, const ProfileSet& profiles,
                           std::uint64_t seed, const SimConfig& cfg, const std::vector<Week>& weeks) {
  for (int s : {shares.pv, shares.ev, shares.hp}) {
    if (!is_valid_share(s)) throw Error(ErrorCode::UnitOutOfRange, fmt::format("invalid share {}", s));
  }
  const auto n = topology.residential_count;
  const auto has_pv = equipped(seed, "assign/pv", shares.pv, n);
  const auto has_ev = equipped(seed, "assign/ev", shares.ev, n);
  const auto has_hp = equipped(seed, "assign/hp", shares.hp, n);
  Rng horizon_rng(seed, "assign/trading_horizon");
  const auto& dev = cfg.devices;

  AgentRoster roster;
  auto base_hems = cfg.hems;
  auto next_hems = [&] {
    auto h = base_hems;
    h.trading_horizon_steps = horizon_rng.uniform_int(cfg.trading_horizon_min, cfg.trading_horizon_max);
    return h;
  };

  for (std::int64_t i = 0; i < n; ++i) {
    const auto k = static_cast<std::size_t>(i);
    Agent a;
    a.id = i;
    a.building = BuildingClass::Residential;
    a.class_index = i;
    a.hems = next_hems();
    const auto load_id = profile_id::load(true, i);
    const auto heat_id = profile_id::heat(true, i);
    require_profile(profiles, load_id, weeks);
    a.devices.emplace_back(FixedLoadSpec{load_id});
    a.devices.emplace_back(HeatDemandSpec{heat_id});
    if (has_pv[k]) {
      require_profile(profiles, profile_id::kPv, weeks);
      a.devices.emplace_back(PvSpec{dev.pv_peak_w, profile_id::kPv});
      a.devices.emplace_back(BatterySpec{dev.battery_capacity_wh, dev.battery_power_w, dev.battery_eta_charge,
                                         dev.battery_eta_discharge,
                                         round_half_away(dev.battery_soc0_fraction * dev.battery_capacity_wh)});
    }
    if (has_ev[k]) {
      const auto ev_id = profile_id::ev(i);
      require_profile(profiles, ev_id, weeks);
      a.devices.emplace_back(EvSpec{dev.ev_capacity_wh, dev.ev_charge_power_w, dev.ev_eta_charge, ev_id});
    }
    if (has_hp[k]) {
      require_profile(profiles, heat_id, weeks);
      require_profile(profiles, profile_id::kCop, weeks);
      std::int64_t peak_heat_wh = 0;
      for (Week w : weeks) {
        const auto v = profiles.get(heat_id, w).values();
        peak_heat_wh = std::max(peak_heat_wh, *std::max_element(v.begin(), v.end()));
      }
      const auto rating = std::max(dev.hp_min_thermal_w, peak_heat_wh * kStepsPerHour);
      a.devices.emplace_back(HpSpec{rating, profile_id::kCop, dev.hp_storage_capacity_wh_th, dev.hp_storage_loss_per_step,
                                    round_half_away(dev.hp_storage_soc0_fraction * dev.hp_storage_capacity_wh_th)});
    }
    for (const auto& d : a.devices) validate_device(d);
    roster.agents.push_back(std::move(a));
  }

  for (std::int64_t j = 0; j < topology.non_residential_count; ++j) {
    Agent a;
    a.id = n + j;
    a.building = BuildingClass::NonResidential;
    a.class_index = j;
    a.hems = next_hems();
    const auto load_id = profile_id::load(false, j);
    require_profile(profiles, load_id, weeks);
    a.devices.emplace_back(FixedLoadSpec{load_id});
    a.devices.emplace_back(HeatDemandSpec{profile_id::heat(false, j)});
    roster.agents.push_back(std::move(a));
  }
  return roster;
}

AgentRoster assign_devices(const GridTopology& topology, const Shares& shares, const ProfileSet& profiles,
                           std::uint64_t seed) {
  std::vector<Week> weeks;
  for (Week w : kAllWeeks) {
    if (profiles.has(profile_id::kPv, w)) weeks.push_back(w);
  }
  return assign_devices(topology, shares, profiles, seed, SimConfig{}, weeks);
}

// ---------------------------------------------------------------------------

nlohmann::json scenario_to_json(const Scenario& s) {
  nlohmann::json j;
  j["id"] = s.id();
  j["topology"] = {{"name", to_string(s.topology.name)},
                   {"transformer_kva", s.topology.transformer_kva},
                   {"residential_count", s.topology.residential_count},
                   {"non_residential_count", s.topology.non_residential_count},
                   {"annual_elec_mwh", s.topology.annual_elec_mwh},
                   {"annual_heat_mwh", s.topology.annual_heat_mwh},
                   {"annual_ev_mwh", s.topology.annual_ev_mwh}};
  j["shares"] = {{"pv", s.shares.pv}, {"ev", s.shares.ev}, {"hp", s.shares.hp}};
  j["seed"] = s.seed;
  j["weeks"] = nlohmann::json::array();
  for (Week w : s.weeks) j["weeks"].push_back(to_string(w));
  j["lem_enabled"] = s.lem_enabled;
  return j;
}

Scenario scenario_from_json(const nlohmann::json& j) {
  auto need = [&](const char* key) -> const nlohmann::json& {
    auto it = j.find(key);
    if (it == j.end()) throw Error(ErrorCode::MissingField, fmt::format("scenario.{} is required", key));
    return *it;
  };
  try {
    Scenario s;
    const auto& t = need("topology");
    s.topology = default_topology(topology_from_string(t.at("name").get<std::string>()));
    s.topology.transformer_kva = t.value("transformer_kva", s.topology.transformer_kva);
    s.topology.residential_count = t.value("residential_count", s.topology.residential_count);
    s.topology.non_residential_count = t.value("non_residential_count", s.topology.non_residential_count);
    s.topology.annual_elec_mwh = t.value("annual_elec_mwh", s.topology.annual_elec_mwh);
    s.topology.annual_heat_mwh = t.value("annual_heat_mwh", s.topology.annual_heat_mwh);
    s.topology.annual_ev_mwh = t.value("annual_ev_mwh", s.topology.annual_ev_mwh);
    const auto& sh = need("shares");
    s.shares = {sh.at("pv").get<int>(), sh.at("ev").get<int>(), sh.at("hp").get<int>()};
    for (int v : {s.shares.pv, s.shares.ev, s.shares.hp}) {
      if (!is_valid_share(v)) throw Error(ErrorCode::UnitOutOfRange, fmt::format("invalid share {}", v));
    }
    s.seed = need("seed").get<std::uint64_t>();
    for (const auto& w : need("weeks")) s.weeks.push_back(week_from_string(w.get<std::string>()));
    s.lem_enabled = j.value("lem_enabled", true);
    return s;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ParseError, e.what());
  }
}

void write_manifest(const std::filesystem::path& path, const Scenario& s, const SimConfig& cfg) {
  auto j = scenario_to_json(s);
  j["config"] = to_json(cfg);
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::IoError, fmt::format("cannot write manifest {}", path.string()));
  out << j.dump(2) << '\n';
  if (!out) throw Error(ErrorCode::IoError, fmt::format("write failed for {}", path.string()));
}

ScenarioManifest read_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, fmt::format("cannot open manifest {}", path.string()));
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ParseError, fmt::format("{}: {}", path.string(), e.what()));
  }
  ScenarioManifest m{scenario_from_json(j), {}};
  if (auto it = j.find("config"); it != j.end()) {
    m.config = validate_config(*it);
  } else {
    m.config = validate_config(nlohmann::json::object());
  }
  return m;
}

}  // namespace lemsim
