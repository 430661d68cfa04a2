#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <vector>

#include <nlohmann/json.hpp>

#include "lemsim/core/params.hpp"

namespace lemsim {

/// Per-household device sizes. These are not part of the reference study
/// (sized there by a separate optimisation step) and are plain config values.
struct DeviceDefaults {
  std::int64_t pv_peak_w{8000};
  std::int64_t battery_capacity_wh{8000};
  std::int64_t battery_power_w{4000};
  double battery_eta_charge{0.95};
  double battery_eta_discharge{0.95};
  double battery_soc0_fraction{0.5};
  std::int64_t ev_capacity_wh{50000};
  std::int64_t ev_charge_power_w{11000};
  double ev_eta_charge{0.9};
  /// Lower bound for the heat pump rating; assignment raises it to the agent's peak heat demand.
  std::int64_t hp_min_thermal_w{6000};
  std::int64_t hp_storage_capacity_wh_th{12000};
  double hp_storage_loss_per_step{0.002};
  double hp_storage_soc0_fraction{0.5};

  bool operator==(const DeviceDefaults&) const = default;
};

enum class ProfileSource { Synthetic, Csv };

struct ProfileOptions {
  ProfileSource source{ProfileSource::Synthetic};
  std::filesystem::path csv_dir;
  std::int64_t household_kwh{2900};
  std::int64_t household_heat_kwh_th{15000};
  /// Per-week constant COP (x100).
  std::int64_t cop_summer{400};
  std::int64_t cop_transition{340};
  std::int64_t cop_winter{270};

  bool operator==(const ProfileOptions&) const = default;
};

struct EngineOptions {
  std::int64_t burn_in_days{2};
  std::int64_t plan_horizon_steps{96};
  bool aep_include_balancing{true};

  bool operator==(const EngineOptions&) const = default;
};

struct SimConfig {
  MarketParams market;
  HemsParams hems;
  std::int64_t trading_horizon_min{kMinTradingHorizon};
  std::int64_t trading_horizon_max{kMaxTradingHorizon};
  std::vector<GridTopology> topologies;
  std::vector<Week> weeks;
  std::uint64_t seed{1};
  /// Explicit share combinations; empty means the full 25 %-step matrix.
  std::vector<Shares> scenario_shares;
  DeviceDefaults devices;
  ProfileOptions profiles;
  EngineOptions engine;

  bool operator==(const SimConfig&) const = default;
};

/// Fills defaults and checks every invariant of the parsed document.
/// Prices are ct/kWh decimals in the file and milli-cents in memory.
SimConfig validate_config(const nlohmann::json& raw);

SimConfig load_config(const std::filesystem::path& path);

/// Inverse of validate_config; the output round-trips to an equal SimConfig.
nlohmann::json to_json(const SimConfig& cfg);

}  // namespace lemsim
