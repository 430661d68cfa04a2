#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "lemsim/core/units.hpp"

namespace lemsim {

/// Wholesale and local-market tariffs. Defaults are the German 2020-2023
/// averages the simulator is calibrated to.
struct MarketParams {
  PriceMct energy_price_buy{14700};
  PriceMct feed_in_tariff{8270};
  PriceMct levies{22970};
  PriceMct balancing_buy{15700};
  PriceMct balancing_sell{7270};
  std::int64_t clearing_horizon_steps{96};
  std::int64_t clearing_interval_steps{1};
  PriceMct lem_price_floor{8270};
  PriceMct lem_price_cap{14700};

  bool operator==(const MarketParams&) const = default;

  /// Throws InconsistentPrices / UnitOutOfRange.
  void validate() const;
};

enum class ForecastMethod { Naive, NaiveAverage, EvClose, Perfect };
enum class TradingStrategy { Linear };

std::string_view to_string(ForecastMethod m) noexcept;
ForecastMethod forecast_method_from_string(std::string_view s);

struct HemsParams {
  ForecastMethod fc_load{ForecastMethod::NaiveAverage};
  ForecastMethod fc_heat{ForecastMethod::NaiveAverage};
  ForecastMethod fc_pv{ForecastMethod::NaiveAverage};
  ForecastMethod fc_hp{ForecastMethod::NaiveAverage};
  ForecastMethod fc_ev{ForecastMethod::EvClose};
  ForecastMethod fc_price{ForecastMethod::Naive};
  std::int64_t trading_horizon_steps{96};
  TradingStrategy strategy{TradingStrategy::Linear};

  bool operator==(const HemsParams&) const = default;

  void validate() const;
};

inline constexpr std::int64_t kMinTradingHorizon = 12;
inline constexpr std::int64_t kMaxTradingHorizon = 96;

struct PvSpec {
  std::int64_t peak_power_w{0};
  std::string capacity_factor_profile_id;
  bool operator==(const PvSpec&) const = default;
};

struct BatterySpec {
  std::int64_t capacity_wh{0};
  std::int64_t power_w{0};
  double eta_charge{1.0};
  double eta_discharge{1.0};
  std::int64_t soc0_wh{0};
  bool operator==(const BatterySpec&) const = default;
};

struct EvSpec {
  std::int64_t capacity_wh{0};
  std::int64_t charge_power_w{0};
  double eta_charge{1.0};
  std::string availability_profile_id;
  bool operator==(const EvSpec&) const = default;
};

struct HpSpec {
  std::int64_t max_thermal_w{0};
  std::string cop_profile_id;
  std::int64_t storage_capacity_wh_th{0};
  double storage_loss_per_step{0.0};
  std::int64_t storage_soc0_wh_th{0};
  bool operator==(const HpSpec&) const = default;
};

struct FixedLoadSpec {
  std::string load_profile_id;
  bool operator==(const FixedLoadSpec&) const = default;
};

struct HeatDemandSpec {
  std::string heat_profile_id;
  bool operator==(const HeatDemandSpec&) const = default;
};

using DeviceSpec = std::variant<PvSpec, BatterySpec, EvSpec, HpSpec, FixedLoadSpec, HeatDemandSpec>;

/// Throws UnitOutOfRange when a capacity, power, efficiency or initial state
/// is outside its physical range.
void validate_device(const DeviceSpec& spec);

/// Energy per 15-minute step at a constant power, rounded down.
constexpr std::int64_t energy_per_step_wh(std::int64_t power_w) noexcept { return power_w / kStepsPerHour; }

enum class TopologyName { Countryside, Rural, Suburban, Urban };

std::string_view to_string(TopologyName t) noexcept;
TopologyName topology_from_string(std::string_view s);

struct GridTopology {
  TopologyName name{TopologyName::Rural};
  std::int64_t transformer_kva{0};
  std::int64_t residential_count{0};
  std::int64_t non_residential_count{0};
  std::int64_t annual_elec_mwh{0};
  std::int64_t annual_heat_mwh{0};
  std::int64_t annual_ev_mwh{0};

  bool operator==(const GridTopology&) const = default;
};

/// Grid structure and demand figures of the four reference low-voltage grids.
GridTopology default_topology(TopologyName name);

enum class Week { Summer, Transition, Winter };

std::string_view to_string(Week w) noexcept;
Week week_from_string(std::string_view s);
inline constexpr Week kAllWeeks[] = {Week::Summer, Week::Transition, Week::Winter};

struct Shares {
  int pv{0};
  int ev{0};
  int hp{0};
  bool operator==(const Shares&) const = default;
};

/// Penetration levels are multiples of 25 percent within [0, 100].
bool is_valid_share(int percent) noexcept;

struct Scenario {
  GridTopology topology;
  Shares shares;
  std::uint64_t seed{0};
  std::vector<Week> weeks;
  bool lem_enabled{true};

  bool operator==(const Scenario&) const = default;

  /// Stable identifier, e.g. "rural_pv025_ev050_hp100".
  [[nodiscard]] std::string id() const;
  /// A scenario without any PV produces no local supply; it is not runnable.
  [[nodiscard]] bool runnable() const noexcept { return shares.pv > 0; }
};

}  // namespace lemsim
