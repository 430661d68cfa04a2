#pragma once

#include <algorithm>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "lemsim/core/params.hpp"
#include "lemsim/core/units.hpp"
#include "lemsim/forecasting/forecasting.hpp"
#include "lemsim/market/market.hpp"

namespace lemsim {

/// The controllable devices of one household, resolved from its device list.
struct AgentSpecs {
  std::optional<PvSpec> pv;
  std::optional<BatterySpec> battery;
  std::optional<EvSpec> ev;
  std::optional<HpSpec> hp;

  /// Anything the scheduler can shift in time.
  [[nodiscard]] bool has_storage() const noexcept { return battery || ev || hp; }
};

AgentSpecs specs_from_devices(std::span<const DeviceSpec> devices);

struct DeviceState {
  EnergyWh battery_soc;
  EnergyWh ev_soc;
  bool ev_present{true};
  EnergyWh thermal_soc;  // Wh_th

  bool operator==(const DeviceState&) const = default;
};

DeviceState initial_state(const AgentSpecs& specs);

/// PV energy of one step: peak power times the capacity factor over 15 minutes.
constexpr std::int64_t pv_energy_wh(std::int64_t peak_w, std::int64_t cf_per_mille) noexcept {
  return peak_w * cf_per_mille / (1000 * kStepsPerHour);
}

/// Efficiencies are applied as integer parts per million so that device
/// arithmetic is exact.
std::int64_t to_ppm(double fraction) noexcept;

/// Forecast inputs of one planning run, all aligned to `start`.
struct PlanForecasts {
  Timestep start;
  std::vector<std::int64_t> load;        // Wh
  std::vector<std::int64_t> pv;          // Wh available
  std::vector<std::int64_t> heat;        // Wh_th
  std::vector<std::int64_t> cop;         // x100
  std::vector<std::int64_t> price_buy;   // mct/kWh before levies
  std::vector<std::int64_t> price_sell;  // mct/kWh
  std::vector<std::int64_t> ev_available;
  std::optional<EvRequirement> ev_requirement;

  [[nodiscard]] std::int64_t horizon() const noexcept { return static_cast<std::int64_t>(load.size()); }
};

/// Energy already bought (+) or sold (-) on the LEM per delivery step.
class CommittedPosition {
 public:
  explicit CommittedPosition(Timestep start = Timestep{0}) : start_(start) {}

  void add_trade(Timestep delivery, EnergyWh signed_qty, PriceMct price);
  [[nodiscard]] EnergyWh net_traded(Timestep delivery) const;
  /// Volume-weighted price of all trades for the step, if any.
  [[nodiscard]] std::optional<PriceMct> vwap(Timestep delivery) const;

 private:
  struct Slot {
    std::int64_t net{0};
    std::int64_t volume{0};
    __int128 value{0};  // sum of qty * price
  };
  Timestep start_;
  std::vector<Slot> slots_;
};

struct DispatchPlan {
  Timestep start;
  std::vector<std::int64_t> pv_use, pv_curtail, batt_charge, batt_discharge, ev_charge, hp_elec, buy, sell;
  std::vector<std::int64_t> battery_soc, ev_soc, thermal_soc;  // end of each step
  CashMicroEur objective_value;
  /// The EV could not be filled by its deadline; the target was relaxed.
  bool relaxed{false};

  [[nodiscard]] std::int64_t horizon() const noexcept { return static_cast<std::int64_t>(buy.size()); }
  [[nodiscard]] bool covers(Timestep t) const noexcept { return t >= start && t < start + horizon(); }
  [[nodiscard]] EnergyWh net(Timestep t) const;
};

/// Cost-minimal device schedule over the forecast horizon as an LP. Residual
/// purchases cost price_buy + levies, residual sales earn price_sell, and each
/// curtailed Wh costs 1 mct. Committed volume is sunk.
DispatchPlan plan_schedule(const DeviceState& state, const AgentSpecs& specs, const PlanForecasts& fc,
                           const CommittedPosition& committed, const MarketParams& params);

/// Empty when the plan satisfies every scheduling constraint (flow bounds and
/// bus balance exactly, storage dynamics within 1 Wh per step).
std::vector<std::string> check_plan(const DispatchPlan& plan, const DeviceState& state, const AgentSpecs& specs,
                                    const PlanForecasts& fc);

PriceMct linear_limit_price(Side side, std::int64_t steps_remaining, std::int64_t trading_horizon,
                            const MarketParams& params);

/// One order per delivery step in the trading horizon whose planned net
/// exchange differs from the committed volume. Order ids and sequence numbers
/// are assigned by the book.
std::vector<Order> make_orders(const DispatchPlan& plan, const CommittedPosition& committed, const HemsParams& hems,
                               Timestep now, const MarketParams& params, std::int64_t agent_id = 0);

/// Realised inputs at delivery.
struct Actuals {
  Timestep now;
  std::int64_t load{0};     // Wh
  std::int64_t pv{0};       // Wh available
  std::int64_t heat{0};     // Wh_th
  std::int64_t cop{100};    // x100
  std::int64_t ev_state{0}; // -1 away, else energy consumed on the trip ending now
  std::optional<Timestep> ev_next_departure;
};

/// Device operation the plan intended for this step.
struct Setpoints {
  std::int64_t battery_net{0};  // + charge, - discharge (bus side)
  std::int64_t ev_charge{0};
  std::int64_t hp_elec{0};
  std::int64_t pv_curtail{0};
};

struct Dispatch {
  std::int64_t load{0};
  std::int64_t pv_generated{0};
  std::int64_t pv_curtailed{0};
  std::int64_t batt_charge{0};
  std::int64_t batt_discharge{0};
  std::int64_t ev_charge{0};
  std::int64_t hp_elec{0};
  std::int64_t heat_unserved{0};
  std::int64_t grid_import{0};
  std::int64_t grid_export{0};

  [[nodiscard]] std::int64_t net() const noexcept { return grid_import - grid_export; }
  [[nodiscard]] std::int64_t pv_used() const noexcept { return pv_generated - pv_curtailed; }
  [[nodiscard]] std::int64_t pv_exported() const noexcept { return std::min(grid_export, pv_used()); }
  [[nodiscard]] std::int64_t self_consumed() const noexcept { return pv_used() - pv_exported(); }
  bool operator==(const Dispatch&) const = default;
};

struct RealtimeResult {
  Dispatch dispatch;
  EnergyWh imbalance;  // metered - contracted; + = extra energy needed
  DeviceState state;
};

/// Integer range each device can take at this step without violating its
/// state bounds, and the net exchange range they span together.
struct FlexRange {
  std::int64_t batt_charge_max{0};
  std::int64_t batt_discharge_max{0};
  std::int64_t ev_min{0}, ev_max{0};
  std::int64_t hp_min{0}, hp_max{0}, hp_direct{0};
  std::int64_t curtail_max{0};
  /// State after EV arrival bookkeeping, before any energy flows.
  DeviceState pre;
};

FlexRange flex_range(const DeviceState& state, const AgentSpecs& specs, const Actuals& actual);

/// Serves load and heat, then moves flexible devices toward the contracted
/// exchange in the order battery, EV, heat pump, curtailment. Without a LEM
/// the target is zero (self-consumption), EVs charge at full power and the
/// imbalance is zero because the retailer takes every deviation.
RealtimeResult realtime_dispatch(const DeviceState& state, const AgentSpecs& specs, const Actuals& actual,
                                 EnergyWh committed_now, const MarketParams& params, bool lem_enabled,
                                 const Setpoints* planned = nullptr);

}  // namespace lemsim
