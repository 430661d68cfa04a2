#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "lemsim/core/config.hpp"
#include "lemsim/core/params.hpp"
#include "lemsim/forecasting/forecasting.hpp"
#include "lemsim/hems/hems.hpp"
#include "lemsim/market/market.hpp"
#include "lemsim/profiles/profiles.hpp"
#include "lemsim/scenarios/scenarios.hpp"

namespace lemsim {

/// Meter reading and cash flows of one agent at one metered step.
struct LedgerRow {
  std::int64_t week_pos{0};  // position in RunResult::meta.weeks
  std::int64_t step{0};      // 0..671 within the week
  Timestep t;                // global simulation step
  std::int64_t agent_id{0};
  Dispatch dispatch;
  EnergyWh contracted;
  SettlementRecord settlement;

  bool operator==(const LedgerRow&) const = default;
};

struct RunMeta {
  std::string scenario_id;
  Scenario scenario;
  bool lem_enabled{true};
  std::uint64_t seed{0};
  std::int64_t burn_in_steps{0};
  std::string clearing_rule{"midpoint_marginal"};
  bool aep_include_balancing{true};
  MarketParams market;
  std::int64_t agent_count{0};

  bool operator==(const RunMeta&) const = default;
};

struct RunResult {
  RunMeta meta;
  /// Ordered by week, step, agent id.
  std::vector<LedgerRow> ledger;
  /// Transformer flow in W (+ = MV to LV) over the concatenated metered weeks.
  std::vector<std::int64_t> flow_w;
  /// Trades for metered delivery steps, in clearing order.
  std::vector<Trade> trades;

  bool operator==(const RunResult&) const = default;
};

/// Signed transformer power of one step: net metered energy times four.
std::int64_t transformer_flow(std::span<const Dispatch> meters);

struct EngineRunOptions {
  /// Worker threads for the per-agent phases; results do not depend on it.
  int threads{1};
};

/// Simulation state of one agent across an episode.
struct AgentRuntime {
  Agent agent;
  AgentSpecs specs;
  DeviceState state;
  // Realised inputs on the episode timeline.
  std::vector<std::int64_t> load, pv, heat, cop, ev_state;
  std::vector<std::optional<Timestep>> ev_next_departure;
  History load_hist, pv_hist, heat_hist, cop_hist;
  CommittedPosition committed;
  std::vector<std::optional<Setpoints>> setpoints;
  std::vector<std::int64_t> deliverable;
  std::vector<std::int64_t> contracted;
  std::vector<Dispatch> meter;
  std::vector<SettlementRecord> settlement;
  std::vector<Order> pending_orders;
};

/// One episode: burn-in followed by one representative week.
struct World {
  Week week{Week::Summer};
  Timestep base;
  std::int64_t burn_in_steps{0};
  std::int64_t length{0};
  bool lem_enabled{true};
  MarketParams market;
  EngineOptions engine;
  std::vector<AgentRuntime> agents;
  OrderBook book;
  PriceHistory prices;
  PriceHistory buy_prices, sell_prices;
  std::vector<Trade> trades;
  std::vector<std::int64_t> flow_w;

  [[nodiscard]] Timestep end() const noexcept { return base + length; }
  [[nodiscard]] std::int64_t local(Timestep t) const noexcept { return t - base; }
};

/// Builds episode `episode` (0-based) for `week`. Burn-in steps replay the
/// last days of the same week so that forecasts have history.
World make_world(const Scenario& scenario, const AgentRoster& roster, const ProfileSet& profiles,
                 const SimConfig& config, Week week, std::int64_t episode);

/// One 15-minute cycle: agents deliver, meter, forecast, plan and post; then
/// the market clears every open delivery step in the next day, the final gate
/// closes step now+1 and step now is settled.
void run_timestep_cycle(World& world, Timestep now, const EngineRunOptions& opts = {});

/// Deterministic in (scenario, profiles, config). Throws ProfileMissing.
RunResult run_scenario(const Scenario& scenario, const ProfileSet& profiles, const SimConfig& config,
                       const EngineRunOptions& opts = {});

/// Directory layout: ledger.csv, trades.csv, flow.csv, meta.json.
void write_run_result(const RunResult& result, const std::filesystem::path& dir);
RunResult read_run_result(const std::filesystem::path& dir);

}  // namespace lemsim
