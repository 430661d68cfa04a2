#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "lemsim/core/time_series.hpp"
#include "lemsim/core/units.hpp"

namespace lemsim {

/// Previous-day value; falls back to the last observation, then to zero.
/// The forecast starts at history.end().
TimeSeries forecast_naive(const History& history, std::int64_t horizon, Unit unit = Unit::Wh);

/// Mean of the two previous days (rounded half away from zero), degrading to
/// forecast_naive when only one day is known.
TimeSeries forecast_naive_average(const History& history, std::int64_t horizon, Unit unit = Unit::Wh);

/// The true future values from `start`. Out-of-range steps repeat the last value.
TimeSeries forecast_perfect(const TimeSeries& truth, Timestep start, std::int64_t horizon);

struct EvRequirement {
  Timestep deadline;   // first step away; the target must be reached before it
  EnergyWh soc_target;
  bool operator==(const EvRequirement&) const = default;
};

struct EvForecast {
  TimeSeries availability;  // 0/1 per step
  std::optional<EvRequirement> requirement;
};

/// What the HEMS knows about its EV: whether it is plugged in and, if so,
/// when it leaves next (told on return). Nothing is known while it is away.
EvForecast forecast_ev_close(bool present, std::optional<Timestep> next_departure, EnergyWh capacity, Timestep start,
                             std::int64_t horizon);

/// Realised clearing prices per delivery step; unset where nothing traded.
class PriceHistory {
 public:
  explicit PriceHistory(Timestep start = Timestep{0}) : start_(start) {}

  void record(Timestep delivery, PriceMct price);
  [[nodiscard]] std::optional<PriceMct> at(Timestep delivery) const;
  [[nodiscard]] Timestep start() const noexcept { return start_; }

 private:
  Timestep start_;
  std::vector<std::int64_t> prices_;  // -1 = never cleared
};

/// Previous-day clearing price per slot, `fallback` (the wholesale price) where
/// the slot never cleared.
TimeSeries forecast_price_naive(const PriceHistory& history, Timestep start, std::int64_t horizon,
                                PriceMct fallback = PriceMct{14700});

}  // namespace lemsim
