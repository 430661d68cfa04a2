#include "lemsim/forecasting/forecasting.hpp"

#include <algorithm>

namespace lemsim {

namespace {

std::int64_t fallback_value(const History& h) { return h.empty() ? 0 : h.back(); }

}  // namespace

TimeSeries forecast_naive(const History& history, std::int64_t horizon, Unit unit) {
  std::vector<std::int64_t> out(static_cast<std::size_t>(horizon));
  const Timestep start = history.end();
  const auto last = fallback_value(history);
  for (std::int64_t i = 0; i < horizon; ++i) {
    const Timestep prev = start + i - kStepsPerDay;
    out[static_cast<std::size_t>(i)] = history.contains(prev) ? history.at(prev) : last;
  }
  return TimeSeries(start, unit, std::move(out));
}

TimeSeries forecast_naive_average(const History& history, std::int64_t horizon, Unit unit) {
  std::vector<std::int64_t> out(static_cast<std::size_t>(horizon));
  const Timestep start = history.end();
  const auto last = fallback_value(history);
  for (std::int64_t i = 0; i < horizon; ++i) {
    const Timestep d1 = start + i - kStepsPerDay;
    const Timestep d2 = d1 - kStepsPerDay;
    std::int64_t v = last;
    if (history.contains(d1) && history.contains(d2)) {
      v = div_round_half_away(history.at(d1) + history.at(d2), 2);
    } else if (history.contains(d1)) {
      v = history.at(d1);
    }
    out[static_cast<std::size_t>(i)] = v;
  }
  return TimeSeries(start, unit, std::move(out));
}

TimeSeries forecast_perfect(const TimeSeries& truth, Timestep start, std::int64_t horizon) {
  std::vector<std::int64_t> out(static_cast<std::size_t>(horizon));
  for (std::int64_t i = 0; i < horizon; ++i) {
    const Timestep t = start + i;
    out[static_cast<std::size_t>(i)] = truth.contains(t) ? truth.at(t) : truth[truth.size() - 1];
  }
  return TimeSeries(start, truth.unit(), std::move(out));
}

EvForecast forecast_ev_close(bool present, std::optional<Timestep> next_departure, EnergyWh capacity, Timestep start,
                             std::int64_t horizon) {
  std::vector<std::int64_t> avail(static_cast<std::size_t>(horizon), 0);
  std::optional<EvRequirement> req;
  if (present) {
    const Timestep end = start + horizon;
    const Timestep until = next_departure ? std::min(*next_departure, end) : end;
    for (Timestep t = start; t < until; t = t + 1) avail[static_cast<std::size_t>(t - start)] = 1;
    if (next_departure && *next_departure <= end) req = EvRequirement{*next_departure, capacity};
  }
  return EvForecast{TimeSeries(start, Unit::EvState, std::move(avail)), req};
}

void PriceHistory::record(Timestep delivery, PriceMct price) {
  if (delivery < start_) return;
  const auto idx = static_cast<std::size_t>(delivery - start_);
  if (idx >= prices_.size()) prices_.resize(idx + 1, -1);
  prices_[idx] = price.value;
}

std::optional<PriceMct> PriceHistory::at(Timestep delivery) const {
  if (delivery < start_) return std::nullopt;
  const auto idx = static_cast<std::size_t>(delivery - start_);
  if (idx >= prices_.size() || prices_[idx] < 0) return std::nullopt;
  return PriceMct{prices_[idx]};
}

TimeSeries forecast_price_naive(const PriceHistory& history, Timestep start, std::int64_t horizon, PriceMct fallback) {
  std::vector<std::int64_t> out(static_cast<std::size_t>(horizon));
  for (std::int64_t i = 0; i < horizon; ++i) {
    const auto p = history.at(start + i - kStepsPerDay);
    out[static_cast<std::size_t>(i)] = p ? p->value : fallback.value;
  }
  return TimeSeries(start, Unit::Mct, std::move(out));
}

}  // namespace lemsim
