#include <cmath>
#include <string>

#include <fmt/format.h>

#include "lemsim/core/error.hpp"
#include "lemsim/core/params.hpp"
#include "lemsim/core/rng.hpp"
#include "lemsim/core/time_series.hpp"
#include "lemsim/core/units.hpp"

namespace lemsim {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::MissingField: return "MissingField";
    case ErrorCode::UnitOutOfRange: return "UnitOutOfRange";
    case ErrorCode::InconsistentPrices: return "InconsistentPrices";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::NonMonotonicSteps: return "NonMonotonicSteps";
    case ErrorCode::NegativeLoad: return "NegativeLoad";
    case ErrorCode::ZeroSourceSum: return "ZeroSourceSum";
    case ErrorCode::ProfileMissing: return "ProfileMissing";
    case ErrorCode::DeliveryInPast: return "DeliveryInPast";
    case ErrorCode::ZeroQty: return "ZeroQty";
    case ErrorCode::NoEnergy: return "NoEnergy";
    case ErrorCode::ScenarioMismatch: return "ScenarioMismatch";
    case ErrorCode::DivByZero: return "DivByZero";
    case ErrorCode::IoError: return "IoError";
    case ErrorCode::Overflow: return "Overflow";
    case ErrorCode::SolverFailure: return "SolverFailure";
  }
  return "Unknown";
}

std::int64_t round_half_away(double x) noexcept {
  return static_cast<std::int64_t>(x >= 0.0 ? std::floor(x + 0.5) : -std::floor(-x + 0.5));
}

// ---------------------------------------------------------------------------

std::string_view to_string(Unit u) noexcept {
  switch (u) {
    case Unit::Wh: return "Wh";
    case Unit::WhTh: return "Wh_th";
    case Unit::Mct: return "Mct";
    case Unit::PerMille: return "per_mille";
    case Unit::CentiCop: return "centi_cop";
    case Unit::EvState: return "ev_state";
    case Unit::W: return "W";
  }
  return "?";
}

Unit unit_from_string(std::string_view s) {
  for (Unit u : {Unit::Wh, Unit::WhTh, Unit::Mct, Unit::PerMille, Unit::CentiCop, Unit::EvState, Unit::W}) {
    if (to_string(u) == s) return u;
  }
  throw Error(ErrorCode::UnitOutOfRange, fmt::format("unknown unit '{}'", s));
}

TimeSeries::TimeSeries(Timestep start, Unit unit, std::vector<std::int64_t> values)
    : start_(start), unit_(unit), values_(std::move(values)) {
  if (start_.index < 0) throw Error(ErrorCode::UnitOutOfRange, "time series start must be >= 0");
  if (values_.empty()) throw Error(ErrorCode::UnitOutOfRange, "time series must not be empty");
}

std::int64_t TimeSeries::at(Timestep t) const {
  if (!contains(t)) {
    throw Error(ErrorCode::UnitOutOfRange,
                fmt::format("step {} outside [{}, {})", t.index, start_.index, end().index));
  }
  return values_[static_cast<std::size_t>(t - start_)];
}

std::int64_t TimeSeries::sum() const {
  std::int64_t s = 0;
  for (auto v : values_) s = checked::add(s, v);
  return s;
}

// ---------------------------------------------------------------------------

namespace {

std::uint32_t fnv1a(std::string_view s) {
  std::uint32_t h = 2166136261u;
  for (char c : s) {
    h ^= static_cast<unsigned char>(c);
    h *= 16777619u;
  }
  return h;
}

std::mt19937_64 make_engine(std::uint64_t seed, std::string_view stream, std::uint64_t index) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32), fnv1a(stream),
                    static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32)};
  return std::mt19937_64(seq);
}

}  // namespace

Rng::Rng(std::uint64_t seed, std::string_view stream, std::uint64_t index)
    : engine_(make_engine(seed, stream, index)) {}

std::int64_t Rng::uniform_int(std::int64_t lo, std::int64_t hi) {
  const auto range = static_cast<std::uint64_t>(hi - lo) + 1;
  if (range == 0) return static_cast<std::int64_t>(engine_());
  const std::uint64_t limit = UINT64_MAX - (UINT64_MAX % range);
  std::uint64_t x;
  do {
    x = engine_();
  } while (x >= limit);
  return lo + static_cast<std::int64_t>(x % range);
}

double Rng::normal() {
  double u1 = uniform01();
  while (u1 <= 0.0) u1 = uniform01();
  const double u2 = uniform01();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}

// ---------------------------------------------------------------------------

void MarketParams::validate() const {
  auto in_range = [](PriceMct p, const char* name) {
    if (p.value < 0 || p.value > 100000) {
      throw Error(ErrorCode::UnitOutOfRange, fmt::format("{} = {} mct outside [0, 100000]", name, p.value));
    }
  };
  in_range(energy_price_buy, "energy_price_buy");
  in_range(feed_in_tariff, "feed_in_tariff");
  in_range(levies, "levies");
  in_range(balancing_buy, "balancing_buy");
  in_range(balancing_sell, "balancing_sell");
  in_range(lem_price_floor, "lem_price_floor");
  in_range(lem_price_cap, "lem_price_cap");
  if (balancing_buy <= energy_price_buy) {
    throw Error(ErrorCode::InconsistentPrices, "balancing_buy must exceed energy_price_buy");
  }
  if (balancing_sell >= feed_in_tariff) {
    throw Error(ErrorCode::InconsistentPrices, "balancing_sell must be below feed_in_tariff");
  }
  if (lem_price_floor > lem_price_cap) {
    throw Error(ErrorCode::InconsistentPrices, "lem_price_floor must not exceed lem_price_cap");
  }
  if (clearing_horizon_steps < 1 || clearing_horizon_steps > kStepsPerDay) {
    throw Error(ErrorCode::UnitOutOfRange, "clearing_horizon_steps must be in [1, 96]");
  }
  if (clearing_interval_steps != 1) {
    throw Error(ErrorCode::UnitOutOfRange, "only a 15-minute clearing interval (1 step) is supported");
  }
}

std::string_view to_string(ForecastMethod m) noexcept {
  switch (m) {
    case ForecastMethod::Naive: return "naive";
    case ForecastMethod::NaiveAverage: return "naive_average";
    case ForecastMethod::EvClose: return "ev_close";
    case ForecastMethod::Perfect: return "perfect";
  }
  return "?";
}

ForecastMethod forecast_method_from_string(std::string_view s) {
  for (auto m : {ForecastMethod::Naive, ForecastMethod::NaiveAverage, ForecastMethod::EvClose,
                 ForecastMethod::Perfect}) {
    if (to_string(m) == s) return m;
  }
  throw Error(ErrorCode::UnitOutOfRange, fmt::format("unknown forecast method '{}'", s));
}

void HemsParams::validate() const {
  if (trading_horizon_steps < kMinTradingHorizon || trading_horizon_steps > kMaxTradingHorizon) {
    throw Error(ErrorCode::UnitOutOfRange,
                fmt::format("trading_horizon_steps = {} outside [12, 96]", trading_horizon_steps));
  }
  auto series_method = [](ForecastMethod m, const char* what) {
    if (m != ForecastMethod::NaiveAverage && m != ForecastMethod::Naive && m != ForecastMethod::Perfect) {
      throw Error(ErrorCode::UnitOutOfRange, fmt::format("{} forecast cannot be {}", what, to_string(m)));
    }
  };
  series_method(fc_load, "load");
  series_method(fc_heat, "heat");
  series_method(fc_pv, "pv");
  series_method(fc_hp, "heat pump");
  series_method(fc_price, "price");
  if (fc_ev != ForecastMethod::EvClose && fc_ev != ForecastMethod::Perfect) {
    throw Error(ErrorCode::UnitOutOfRange, "ev forecast must be ev_close or perfect");
  }
}

namespace {

struct DeviceValidator {
  static void positive(std::int64_t v, const char* what) {
    if (v <= 0) throw Error(ErrorCode::UnitOutOfRange, fmt::format("{} must be > 0", what));
  }
  static void efficiency(double eta, const char* what) {
    if (!(eta > 0.0 && eta <= 1.0)) throw Error(ErrorCode::UnitOutOfRange, fmt::format("{} must be in (0, 1]", what));
  }

  void operator()(const PvSpec& s) const { positive(s.peak_power_w, "pv peak_power_w"); }
  void operator()(const BatterySpec& s) const {
    positive(s.capacity_wh, "battery capacity_wh");
    positive(s.power_w, "battery power_w");
    efficiency(s.eta_charge, "battery eta_charge");
    efficiency(s.eta_discharge, "battery eta_discharge");
    if (s.soc0_wh < 0 || s.soc0_wh > s.capacity_wh) throw Error(ErrorCode::UnitOutOfRange, "battery soc0 outside capacity");
  }
  void operator()(const EvSpec& s) const {
    positive(s.capacity_wh, "ev capacity_wh");
    positive(s.charge_power_w, "ev charge_power_w");
    efficiency(s.eta_charge, "ev eta_charge");
  }
  void operator()(const HpSpec& s) const {
    positive(s.max_thermal_w, "hp max_thermal_w");
    positive(s.storage_capacity_wh_th, "hp storage_capacity_wh_th");
    if (!(s.storage_loss_per_step >= 0.0 && s.storage_loss_per_step < 1.0)) {
      throw Error(ErrorCode::UnitOutOfRange, "storage_loss_per_step must be in [0, 1)");
    }
    if (s.storage_soc0_wh_th < 0 || s.storage_soc0_wh_th > s.storage_capacity_wh_th) {
      throw Error(ErrorCode::UnitOutOfRange, "thermal storage soc0 outside capacity");
    }
  }
  void operator()(const FixedLoadSpec&) const {}
  void operator()(const HeatDemandSpec&) const {}
};

}  // namespace

void validate_device(const DeviceSpec& spec) { std::visit(DeviceValidator{}, spec); }

std::string_view to_string(TopologyName t) noexcept {
  switch (t) {
    case TopologyName::Countryside: return "countryside";
    case TopologyName::Rural: return "rural";
    case TopologyName::Suburban: return "suburban";
    case TopologyName::Urban: return "urban";
  }
  return "?";
}

TopologyName topology_from_string(std::string_view s) {
  for (auto t : {TopologyName::Countryside, TopologyName::Rural, TopologyName::Suburban, TopologyName::Urban}) {
    if (to_string(t) == s) return t;
  }
  throw Error(ErrorCode::UnitOutOfRange, fmt::format("unknown topology '{}'", s));
}

GridTopology default_topology(TopologyName name) {
  switch (name) {
    case TopologyName::Countryside: return {name, 630, 13, 1, 90, 875, 13};
    case TopologyName::Rural: return {name, 400, 57, 4, 228, 1821, 52};
    case TopologyName::Suburban: return {name, 400, 186, 3, 692, 4866, 179};
    case TopologyName::Urban: return {name, 630, 378, 61, 1581, 6921, 212};
  }
  throw Error(ErrorCode::UnitOutOfRange, "unknown topology");
}

std::string_view to_string(Week w) noexcept {
  switch (w) {
    case Week::Summer: return "summer";
    case Week::Transition: return "transition";
    case Week::Winter: return "winter";
  }
  return "?";
}

Week week_from_string(std::string_view s) {
  for (auto w : kAllWeeks) {
    if (to_string(w) == s) return w;
  }
  throw Error(ErrorCode::UnitOutOfRange, fmt::format("unknown week '{}'", s));
}

bool is_valid_share(int percent) noexcept { return percent >= 0 && percent <= 100 && percent % 25 == 0; }

std::string Scenario::id() const {
  return fmt::format("{}_pv{:03d}_ev{:03d}_hp{:03d}", to_string(topology.name), shares.pv, shares.ev, shares.hp);
}

}  // namespace lemsim
