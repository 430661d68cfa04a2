#include "lemsim/profiles/profiles.hpp"

#include <algorithm>
#include <cerrno>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <numeric>

#include <fmt/format.h>

#include "lemsim/core/error.hpp"
#include "lemsim/core/rng.hpp"

namespace lemsim {

std::size_t week_index(Week w) noexcept {
  switch (w) {
    case Week::Summer: return 0;
    case Week::Transition: return 1;
    case Week::Winter: return 2;
  }
  return 0;
}

// ---------------------------------------------------------------------------
// CSV

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.back() == '\r' || s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  return s;
}

double parse_number(std::string_view field, const std::filesystem::path& path, std::size_t line) {
  std::string buf(trim(field));
  if (buf.empty()) throw Error(ErrorCode::ParseError, fmt::format("{}:{}: empty field", path.string(), line));
  char* end = nullptr;
  errno = 0;
  const double v = std::strtod(buf.c_str(), &end);
  if (end != buf.c_str() + buf.size() || errno == ERANGE || !std::isfinite(v)) {
    throw Error(ErrorCode::ParseError, fmt::format("{}:{}: '{}' is not a number", path.string(), line, buf));
  }
  return v;
}

bool is_nonnegative_unit(Unit u) { return u == Unit::Wh || u == Unit::WhTh || u == Unit::PerMille || u == Unit::CentiCop; }

}  // namespace

TimeSeries read_profile_csv(const std::filesystem::path& path, Unit unit) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::ProfileMissing, fmt::format("cannot open profile {}", path.string()));

  std::string line;
  if (!std::getline(in, line) || trim(line) != "step,value") {
    throw Error(ErrorCode::ParseError, fmt::format("{}: expected header 'step,value'", path.string()));
  }

  std::vector<std::int64_t> values;
  std::int64_t first_step = 0;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    const auto row = trim(line);
    if (row.empty()) continue;
    const auto comma = row.find(',');
    if (comma == std::string_view::npos || row.find(',', comma + 1) != std::string_view::npos) {
      throw Error(ErrorCode::ParseError, fmt::format("{}:{}: expected two columns", path.string(), lineno));
    }
    const double step_d = parse_number(row.substr(0, comma), path, lineno);
    const auto step = static_cast<std::int64_t>(step_d);
    if (static_cast<double>(step) != step_d) {
      throw Error(ErrorCode::ParseError, fmt::format("{}:{}: step must be an integer", path.string(), lineno));
    }
    if (values.empty()) {
      if (step < 0) throw Error(ErrorCode::NonMonotonicSteps, fmt::format("{}: negative first step", path.string()));
      first_step = step;
    } else if (step != first_step + static_cast<std::int64_t>(values.size())) {
      throw Error(ErrorCode::NonMonotonicSteps,
                  fmt::format("{}:{}: step {} follows {}", path.string(), lineno, step,
                              first_step + static_cast<std::int64_t>(values.size()) - 1));
    }
    const std::int64_t v = round_half_away(parse_number(row.substr(comma + 1), path, lineno));
    if (is_nonnegative_unit(unit) && v < 0) {
      throw Error(ErrorCode::NegativeLoad, fmt::format("{}:{}: negative value {}", path.string(), lineno, v));
    }
    if (unit == Unit::PerMille && v > 1000) {
      throw Error(ErrorCode::UnitOutOfRange, fmt::format("{}:{}: capacity factor {} > 1000", path.string(), lineno, v));
    }
    if (unit == Unit::EvState && v < -1) {
      throw Error(ErrorCode::UnitOutOfRange, fmt::format("{}:{}: ev state {} < -1", path.string(), lineno, v));
    }
    values.push_back(v);
  }
  if (values.empty()) throw Error(ErrorCode::ParseError, fmt::format("{}: no data rows", path.string()));
  return TimeSeries(Timestep{first_step}, unit, std::move(values));
}

void write_profile_csv(const std::filesystem::path& path, const TimeSeries& ts) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::IoError, fmt::format("cannot write {}", path.string()));
  out << "step,value\n";
  for (std::int64_t i = 0; i < ts.size(); ++i) out << (ts.start().index + i) << ',' << ts[i] << '\n';
  if (!out) throw Error(ErrorCode::IoError, fmt::format("write failed for {}", path.string()));
}

// ---------------------------------------------------------------------------
// Scaling

TimeSeries scale_to_total(const TimeSeries& ts, EnergyWh total) {
  const auto vals = ts.values();
  __int128 sum = 0;
  for (auto v : vals) {
    if (v < 0) throw Error(ErrorCode::NegativeLoad, "cannot scale a series with negative values");
    sum += v;
  }
  if (sum == 0) throw Error(ErrorCode::ZeroSourceSum, "cannot scale a series that sums to zero");
  if (total.value < 0) throw Error(ErrorCode::UnitOutOfRange, "scaling target must be >= 0");

  std::vector<std::int64_t> out(vals.size());
  std::vector<__int128> rem(vals.size());
  __int128 assigned = 0;
  for (std::size_t i = 0; i < vals.size(); ++i) {
    const __int128 num = static_cast<__int128>(vals[i]) * total.value;
    out[i] = static_cast<std::int64_t>(num / sum);
    rem[i] = num % sum;
    assigned += out[i];
  }
  auto left = static_cast<std::size_t>(total.value - assigned);
  if (left > 0) {
    std::vector<std::size_t> order(vals.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return rem[a] > rem[b]; });
    for (std::size_t k = 0; k < left; ++k) ++out[order[k]];
  }
  return TimeSeries(ts.start(), ts.unit(), std::move(out));
}

TimeSeries scale_to_annual(const TimeSeries& ts, EnergyWh target_annual) {
  constexpr std::int64_t kStepsPerYear = kStepsPerWeek * kWeeksPerYear;
  const __int128 num = static_cast<__int128>(target_annual.value) * ts.size();
  const auto total = static_cast<std::int64_t>((num + kStepsPerYear / 2) / kStepsPerYear);
  return scale_to_total(ts, EnergyWh{total});
}

// ---------------------------------------------------------------------------
// EV itineraries

void validate_itinerary(const EvItinerary& it, EnergyWh capacity) {
  for (std::size_t i = 0; i < it.size(); ++i) {
    const auto& trip = it[i];
    if (trip.arrival <= trip.departure) throw Error(ErrorCode::UnitOutOfRange, "trip arrives before it departs");
    if (trip.energy_consumed_away.value < 0 || trip.energy_consumed_away > capacity) {
      throw Error(ErrorCode::UnitOutOfRange, "trip consumption outside [0, capacity]");
    }
    if (i > 0 && it[i - 1].arrival >= trip.departure) {
      throw Error(ErrorCode::UnitOutOfRange, "trips overlap or are out of order");
    }
  }
}

TimeSeries itinerary_to_series(const EvItinerary& it, Timestep start, std::int64_t length) {
  std::vector<std::int64_t> v(static_cast<std::size_t>(length), 0);
  for (const auto& trip : it) {
    for (auto t = std::max(trip.departure, start); t < trip.arrival && t < start + length; t = t + 1) {
      v[static_cast<std::size_t>(t - start)] = -1;
    }
    if (trip.arrival >= start && trip.arrival < start + length) {
      v[static_cast<std::size_t>(trip.arrival - start)] = trip.energy_consumed_away.value;
    }
  }
  return TimeSeries(start, Unit::EvState, std::move(v));
}

EvItinerary itinerary_from_series(const TimeSeries& ts) {
  EvItinerary out;
  std::optional<Timestep> away_since;
  for (std::int64_t i = 0; i < ts.size(); ++i) {
    const Timestep t = ts.start() + i;
    if (ts[i] < 0) {
      if (!away_since) away_since = t;
    } else if (away_since) {
      out.push_back({*away_since, t, EnergyWh{ts[i]}});
      away_since.reset();
    }
  }
  if (away_since) out.push_back({*away_since, ts.end(), EnergyWh{0}});
  return out;
}

// ---------------------------------------------------------------------------
// Synthetic generators

namespace {

constexpr std::int64_t kDays = 7;

double bump(double h, double centre, double width) {
  const double x = (h - centre) / width;
  return std::exp(-x * x);
}

std::int64_t week_ordinal(Week w) { return static_cast<std::int64_t>(week_index(w)); }

TimeSeries shape_series(std::vector<double> raw, Unit unit) {
  std::vector<std::int64_t> v(raw.size());
  for (std::size_t i = 0; i < raw.size(); ++i) v[i] = std::max<std::int64_t>(0, round_half_away(raw[i] * 1000.0));
  return TimeSeries(Timestep{0}, unit, std::move(v));
}

}  // namespace

std::uint64_t derive_seed(std::uint64_t seed, std::string_view tag, std::uint64_t index) {
  return Rng(seed, tag, index).next_u64();
}

TimeSeries synth_household_load(std::uint64_t seed, std::int64_t annual_kwh, Week week) {
  Rng rng(seed, "household_load", static_cast<std::uint64_t>(week_ordinal(week)));
  const double morning = 7.0 + rng.uniform(-0.75, 0.75);
  const double evening = 19.0 + rng.uniform(-1.0, 1.0);
  const double evening_amp = rng.uniform(0.8, 1.3);
  const double lighting = week == Week::Winter ? 1.15 : week == Week::Summer ? 0.9 : 1.0;

  std::vector<double> raw;
  raw.reserve(kStepsPerWeek);
  for (std::int64_t d = 0; d < kDays; ++d) {
    const bool weekend = d >= 5;
    for (std::int64_t s = 0; s < kStepsPerDay; ++s) {
      const double h = (static_cast<double>(s) + 0.5) / kStepsPerHour;
      double x = 0.25 + 0.55 * bump(h, morning + (weekend ? 1.5 : 0.0), 1.1) +
                 lighting * evening_amp * bump(h, evening, 1.8) + (weekend ? 0.35 : 0.12) * bump(h, 12.5, 1.5);
      x *= std::exp(0.3 * rng.normal());
      if (rng.uniform01() < 0.04) x += rng.uniform(0.8, 2.0);
      raw.push_back(x);
    }
  }
  return scale_to_annual(shape_series(std::move(raw), Unit::Wh), EnergyWh{annual_kwh * 1000});
}

TimeSeries synth_commercial_load(std::uint64_t seed, std::int64_t annual_kwh, Week week) {
  Rng rng(seed, "commercial_load", static_cast<std::uint64_t>(week_ordinal(week)));
  std::vector<double> raw;
  raw.reserve(kStepsPerWeek);
  for (std::int64_t d = 0; d < kDays; ++d) {
    const bool open_day = d < 5;
    for (std::int64_t s = 0; s < kStepsPerDay; ++s) {
      const double h = (static_cast<double>(s) + 0.5) / kStepsPerHour;
      double x = 0.3;
      if (open_day && h >= 7.5 && h < 18.5) x += 0.9 - 0.2 * bump(h, 12.5, 0.8);
      x *= std::exp(0.1 * rng.normal());
      raw.push_back(x);
    }
  }
  return scale_to_annual(shape_series(std::move(raw), Unit::Wh), EnergyWh{annual_kwh * 1000});
}

TimeSeries synth_pv_capacity_factor(std::uint64_t seed, Week week) {
  Rng rng(seed, "pv", static_cast<std::uint64_t>(week_ordinal(week)));
  double rise = 5.25, set = 21.25, peak = 780.0;
  if (week == Week::Transition) {
    rise = 6.75; set = 18.75; peak = 560.0;
  } else if (week == Week::Winter) {
    rise = 8.0; set = 16.25; peak = 320.0;
  }
  std::vector<std::int64_t> v;
  v.reserve(kStepsPerWeek);
  for (std::int64_t d = 0; d < kDays; ++d) {
    const double clear = 0.3 + 0.7 * std::pow(rng.uniform01(), 0.6);
    for (std::int64_t s = 0; s < kStepsPerDay; ++s) {
      const double h = (static_cast<double>(s) + 0.5) / kStepsPerHour;
      const double noise = std::exp(0.12 * rng.normal());
      if (h <= rise || h >= set) {
        v.push_back(0);
        continue;
      }
      const double shape = std::pow(std::sin(M_PI * (h - rise) / (set - rise)), 1.3);
      v.push_back(std::clamp<std::int64_t>(round_half_away(peak * std::min(1.0, clear * noise) * shape), 0, 1000));
    }
  }
  return TimeSeries(Timestep{0}, Unit::PerMille, std::move(v));
}

TimeSeries synth_heat_demand(std::uint64_t seed, std::int64_t annual_kwh_th, Week week) {
  Rng rng(seed, "heat", static_cast<std::uint64_t>(week_ordinal(week)));
  // Relative weekly heat demand; a year of 17 summer, 18 transition and
  // 17 winter weeks averages to about one.
  const double weight = week == Week::Winter ? 1.8 : week == Week::Transition ? 0.95 : 0.25;
  const double space = week == Week::Winter ? 1.0 : week == Week::Transition ? 0.6 : 0.0;
  std::vector<double> raw;
  raw.reserve(kStepsPerWeek);
  for (std::int64_t d = 0; d < kDays; ++d) {
    const double day_level = std::exp(0.1 * rng.normal());
    for (std::int64_t s = 0; s < kStepsPerDay; ++s) {
      const double h = (static_cast<double>(s) + 0.5) / kStepsPerHour;
      const double setback = (h < 5.0 || h >= 22.5) ? 0.7 : 1.0;
      const double hot_water = 0.05 + 0.5 * bump(h, 7.0, 0.7) + 0.4 * bump(h, 20.0, 1.0);
      const double heating = space * day_level * setback * (1.0 + 0.3 * bump(h, 6.5, 1.5) + 0.2 * bump(h, 18.5, 2.0));
      raw.push_back((heating + 0.25 * hot_water) * std::exp(0.15 * rng.normal()));
    }
  }
  const auto target = round_half_away(static_cast<double>(annual_kwh_th) * 1000.0 * weight / kWeeksPerYear);
  return scale_to_total(shape_series(std::move(raw), Unit::WhTh), EnergyWh{target});
}

EvItinerary synth_ev_itinerary(std::uint64_t seed, Week week, EnergyWh capacity) {
  Rng rng(seed, "ev", static_cast<std::uint64_t>(week_ordinal(week)));
  EvItinerary out;
  auto consumption = [&](double lo, double hi) {
    return EnergyWh{std::min(capacity.value, round_half_away(rng.uniform(lo, hi)))};
  };
  for (std::int64_t d = 0; d < kDays; ++d) {
    const std::int64_t base = d * kStepsPerDay;
    const bool weekend = d >= 5;
    const bool two_trips = rng.uniform01() < (weekend ? 0.25 : 0.35);
    if (weekend) {
      const auto dep = rng.uniform_int(40, 56);  // 10:00 - 14:00
      const auto arr = dep + rng.uniform_int(8, 20);
      out.push_back({Timestep{base + dep}, Timestep{base + arr}, consumption(1000, 6000)});
      if (two_trips) {
        const auto dep2 = arr + rng.uniform_int(4, 8);
        const auto arr2 = dep2 + rng.uniform_int(4, 10);
        out.push_back({Timestep{base + dep2}, Timestep{base + arr2}, consumption(500, 3000)});
      }
    } else if (two_trips) {
      const auto dep = rng.uniform_int(26, 36);  // 06:30 - 09:00
      const auto arr = rng.uniform_int(48, 56);
      out.push_back({Timestep{base + dep}, Timestep{base + arr}, consumption(2000, 7000)});
      const auto dep2 = arr + rng.uniform_int(8, 16);
      const auto arr2 = std::min<std::int64_t>(dep2 + rng.uniform_int(4, 12), 90);
      out.push_back({Timestep{base + dep2}, Timestep{base + arr2}, consumption(1000, 4000)});
    } else {
      const auto dep = rng.uniform_int(26, 36);
      const auto arr = dep + rng.uniform_int(32, 44);  // 8 - 11 hours away
      out.push_back({Timestep{base + dep}, Timestep{base + arr}, consumption(3000, 10000)});
    }
  }
  return out;
}

TimeSeries constant_cop(std::int64_t centi_cop) {
  return TimeSeries(Timestep{0}, Unit::CentiCop, std::vector<std::int64_t>(kStepsPerWeek, centi_cop));
}

// ---------------------------------------------------------------------------
// Profile sets

Unit unit_for_profile(std::string_view id) {
  if (id.starts_with("load/")) return Unit::Wh;
  if (id.starts_with("heat/")) return Unit::WhTh;
  if (id.starts_with("pv/")) return Unit::PerMille;
  if (id.starts_with("cop/")) return Unit::CentiCop;
  if (id.starts_with("ev/")) return Unit::EvState;
  throw Error(ErrorCode::UnitOutOfRange, fmt::format("no unit known for profile id '{}'", id));
}

void ProfileSet::add(const std::string& id, Week week, TimeSeries ts) {
  series_[id][week_index(week)] = std::move(ts);
}

bool ProfileSet::has(const std::string& id, Week week) const {
  auto it = series_.find(id);
  return it != series_.end() && it->second[week_index(week)].has_value();
}

const TimeSeries& ProfileSet::get(const std::string& id, Week week) const {
  auto it = series_.find(id);
  if (it == series_.end() || !it->second[week_index(week)]) {
    throw Error(ErrorCode::ProfileMissing, fmt::format("profile '{}' missing for {} week", id, to_string(week)));
  }
  return *it->second[week_index(week)];
}

std::vector<std::string> ProfileSet::ids() const {
  std::vector<std::string> out;
  out.reserve(series_.size());
  for (const auto& [id, _] : series_) out.push_back(id);
  return out;
}

bool ProfileSet::covers(Week week) const {
  return !series_.empty() && std::all_of(series_.begin(), series_.end(),
                                          [&](const auto& kv) { return kv.second[week_index(week)].has_value(); });
}

namespace profile_id {
std::string load(bool residential, std::int64_t index) { return fmt::format("load/{}{}", residential ? 'r' : 'n', index); }
std::string heat(bool residential, std::int64_t index) { return fmt::format("heat/{}{}", residential ? 'r' : 'n', index); }
std::string ev(std::int64_t index) { return fmt::format("ev/r{}", index); }
}  // namespace profile_id

std::int64_t non_residential_annual_kwh(const GridTopology& topo, const ProfileOptions& opts) {
  if (topo.non_residential_count == 0) return 0;
  const std::int64_t rest = topo.annual_elec_mwh * 1000 - topo.residential_count * opts.household_kwh;
  return std::max(opts.household_kwh, rest / topo.non_residential_count);
}

namespace {

std::vector<std::string> all_ids(const GridTopology& topo) {
  std::vector<std::string> ids;
  for (std::int64_t i = 0; i < topo.residential_count; ++i) {
    ids.push_back(profile_id::load(true, i));
    ids.push_back(profile_id::heat(true, i));
    ids.push_back(profile_id::ev(i));
  }
  for (std::int64_t i = 0; i < topo.non_residential_count; ++i) {
    ids.push_back(profile_id::load(false, i));
    ids.push_back(profile_id::heat(false, i));
  }
  ids.emplace_back(profile_id::kPv);
  ids.emplace_back(profile_id::kCop);
  return ids;
}

}  // namespace

ProfileSet synth_profile_set(const GridTopology& topo, const ProfileOptions& opts, std::uint64_t seed,
                             const std::vector<Week>& weeks) {
  ProfileSet set;
  const auto nonres_kwh = non_residential_annual_kwh(topo, opts);
  for (Week w : weeks) {
    for (std::int64_t i = 0; i < topo.residential_count; ++i) {
      const auto idx = static_cast<std::uint64_t>(i);
      set.add(profile_id::load(true, i), w, synth_household_load(derive_seed(seed, "load/r", idx), opts.household_kwh, w));
      set.add(profile_id::heat(true, i), w,
              synth_heat_demand(derive_seed(seed, "heat/r", idx), opts.household_heat_kwh_th, w));
      const auto trips = synth_ev_itinerary(derive_seed(seed, "ev/r", idx), w);
      set.add(profile_id::ev(i), w, itinerary_to_series(trips, Timestep{0}, kStepsPerWeek));
    }
    for (std::int64_t i = 0; i < topo.non_residential_count; ++i) {
      const auto idx = static_cast<std::uint64_t>(i);
      set.add(profile_id::load(false, i), w, synth_commercial_load(derive_seed(seed, "load/n", idx), nonres_kwh, w));
      set.add(profile_id::heat(false, i), w,
              synth_heat_demand(derive_seed(seed, "heat/n", idx), 2 * opts.household_heat_kwh_th, w));
    }
    set.add(profile_id::kPv, w, synth_pv_capacity_factor(derive_seed(seed, "pv"), w));
    const auto cop = w == Week::Winter ? opts.cop_winter : w == Week::Transition ? opts.cop_transition : opts.cop_summer;
    set.add(profile_id::kCop, w, constant_cop(cop));
  }
  return set;
}

ProfileSet load_profile_set(const GridTopology& topo, const std::filesystem::path& dir, const std::vector<Week>& weeks) {
  ProfileSet set;
  for (Week w : weeks) {
    for (const auto& id : all_ids(topo)) {
      const auto path = dir / fmt::format("{}_{}.csv", id, to_string(w));
      if (!std::filesystem::exists(path)) {
        throw Error(ErrorCode::ProfileMissing, fmt::format("profile file {} not found", path.string()));
      }
      auto ts = read_profile_csv(path, unit_for_profile(id));
      if (ts.size() != kStepsPerWeek) {
        throw Error(ErrorCode::UnitOutOfRange, fmt::format("{} has {} rows, expected 672", path.string(), ts.size()));
      }
      set.add(id, w, TimeSeries(Timestep{0}, ts.unit(), {ts.values().begin(), ts.values().end()}));
    }
  }
  return set;
}

ProfileSet build_profile_set(const GridTopology& topo, const ProfileOptions& opts, std::uint64_t seed,
                             const std::vector<Week>& weeks) {
  if (opts.source == ProfileSource::Csv) return load_profile_set(topo, opts.csv_dir, weeks);
  return synth_profile_set(topo, opts, seed, weeks);
}

void write_profile_set(const ProfileSet& set, const std::filesystem::path& dir) {
  for (const auto& id : set.ids()) {
    for (Week w : kAllWeeks) {
      if (set.has(id, w)) write_profile_csv(dir / fmt::format("{}_{}.csv", id, to_string(w)), set.get(id, w));
    }
  }
}

}  // namespace lemsim
