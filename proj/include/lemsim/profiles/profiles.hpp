#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "lemsim/core/config.hpp"
#include "lemsim/core/params.hpp"
#include "lemsim/core/time_series.hpp"

namespace lemsim {

/// Reads a `step,value` file. Steps must be consecutive; decimals are
/// rounded to the integer base unit.
TimeSeries read_profile_csv(const std::filesystem::path& path, Unit unit);
void write_profile_csv(const std::filesystem::path& path, const TimeSeries& ts);

/// Rescales a non-negative series so that it sums to `total` exactly.
/// Remainders go to the largest fractional parts, earliest index first.
TimeSeries scale_to_total(const TimeSeries& ts, EnergyWh total);

/// Rescales to the share of an annual figure the series covers
/// (length / (672 * 52)), rounded to the nearest Wh.
TimeSeries scale_to_annual(const TimeSeries& ts, EnergyWh target_annual);

struct EvTrip {
  Timestep departure;  // first step away
  Timestep arrival;    // first step back home
  EnergyWh energy_consumed_away;
  bool operator==(const EvTrip&) const = default;
};

using EvItinerary = std::vector<EvTrip>;

/// Throws UnitOutOfRange if trips overlap, are unordered or consume more than `capacity`.
void validate_itinerary(const EvItinerary& it, EnergyWh capacity);

/// Encodes an itinerary as an ev_state series: -1 while away, the consumed
/// energy on the arrival step, 0 otherwise.
TimeSeries itinerary_to_series(const EvItinerary& it, Timestep start, std::int64_t length);
EvItinerary itinerary_from_series(const TimeSeries& ts);

TimeSeries synth_household_load(std::uint64_t seed, std::int64_t annual_kwh, Week week);
/// Office-hours shaped load for non-residential buildings.
TimeSeries synth_commercial_load(std::uint64_t seed, std::int64_t annual_kwh, Week week);
TimeSeries synth_pv_capacity_factor(std::uint64_t seed, Week week);
TimeSeries synth_heat_demand(std::uint64_t seed, std::int64_t annual_kwh_th, Week week);
EvItinerary synth_ev_itinerary(std::uint64_t seed, Week week, EnergyWh capacity = EnergyWh{50000});
TimeSeries constant_cop(std::int64_t centi_cop);

/// Derives an independent child seed for a named purpose.
std::uint64_t derive_seed(std::uint64_t seed, std::string_view tag, std::uint64_t index = 0);

/// Unit implied by the prefix of a profile id ("load/", "heat/", "pv/", "cop/", "ev/").
Unit unit_for_profile(std::string_view profile_id);

/// Profiles keyed by id, one 672-step window per representative week.
class ProfileSet {
 public:
  void add(const std::string& id, Week week, TimeSeries ts);
  [[nodiscard]] bool has(const std::string& id, Week week) const;
  /// Throws ProfileMissing.
  [[nodiscard]] const TimeSeries& get(const std::string& id, Week week) const;
  [[nodiscard]] std::vector<std::string> ids() const;
  [[nodiscard]] bool covers(Week week) const;

 private:
  std::map<std::string, std::array<std::optional<TimeSeries>, 3>> series_;
};

namespace profile_id {
std::string load(bool residential, std::int64_t index);
std::string heat(bool residential, std::int64_t index);
std::string ev(std::int64_t index);
inline constexpr const char* kPv = "pv/grid";
inline constexpr const char* kCop = "cop/grid";
}  // namespace profile_id

/// Annual electricity demand of one non-residential building: whatever the
/// topology total leaves after the households, split evenly.
std::int64_t non_residential_annual_kwh(const GridTopology& topo, const ProfileOptions& opts);

/// Every profile a topology can reference, for the given weeks.
ProfileSet synth_profile_set(const GridTopology& topo, const ProfileOptions& opts, std::uint64_t seed,
                             const std::vector<Week>& weeks);

/// Same id set read from `<dir>/<profile_id>_<week>.csv`.
ProfileSet load_profile_set(const GridTopology& topo, const std::filesystem::path& dir, const std::vector<Week>& weeks);

ProfileSet build_profile_set(const GridTopology& topo, const ProfileOptions& opts, std::uint64_t seed,
                             const std::vector<Week>& weeks);

/// Writes a profile set in the CSV layout read by load_profile_set.
void write_profile_set(const ProfileSet& set, const std::filesystem::path& dir);

std::size_t week_index(Week w) noexcept;

}  // namespace lemsim
