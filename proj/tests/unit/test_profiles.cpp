#include <gtest/gtest.h>

#include <algorithm>

#include "lemsim/profiles/profiles.hpp"
#include "support.hpp"

namespace lemsim {
namespace {

using test::TempDir;
using test::throws_code;

std::vector<std::int64_t> values(const TimeSeries& ts) { return {ts.values().begin(), ts.values().end()}; }

std::string csv_of(const std::vector<std::int64_t>& v) {
  std::string s = "step,value\n";
  for (std::size_t i = 0; i < v.size(); ++i) s += std::to_string(i) + "," + std::to_string(v[i]) + "\n";
  return s;
}

TEST(ReadProfileCsv, ZerosRoundTrip) {
  TempDir dir("csv");
  test::spit(dir / "z.csv", csv_of(std::vector<std::int64_t>(672, 0)));
  const auto ts = read_profile_csv(dir / "z.csv", Unit::Wh);
  EXPECT_EQ(ts.size(), 672);
  EXPECT_EQ(ts.sum(), 0);
  EXPECT_EQ(ts.unit(), Unit::Wh);
}

TEST(ReadProfileCsv, MissingStepIsNonMonotonic) {
  TempDir dir("csv");
  std::string s = "step,value\n";
  for (int i = 0; i < 10; ++i) {
    if (i != 5) s += std::to_string(i) + ",1\n";
  }
  test::spit(dir / "gap.csv", s);
  EXPECT_TRUE(throws_code(ErrorCode::NonMonotonicSteps, [&] { (void)read_profile_csv(dir / "gap.csv", Unit::Wh); }));
}

TEST(ReadProfileCsv, NegativeLoadIsRejected) {
  TempDir dir("csv");
  test::spit(dir / "neg.csv", "step,value\n0,1\n1,-3\n");
  EXPECT_TRUE(throws_code(ErrorCode::NegativeLoad, [&] { (void)read_profile_csv(dir / "neg.csv", Unit::Wh); }));
}

TEST(ReadProfileCsv, MalformedInput) {
  TempDir dir("csv");
  test::spit(dir / "bad.csv", "step,value\n0,abc\n");
  EXPECT_TRUE(throws_code(ErrorCode::ParseError, [&] { (void)read_profile_csv(dir / "bad.csv", Unit::Wh); }));
  test::spit(dir / "hdr.csv", "t,v\n0,1\n");
  EXPECT_TRUE(throws_code(ErrorCode::ParseError, [&] { (void)read_profile_csv(dir / "hdr.csv", Unit::Wh); }));
  EXPECT_TRUE(throws_code(ErrorCode::ProfileMissing, [&] { (void)read_profile_csv(dir / "none.csv", Unit::Wh); }));
}

TEST(ReadProfileCsv, WriteReadRoundTrip) {
  TempDir dir("csv");
  const TimeSeries ts(Timestep{0}, Unit::PerMille, {0, 10, 999, 1000});
  write_profile_csv(dir / "rt.csv", ts);
  EXPECT_EQ(read_profile_csv(dir / "rt.csv", Unit::PerMille), ts);
}

TEST(Scale, UniformDoubling) {
  std::vector<std::int64_t> v(672);
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = static_cast<std::int64_t>((i * 37) % 300);
  const TimeSeries ts(Timestep{0}, Unit::Wh, v);
  const auto out = scale_to_total(ts, EnergyWh{2 * ts.sum()});
  for (std::size_t i = 0; i < v.size(); ++i) ASSERT_EQ(out[static_cast<std::int64_t>(i)], 2 * v[i]);
}

TEST(Scale, LargestRemainderEarliestFirst) {
  const TimeSeries ts(Timestep{0}, Unit::Wh, {1, 1, 1});
  EXPECT_EQ(values(scale_to_total(ts, EnergyWh{5})), (std::vector<std::int64_t>{2, 2, 1}));
}

TEST(Scale, ZeroSourceSum) {
  const TimeSeries ts(Timestep{0}, Unit::Wh, {0, 0, 0});
  EXPECT_TRUE(throws_code(ErrorCode::ZeroSourceSum, [&] { (void)scale_to_total(ts, EnergyWh{5}); }));
  EXPECT_TRUE(throws_code(ErrorCode::ZeroSourceSum, [&] { (void)scale_to_annual(ts, EnergyWh{5000}); }));
}

TEST(Scale, PreservesZerosAndOrder) {
  const TimeSeries ts(Timestep{0}, Unit::Wh, {0, 5, 3, 0, 9, 9, 1});
  const auto out = scale_to_total(ts, EnergyWh{1234});
  EXPECT_EQ(out.sum(), 1234);
  for (std::int64_t i = 0; i < ts.size(); ++i) {
    if (ts[i] == 0) EXPECT_EQ(out[i], 0);
    for (std::int64_t j = 0; j < ts.size(); ++j) {
      if (ts[i] < ts[j]) EXPECT_LE(out[i], out[j]);
    }
  }
}

TEST(Scale, AnnualTargetForOneWeek) {
  std::vector<std::int64_t> v(672, 1);
  const auto out = scale_to_annual(TimeSeries(Timestep{0}, Unit::Wh, v), EnergyWh{2'900'000});
  EXPECT_EQ(out.sum(), 55769);  // 2 900 000 / 52, rounded
}

TEST(SynthLoad, DeterministicAndScaled) {
  const auto a = synth_household_load(1, 2900, Week::Summer);
  const auto b = synth_household_load(1, 2900, Week::Summer);
  const auto c = synth_household_load(2, 2900, Week::Summer);
  EXPECT_EQ(a, b);
  EXPECT_NE(values(a), values(c));
  EXPECT_EQ(a.size(), 672);
  EXPECT_EQ(a.sum(), 55769);
  for (auto x : a.values()) ASSERT_GE(x, 0);
}

TEST(SynthLoad, EveningAboveNight) {
  const auto a = synth_household_load(3, 2900, Week::Transition);
  std::int64_t night = 0, evening = 0;
  for (int d = 0; d < 7; ++d) {
    for (int s = 8; s < 16; ++s) night += a[d * 96 + s];    // 02:00-04:00
    for (int s = 76; s < 84; ++s) evening += a[d * 96 + s];  // 19:00-21:00
  }
  EXPECT_GT(evening, night);
}

TEST(SynthPv, NightZeroAndSeasonalAmplitude) {
  for (const Week w : kAllWeeks) {
    const auto pv = synth_pv_capacity_factor(4, w);
    EXPECT_EQ(pv.size(), 672);
    EXPECT_EQ(pv[0], 0);
    for (int d = 0; d < 7; ++d) EXPECT_EQ(pv[d * 96 + 8], 0);  // 02:00
    for (auto x : pv.values()) {
      ASSERT_GE(x, 0);
      ASSERT_LE(x, 1000);
    }
  }
  EXPECT_LT(synth_pv_capacity_factor(4, Week::Winter).sum(), synth_pv_capacity_factor(4, Week::Summer).sum());
}

TEST(SynthHeat, SeasonalOrdering) {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const auto s = synth_heat_demand(seed, 15000, Week::Summer).sum();
    const auto t = synth_heat_demand(seed, 15000, Week::Transition).sum();
    const auto w = synth_heat_demand(seed, 15000, Week::Winter).sum();
    EXPECT_LT(s, t);
    EXPECT_LT(t, w);
  }
}

TEST(SynthEv, ItinerariesAreWellFormed) {
  for (std::uint64_t seed = 0; seed < 1000; ++seed) {
    const auto it = synth_ev_itinerary(seed, static_cast<Week>(seed % 3));
    ASSERT_NO_THROW(validate_itinerary(it, EnergyWh{50000})) << seed;
    ASSERT_FALSE(it.empty());
    for (std::size_t i = 0; i < it.size(); ++i) {
      ASSERT_LT(it[i].departure, it[i].arrival);
      if (i > 0) ASSERT_LT(it[i - 1].arrival, it[i].departure) << seed;
      const auto hour = (it[i].departure.index % 96) / 4;
      ASSERT_GE(hour, 5) << seed;
      ASSERT_LE(hour, 21) << seed;
    }
    // One or two trips per day.
    for (int d = 0; d < 7; ++d) {
      const auto n = std::count_if(it.begin(), it.end(), [&](const EvTrip& t) { return t.departure.index / 96 == d; });
      ASSERT_LE(n, 2);
    }
  }
}

TEST(SynthEv, SeriesRoundTrip) {
  const auto it = synth_ev_itinerary(11, Week::Summer);
  const auto ts = itinerary_to_series(it, Timestep{0}, 672);
  EXPECT_EQ(itinerary_from_series(ts), it);
  for (const auto& trip : it) {
    EXPECT_EQ(ts.at(trip.departure), -1);
    EXPECT_EQ(ts.at(trip.arrival), trip.energy_consumed_away.value);
  }
}

TEST(Itinerary, OverlapIsRejected) {
  const EvItinerary bad{{Timestep{10}, Timestep{20}, EnergyWh{1000}}, {Timestep{15}, Timestep{30}, EnergyWh{1000}}};
  EXPECT_TRUE(throws_code(ErrorCode::UnitOutOfRange, [&] { validate_itinerary(bad, EnergyWh{50000}); }));
  const EvItinerary big{{Timestep{10}, Timestep{20}, EnergyWh{60000}}};
  EXPECT_TRUE(throws_code(ErrorCode::UnitOutOfRange, [&] { validate_itinerary(big, EnergyWh{50000}); }));
}

TEST(ProfileSet, SynthCoversEveryReference) {
  const auto topo = default_topology(TopologyName::Countryside);
  const ProfileOptions opts;
  const auto set = synth_profile_set(topo, opts, 1, {Week::Summer, Week::Winter});
  EXPECT_TRUE(set.covers(Week::Summer));
  EXPECT_FALSE(set.covers(Week::Transition));
  EXPECT_TRUE(set.has(profile_id::load(true, 0), Week::Winter));
  EXPECT_TRUE(set.has(profile_id::load(false, 0), Week::Winter));
  EXPECT_TRUE(set.has(profile_id::kPv, Week::Summer));
  EXPECT_EQ(set.get(profile_id::kCop, Week::Winter)[0], opts.cop_winter);
  EXPECT_TRUE(throws_code(ErrorCode::ProfileMissing, [&] { (void)set.get(profile_id::kPv, Week::Transition); }));
}

TEST(ProfileSet, CsvRoundTripAndMissingFiles) {
  const auto topo = default_topology(TopologyName::Countryside);
  const auto set = synth_profile_set(topo, ProfileOptions{}, 2, {Week::Summer});
  TempDir dir("profiles");
  write_profile_set(set, dir.path());
  const auto back = load_profile_set(topo, dir.path(), {Week::Summer});
  for (const auto& id : set.ids()) EXPECT_EQ(back.get(id, Week::Summer), set.get(id, Week::Summer)) << id;
  EXPECT_TRUE(throws_code(ErrorCode::ProfileMissing, [&] { (void)load_profile_set(topo, dir.path(), {Week::Winter}); }));
}

TEST(ProfileSet, UnitFromId) {
  EXPECT_EQ(unit_for_profile("load/res/3"), Unit::Wh);
  EXPECT_EQ(unit_for_profile("heat/res/3"), Unit::WhTh);
  EXPECT_EQ(unit_for_profile(profile_id::kPv), Unit::PerMille);
  EXPECT_EQ(unit_for_profile(profile_id::kCop), Unit::CentiCop);
  EXPECT_EQ(unit_for_profile(profile_id::ev(0)), Unit::EvState);
}

}  // namespace
}  // namespace lemsim
