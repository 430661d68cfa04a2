#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <vector>

#include <nlohmann/json.hpp>

#include "lemsim/core/config.hpp"
#include "lemsim/core/params.hpp"
#include "lemsim/profiles/profiles.hpp"

namespace lemsim {

enum class BuildingClass { Residential, NonResidential };

struct Agent {
  std::int64_t id{0};
  BuildingClass building{BuildingClass::Residential};
  /// Position within its building class; selects the agent's profiles.
  std::int64_t class_index{0};
  std::vector<DeviceSpec> devices;
  HemsParams hems;

  template <class T>
  [[nodiscard]] const T* find() const {
    for (const auto& d : devices) {
      if (const auto* p = std::get_if<T>(&d)) return p;
    }
    return nullptr;
  }

  bool operator==(const Agent&) const = default;
};

struct AgentRoster {
  std::vector<Agent> agents;

  [[nodiscard]] std::int64_t count_with_pv() const;
  [[nodiscard]] std::int64_t count_with_ev() const;
  [[nodiscard]] std::int64_t count_with_hp() const;
  bool operator==(const AgentRoster&) const = default;
};

/// Number of households equipped at a penetration level, rounded half to even.
std::int64_t share_count(int share_percent, std::int64_t households);

/// Cross product of topologies and the 25 %-step share cube, unfiltered.
std::vector<Scenario> enumerate_all_scenarios(const std::vector<GridTopology>& topologies,
                                              const std::vector<Week>& weeks, std::uint64_t seed);

/// As above, restricted to runnable (PV > 0) scenarios.
std::vector<Scenario> enumerate_scenarios(const std::vector<GridTopology>& topologies, const std::vector<Week>& weeks,
                                          std::uint64_t seed);

/// Scenarios a config asks for: its explicit share list, or the full matrix.
std::vector<Scenario> scenarios_from_config(const SimConfig& cfg);

/// Equips households with PV + battery, EV and HP by independent seeded
/// shuffles; throws ProfileMissing if a referenced profile is absent for any
/// of `weeks`.
AgentRoster assign_devices(const GridTopology& topology, const Shares& shares, const ProfileSet& profiles,
                           std::uint64_t seed, const SimConfig& cfg, const std::vector<Week>& weeks);

/// Convenience overload with default config and all weeks present in `profiles`.
AgentRoster assign_devices(const GridTopology& topology, const Shares& shares, const ProfileSet& profiles,
                           std::uint64_t seed);

nlohmann::json scenario_to_json(const Scenario& s);
Scenario scenario_from_json(const nlohmann::json& j);

struct ScenarioManifest {
  Scenario scenario;
  SimConfig config;
};

void write_manifest(const std::filesystem::path& path, const Scenario& s, const SimConfig& cfg);
ScenarioManifest read_manifest(const std::filesystem::path& path);

}  // namespace lemsim
