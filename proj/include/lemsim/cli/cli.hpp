#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "lemsim/core/config.hpp"
#include "lemsim/engine/engine.hpp"

namespace lemsim {

struct GenerateSummary {
  std::int64_t raw{0};
  std::int64_t runnable{0};
  std::vector<std::filesystem::path> manifests;

  /// "500 raw / 400 runnable"
  [[nodiscard]] std::string counts() const;
};

/// Writes `<id>.json` for every runnable scenario of `cfg` into `out_dir`.
GenerateSummary cmd_generate(const SimConfig& cfg, const std::filesystem::path& out_dir);

/// Runs one scenario manifest; `seed` replaces the manifest's assignment seed.
RunResult cmd_run(const std::filesystem::path& manifest, bool lem_enabled, std::optional<std::uint64_t> seed,
                  const std::filesystem::path& out_dir, const EngineRunOptions& opts = {});

enum class JobStatus { Pending, Done, Failed };

struct SweepEntry {
  std::string scenario_id;
  JobStatus status{JobStatus::Pending};
  /// Relative to the sweep directory; holds lem_on/ and lem_off/.
  std::string result_path;
  std::string error;

  bool operator==(const SweepEntry&) const = default;
};

struct SweepManifest {
  std::vector<SweepEntry> entries;

  bool operator==(const SweepManifest&) const = default;
};

std::string_view to_string(JobStatus s) noexcept;
nlohmann::ordered_json to_json(const SweepManifest& m);
SweepManifest sweep_manifest_from_json(const nlohmann::json& j);

/// Written to a temporary file and renamed over `path`.
void write_sweep_manifest(const std::filesystem::path& path, const SweepManifest& m);
SweepManifest read_sweep_manifest(const std::filesystem::path& path);

struct SweepOptions {
  int jobs{1};
  bool resume{false};
};

struct SweepReport {
  std::int64_t scenarios{0};
  std::int64_t computed{0};
  std::int64_t skipped{0};
  std::int64_t failed{0};
  std::filesystem::path summary;
};

/// Runs every scenario with and without the market, up to `jobs` scenarios
/// at a time, then writes summary.csv from the stored results in scenario
/// order. With `resume`, entries already done are kept as they are.
SweepReport cmd_sweep(const SimConfig& cfg, const std::filesystem::path& out_dir, const SweepOptions& opts = {});

/// Compares two run directories and writes metrics.json to `out_file`.
nlohmann::ordered_json cmd_metrics(const std::filesystem::path& with_dir, const std::filesystem::path& without_dir,
                                   double fraction, const std::filesystem::path& out_file);

}  // namespace lemsim
