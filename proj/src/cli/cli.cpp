#include "lemsim/cli/cli.hpp"

#include <algorithm>
#include <fstream>
#include <memory>
#include <map>
#include <mutex>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "lemsim/core/error.hpp"
#include "lemsim/engine/worker_pool.hpp"
#include "lemsim/metrics/metrics.hpp"
#include "lemsim/scenarios/scenarios.hpp"

namespace lemsim {

namespace fs = std::filesystem;

namespace {

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw Error(ErrorCode::IoError, fmt::format("cannot create {}", dir.string()));
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::IoError, fmt::format("cannot write {}", path.string()));
  out << text;
  out.close();
  if (!out) throw Error(ErrorCode::IoError, fmt::format("write failed for {}", path.string()));
}

std::vector<Scenario> raw_scenarios(const SimConfig& cfg) {
  if (cfg.scenario_shares.empty()) return enumerate_all_scenarios(cfg.topologies, cfg.weeks, cfg.seed);
  return scenarios_from_config(cfg);
}

std::vector<Scenario> runnable_scenarios(const SimConfig& cfg) {
  std::vector<Scenario> out;
  for (auto& s : raw_scenarios(cfg)) {
    if (s.runnable()) out.push_back(std::move(s));
  }
  return out;
}

MetricsReport metrics_of(const RunResult& r, double fraction) {
  return compute_metrics(r, fraction, r.meta.aep_include_balancing);
}

}  // namespace

std::string GenerateSummary::counts() const { return fmt::format("{} raw / {} runnable", raw, runnable); }

GenerateSummary cmd_generate(const SimConfig& cfg, const fs::path& out_dir) {
  ensure_dir(out_dir);
  GenerateSummary out;
  const auto all = raw_scenarios(cfg);
  out.raw = static_cast<std::int64_t>(all.size());
  for (const auto& s : all) {
    if (!s.runnable()) continue;
    const auto path = out_dir / (s.id() + ".json");
    write_manifest(path, s, cfg);
    out.manifests.push_back(path);
  }
  out.runnable = static_cast<std::int64_t>(out.manifests.size());
  return out;
}

RunResult cmd_run(const fs::path& manifest, bool lem_enabled, std::optional<std::uint64_t> seed, const fs::path& out_dir,
                  const EngineRunOptions& opts) {
  auto [scenario, cfg] = read_manifest(manifest);
  scenario.lem_enabled = lem_enabled;
  if (seed) scenario.seed = *seed;
  const auto profiles = build_profile_set(scenario.topology, cfg.profiles, cfg.seed, scenario.weeks);
  auto result = run_scenario(scenario, profiles, cfg, opts);
  write_run_result(result, out_dir);
  return result;
}

std::string_view to_string(JobStatus s) noexcept {
  switch (s) {
    case JobStatus::Pending: return "pending";
    case JobStatus::Done: return "done";
    case JobStatus::Failed: return "failed";
  }
  return "pending";
}

nlohmann::ordered_json to_json(const SweepManifest& m) {
  nlohmann::ordered_json entries = nlohmann::ordered_json::array();
  for (const auto& e : m.entries) {
    nlohmann::ordered_json j;
    j["scenario_id"] = e.scenario_id;
    j["status"] = std::string(to_string(e.status));
    j["result_path"] = e.result_path;
    if (!e.error.empty()) j["error"] = e.error;
    entries.push_back(std::move(j));
  }
  nlohmann::ordered_json out;
  out["entries"] = std::move(entries);
  return out;
}

SweepManifest sweep_manifest_from_json(const nlohmann::json& j) {
  SweepManifest m;
  try {
    for (const auto& e : j.at("entries")) {
      SweepEntry entry;
      entry.scenario_id = e.at("scenario_id").get<std::string>();
      const auto status = e.at("status").get<std::string>();
      if (status == "pending") {
        entry.status = JobStatus::Pending;
      } else if (status == "done") {
        entry.status = JobStatus::Done;
      } else if (status == "failed") {
        entry.status = JobStatus::Failed;
      } else {
        throw Error(ErrorCode::ParseError, fmt::format("unknown job status '{}'", status));
      }
      entry.result_path = e.at("result_path").get<std::string>();
      if (e.contains("error")) entry.error = e.at("error").get<std::string>();
      for (const auto& prev : m.entries) {
        if (prev.scenario_id == entry.scenario_id) {
          throw Error(ErrorCode::ParseError, fmt::format("duplicate scenario id {}", entry.scenario_id));
        }
      }
      m.entries.push_back(std::move(entry));
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ParseError, fmt::format("sweep manifest: {}", e.what()));
  }
  return m;
}

void write_sweep_manifest(const fs::path& path, const SweepManifest& m) {
  auto tmp = path;
  tmp += ".tmp";
  write_text(tmp, to_json(m).dump(2) + "\n");
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) throw Error(ErrorCode::IoError, fmt::format("cannot replace {}: {}", path.string(), ec.message()));
}

SweepManifest read_sweep_manifest(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, fmt::format("cannot open {}", path.string()));
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ParseError, fmt::format("{}: {}", path.string(), e.what()));
  }
  return sweep_manifest_from_json(j);
}

SweepReport cmd_sweep(const SimConfig& cfg, const fs::path& out_dir, const SweepOptions& opts) {
  if (opts.jobs < 1) throw Error(ErrorCode::UnitOutOfRange, "jobs must be at least 1");
  ensure_dir(out_dir);
  const auto scenarios = runnable_scenarios(cfg);
  const auto manifest_path = out_dir / "sweep_manifest.json";

  std::map<std::string, SweepEntry> previous;
  if (opts.resume && fs::exists(manifest_path)) {
    for (auto& e : read_sweep_manifest(manifest_path).entries) previous.emplace(e.scenario_id, std::move(e));
  }

  SweepManifest manifest;
  std::vector<std::size_t> todo;
  SweepReport report;
  report.scenarios = static_cast<std::int64_t>(scenarios.size());
  for (std::size_t i = 0; i < scenarios.size(); ++i) {
    const auto id = scenarios[i].id();
    for (const auto& e : manifest.entries) {
      if (e.scenario_id == id) throw Error(ErrorCode::UnitOutOfRange, fmt::format("duplicate scenario {}", id));
    }
    SweepEntry entry{id, JobStatus::Pending, (fs::path("runs") / id).generic_string(), {}};
    const auto it = previous.find(id);
    if (it != previous.end() && it->second.status == JobStatus::Done) {
      entry = it->second;
      ++report.skipped;
    } else {
      todo.push_back(i);
    }
    manifest.entries.push_back(std::move(entry));
  }
  write_sweep_manifest(manifest_path, manifest);

  // Profiles are shared read-only by every job of a topology.
  std::map<std::string, std::shared_ptr<const ProfileSet>> profiles;
  std::map<std::string, std::string> profile_errors;
  auto topo_key = [](const GridTopology& t) {
    return fmt::format("{}/{}/{}/{}/{}/{}/{}", to_string(t.name), t.transformer_kva, t.residential_count,
                       t.non_residential_count, t.annual_elec_mwh, t.annual_heat_mwh, t.annual_ev_mwh);
  };
  for (const std::size_t i : todo) {
    const auto& topo = scenarios[i].topology;
    const auto key = topo_key(topo);
    if (profiles.count(key) || profile_errors.count(key)) continue;
    try {
      profiles[key] = std::make_shared<const ProfileSet>(build_profile_set(topo, cfg.profiles, cfg.seed, cfg.weeks));
    } catch (const Error& e) {
      profile_errors[key] = e.what();
    }
  }

  std::mutex mu;
  WorkerPool pool(opts.jobs);
  pool.run(static_cast<std::int64_t>(todo.size()), [&](std::int64_t k) {
    const std::size_t i = todo[static_cast<std::size_t>(k)];
    const auto& scenario = scenarios[i];
    const fs::path dir = out_dir / manifest.entries[i].result_path;
    std::string error;
    try {
      const auto key = topo_key(scenario.topology);
      if (const auto it = profile_errors.find(key); it != profile_errors.end()) {
        throw Error(ErrorCode::ProfileMissing, it->second);
      }
      const auto& set = *profiles.at(key);
      for (const bool lem : {true, false}) {
        auto s = scenario;
        s.lem_enabled = lem;
        write_run_result(run_scenario(s, set, cfg), dir / (lem ? "lem_on" : "lem_off"));
      }
      spdlog::info("{} done", scenario.id());
    } catch (const std::exception& e) {
      error = e.what();
      spdlog::error("{} failed: {}", scenario.id(), error);
    }
    const std::lock_guard lock(mu);
    auto& entry = manifest.entries[i];
    entry.status = error.empty() ? JobStatus::Done : JobStatus::Failed;
    entry.error = error;
    if (error.empty()) ++report.computed;
    write_sweep_manifest(manifest_path, manifest);
  });

  std::string csv = summary_csv_header() + "\n";
  for (std::size_t i = 0; i < scenarios.size(); ++i) {
    auto& entry = manifest.entries[i];
    if (entry.status != JobStatus::Done) {
      ++report.failed;
      continue;
    }
    const auto dir = out_dir / entry.result_path;
    const auto on = metrics_of(read_run_result(dir / "lem_on"), 0.15);
    const auto off = metrics_of(read_run_result(dir / "lem_off"), 0.15);
    try {
      const auto cmp = compare_runs(on, off);
      csv += summary_csv_row(scenarios[i], on, off, cmp) + "\n";
    } catch (const Error& e) {
      spdlog::error("{}: {}", entry.scenario_id, e.what());
      entry.status = JobStatus::Failed;
      entry.error = e.what();
      ++report.failed;
    }
  }
  write_sweep_manifest(manifest_path, manifest);
  report.summary = out_dir / "summary.csv";
  write_text(report.summary, csv);
  return report;
}

nlohmann::ordered_json cmd_metrics(const fs::path& with_dir, const fs::path& without_dir, double fraction,
                                   const fs::path& out_file) {
  const auto with_run = read_run_result(with_dir);
  const auto without_run = read_run_result(without_dir);
  const auto on = metrics_of(with_run, fraction);
  const auto off = metrics_of(without_run, fraction);
  const auto cmp = compare_runs(on, off);
  auto j = metrics_json(on, off, cmp);
  if (out_file.has_parent_path()) ensure_dir(out_file.parent_path());
  write_text(out_file, j.dump(2) + "\n");
  return j;
}

}  // namespace lemsim
