#include <cstdlib>
#include <optional>
#include <string>

#include <CLI11/CLI11.hpp>
#include <fmt/format.h>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "lemsim/cli/cli.hpp"
#include "lemsim/core/error.hpp"

namespace {

// Returns false for an unknown level name.
bool configure_logging() {
  auto logger = spdlog::stderr_color_mt("lemsim");
  spdlog::set_default_logger(logger);
  const char* env = std::getenv("LEMSIM_LOG");
  const std::string level = env ? env : "warn";
  if (level == "error") {
    spdlog::set_level(spdlog::level::err);
  } else if (level == "warn") {
    spdlog::set_level(spdlog::level::warn);
  } else if (level == "info") {
    spdlog::set_level(spdlog::level::info);
  } else if (level == "debug") {
    spdlog::set_level(spdlog::level::debug);
  } else {
    return false;
  }
  return true;
}

}  // namespace

int main(int argc, char** argv) {
  if (!configure_logging()) {
    fmt::print(stderr, "error: LEMSIM_LOG must be one of error, warn, info, debug\n");
    return 2;
  }

  CLI::App app{"Local energy market simulator"};
  app.require_subcommand(1);

  std::string config_path, out_dir, scenario_path, lem = "on", with_dir, without_dir, out_file;
  std::uint64_t seed = 0;
  int jobs = 1;
  bool resume = false;
  double fraction = 0.15;

  auto* gen = app.add_subcommand("generate", "Write one manifest per runnable scenario");
  gen->add_option("--config", config_path, "Config file")->required();
  gen->add_option("--out", out_dir, "Output directory")->required();

  auto* run = app.add_subcommand("run", "Run one scenario manifest");
  run->add_option("--scenario", scenario_path, "Scenario manifest")->required();
  run->add_option("--lem", lem, "Local market on or off")->check(CLI::IsMember({"on", "off"}));
  auto* seed_opt = run->add_option("--seed", seed, "Device assignment seed");
  run->add_option("--out", out_dir, "Result directory")->required();

  auto* sweep = app.add_subcommand("sweep", "Run every scenario with and without the market");
  sweep->add_option("--config", config_path, "Config file")->required();
  sweep->add_option("--jobs", jobs, "Parallel scenario jobs")->check(CLI::PositiveNumber);
  sweep->add_flag("--resume", resume, "Keep finished scenarios of an earlier sweep");
  sweep->add_option("--out", out_dir, "Sweep directory")->required();

  auto* metrics = app.add_subcommand("metrics", "Compare a run with and without the market");
  metrics->add_option("--with", with_dir, "Run directory with the market")->required();
  metrics->add_option("--without", without_dir, "Run directory without the market")->required();
  metrics->add_option("--fraction", fraction, "Share of largest flows for the peak metric")
      ->check(CLI::Range(0.0, 1.0));
  metrics->add_option("--out", out_file, "metrics.json path")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (gen->parsed()) {
      const auto summary = lemsim::cmd_generate(lemsim::load_config(config_path), out_dir);
      fmt::print("{}\n", summary.counts());
    } else if (run->parsed()) {
      const auto s = seed_opt->count() > 0 ? std::optional<std::uint64_t>(seed) : std::nullopt;
      const auto result = lemsim::cmd_run(scenario_path, lem == "on", s, out_dir);
      spdlog::info("{}: {} ledger rows, {} trades", result.meta.scenario_id, result.ledger.size(), result.trades.size());
    } else if (sweep->parsed()) {
      const auto report = lemsim::cmd_sweep(lemsim::load_config(config_path), out_dir, {jobs, resume});
      fmt::print("{} scenarios: {} computed, {} reused, {} failed\n", report.scenarios, report.computed,
                 report.skipped, report.failed);
      if (report.failed > 0) return 1;
    } else if (metrics->parsed()) {
      const auto j = lemsim::cmd_metrics(with_dir, without_dir, fraction, out_file);
      fmt::print("aep_ratio {} opp_ratio {}\n", j["aep_ratio"].dump(), j["opp_ratio"].dump());
    }
  } catch (const std::exception& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return 1;
  }
  return 0;
}
