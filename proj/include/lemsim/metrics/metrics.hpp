#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "lemsim/core/params.hpp"
#include "lemsim/engine/engine.hpp"

namespace lemsim {

/// Average energy price in EUR/kWh: self-consumed PV valued at the feed-in
/// tariff it displaces, purchased energy at its realised price plus levies.
/// Export revenue does not enter. Throws NoEnergy when nothing was consumed.
double compute_aep(std::span<const LedgerRow> rows, const MarketParams& params, bool include_balancing = true);

struct OppResult {
  double opp_kw{0.0};
  std::int64_t k{0};
};

/// Mean of the k = max(1, floor(fraction * n)) largest absolute flows, in kW.
OppResult compute_opp(std::span<const std::int64_t> flow_w, double fraction = 0.15);

struct WeekMetrics {
  Week week{Week::Summer};
  std::optional<double> aep_eur_per_kwh;
  double opp_kw{0.0};
  std::int64_t k_used{0};
};

struct MetricsReport {
  std::string scenario_id;
  bool lem_enabled{true};
  double aep_eur_per_kwh{0.0};
  double opp_kw{0.0};
  std::int64_t k_used{0};
  double fraction{0.15};
  bool aep_include_balancing{true};
  std::vector<WeekMetrics> weeks;
};

MetricsReport compute_metrics(const RunResult& run, double fraction = 0.15);
MetricsReport compute_metrics(const RunResult& run, double fraction, bool include_balancing);

struct Comparison {
  std::string scenario_id;
  double aep_ratio{1.0};
  double opp_ratio{1.0};
};

/// Throws ScenarioMismatch for different scenario ids, DivByZero when a
/// reference value is zero.
Comparison compare_runs(const MetricsReport& with_lem, const MetricsReport& without_lem);

nlohmann::ordered_json to_json(const MetricsReport& report);
nlohmann::ordered_json metrics_json(const MetricsReport& with_lem, const MetricsReport& without_lem,
                                    const Comparison& cmp);

std::string summary_csv_header();
std::string summary_csv_row(const Scenario& scenario, const MetricsReport& with_lem, const MetricsReport& without_lem,
                            const Comparison& cmp);

}  // namespace lemsim
