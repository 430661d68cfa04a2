#include "lemsim/metrics/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <fmt/format.h>

#include "lemsim/core/error.hpp"

namespace lemsim {

double compute_aep(std::span<const LedgerRow> rows, const MarketParams& params, bool include_balancing) {
  // Everything is summed exactly in Wh * mct/kWh before the single division.
  __int128 value = 0;
  __int128 energy = 0;
  for (const auto& r : rows) {
    const auto& s = r.settlement;
    std::int64_t bought = s.lem_buy_qty.value + s.wholesale_buy_qty.value;
    std::int64_t paid = s.lem_buy_cash.value + s.wholesale_buy_cash.value;
    if (include_balancing) {
      bought += s.balancing_buy_qty.value;
      paid += s.balancing_buy_cash.value;
    }
    const std::int64_t self = r.dispatch.self_consumed();
    value += static_cast<__int128>(self) * params.feed_in_tariff.value;
    value += static_cast<__int128>(paid) * 100;
    value += static_cast<__int128>(bought) * params.levies.value;
    energy += self + bought;
  }
  if (energy <= 0) throw Error(ErrorCode::NoEnergy, "no self-consumed or purchased energy");
  // mct/kWh -> EUR/kWh
  return static_cast<double>(value) / (static_cast<double>(energy) * 100000.0);
}

OppResult compute_opp(std::span<const std::int64_t> flow_w, double fraction) {
  if (flow_w.empty()) throw Error(ErrorCode::UnitOutOfRange, "empty flow series");
  if (!(fraction > 0.0 && fraction <= 1.0)) {
    throw Error(ErrorCode::UnitOutOfRange, fmt::format("fraction {} outside (0, 1]", fraction));
  }
  const auto n = static_cast<std::int64_t>(flow_w.size());
  const std::int64_t k = std::max<std::int64_t>(1, static_cast<std::int64_t>(std::floor(fraction * static_cast<double>(n))));
  std::vector<std::int64_t> mag(flow_w.size());
  std::transform(flow_w.begin(), flow_w.end(), mag.begin(), [](std::int64_t f) { return f < 0 ? -f : f; });
  std::stable_sort(mag.begin(), mag.end(), std::greater<>());
  const __int128 sum = std::accumulate(mag.begin(), mag.begin() + k, static_cast<__int128>(0));
  return {static_cast<double>(sum) / (static_cast<double>(k) * 1000.0), k};
}

MetricsReport compute_metrics(const RunResult& run, double fraction) {
  return compute_metrics(run, fraction, run.meta.aep_include_balancing);
}

MetricsReport compute_metrics(const RunResult& run, double fraction, bool include_balancing) {
  MetricsReport rep;
  rep.scenario_id = run.meta.scenario_id;
  rep.lem_enabled = run.meta.lem_enabled;
  rep.fraction = fraction;
  rep.aep_include_balancing = include_balancing;
  rep.aep_eur_per_kwh = compute_aep(run.ledger, run.meta.market, include_balancing);
  const auto opp = compute_opp(run.flow_w, fraction);
  rep.opp_kw = opp.opp_kw;
  rep.k_used = opp.k;

  const auto& weeks = run.meta.scenario.weeks;
  for (std::size_t k = 0; k < weeks.size(); ++k) {
    WeekMetrics wm;
    wm.week = weeks[k];
    std::vector<LedgerRow> rows;
    std::copy_if(run.ledger.begin(), run.ledger.end(), std::back_inserter(rows),
                 [&](const LedgerRow& r) { return r.week_pos == static_cast<std::int64_t>(k); });
    try {
      wm.aep_eur_per_kwh = compute_aep(rows, run.meta.market, include_balancing);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::NoEnergy) throw;
    }
    const auto first = k * static_cast<std::size_t>(kStepsPerWeek);
    if (first < run.flow_w.size()) {
      const auto len = std::min<std::size_t>(kStepsPerWeek, run.flow_w.size() - first);
      const auto w_opp = compute_opp(std::span<const std::int64_t>(run.flow_w).subspan(first, len), fraction);
      wm.opp_kw = w_opp.opp_kw;
      wm.k_used = w_opp.k;
    }
    rep.weeks.push_back(wm);
  }
  return rep;
}

Comparison compare_runs(const MetricsReport& with_lem, const MetricsReport& without_lem) {
  if (with_lem.scenario_id != without_lem.scenario_id) {
    throw Error(ErrorCode::ScenarioMismatch,
                fmt::format("'{}' compared with '{}'", with_lem.scenario_id, without_lem.scenario_id));
  }
  if (without_lem.aep_eur_per_kwh == 0.0 || without_lem.opp_kw == 0.0) {
    throw Error(ErrorCode::DivByZero, "reference run has zero AEP or OPP");
  }
  return {with_lem.scenario_id, with_lem.aep_eur_per_kwh / without_lem.aep_eur_per_kwh,
          with_lem.opp_kw / without_lem.opp_kw};
}

nlohmann::ordered_json to_json(const MetricsReport& r) {
  nlohmann::ordered_json j;
  j["scenario_id"] = r.scenario_id;
  j["lem_enabled"] = r.lem_enabled;
  j["aep_eur_per_kwh"] = r.aep_eur_per_kwh;
  j["opp_kw"] = r.opp_kw;
  j["k_used"] = r.k_used;
  j["fraction"] = r.fraction;
  j["aep_include_balancing"] = r.aep_include_balancing;
  auto weeks = nlohmann::ordered_json::array();
  for (const auto& w : r.weeks) {
    nlohmann::ordered_json wj;
    wj["week"] = std::string(to_string(w.week));
    wj["aep_eur_per_kwh"] = w.aep_eur_per_kwh ? nlohmann::ordered_json(*w.aep_eur_per_kwh) : nlohmann::ordered_json(nullptr);
    wj["opp_kw"] = w.opp_kw;
    wj["k_used"] = w.k_used;
    weeks.push_back(wj);
  }
  j["weeks"] = weeks;
  return j;
}

nlohmann::ordered_json metrics_json(const MetricsReport& with_lem, const MetricsReport& without_lem,
                                    const Comparison& cmp) {
  nlohmann::ordered_json j;
  j["scenario_id"] = cmp.scenario_id;
  j["aep_ratio"] = cmp.aep_ratio;
  j["opp_ratio"] = cmp.opp_ratio;
  j["with_lem"] = to_json(with_lem);
  j["without_lem"] = to_json(without_lem);
  return j;
}

std::string summary_csv_header() {
  return "topology,pv,ev,hp,aep_with,aep_without,aep_ratio,opp_with,opp_without,opp_ratio";
}

std::string summary_csv_row(const Scenario& s, const MetricsReport& with_lem, const MetricsReport& without_lem,
                            const Comparison& cmp) {
  return fmt::format("{},{},{},{},{},{},{},{},{},{}", to_string(s.topology.name), s.shares.pv, s.shares.ev,
                     s.shares.hp, with_lem.aep_eur_per_kwh, without_lem.aep_eur_per_kwh, cmp.aep_ratio,
                     with_lem.opp_kw, without_lem.opp_kw, cmp.opp_ratio);
}

}  // namespace lemsim
