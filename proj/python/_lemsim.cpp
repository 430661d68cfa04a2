#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "lemsim/cli/cli.hpp"
#include "lemsim/core/error.hpp"
#include "lemsim/hems/hems.hpp"
#include "lemsim/market/market.hpp"
#include "lemsim/metrics/metrics.hpp"

namespace py = pybind11;
namespace fs = std::filesystem;

namespace {

// nlohmann -> Python through the json module keeps the binding small.
py::object to_python(const nlohmann::ordered_json& j) { return py::module_::import("json").attr("loads")(j.dump()); }

lemsim::Side side_of(const std::string& s) {
  if (s == "bid" || s == "buy") return lemsim::Side::Bid;
  if (s == "ask" || s == "sell") return lemsim::Side::Ask;
  throw py::value_error("side must be 'bid' or 'ask'");
}

py::dict clear(const std::vector<std::tuple<std::int64_t, std::int64_t>>& bids,
               const std::vector<std::tuple<std::int64_t, std::int64_t>>& asks) {
  using namespace lemsim;
  OrderBook book;
  const Timestep delivery{1};
  std::int64_t agent = 0;
  for (const auto* side : {&bids, &asks}) {
    for (const auto& [qty, limit] : *side) {
      Order o;
      o.agent_id = agent++;
      o.side = side == &bids ? Side::Bid : Side::Ask;
      o.delivery_step = delivery;
      o.qty = EnergyWh{qty};
      o.limit = PriceMct{limit};
      book.post(o, Timestep{0});
    }
  }
  const auto r = clear_auction(book, delivery, Timestep{0});
  py::list trades;
  for (const auto& t : r.trades) trades.append(py::make_tuple(t.buyer, t.seller, t.qty.value, t.price.value));
  py::dict out;
  out["price"] = r.clearing_price ? py::object(py::int_(r.clearing_price->value)) : py::object(py::none());
  out["volume"] = r.volume().value;
  out["trades"] = trades;
  return out;
}

}  // namespace

PYBIND11_MODULE(_lemsim, m) {
  m.doc() = "Local energy market simulator";
  py::register_exception<lemsim::Error>(m, "LemsimError", PyExc_RuntimeError);

  m.def("cash", [](std::int64_t wh, std::int64_t mct) { return lemsim::cash(lemsim::EnergyWh{wh}, lemsim::PriceMct{mct}).value; },
        py::arg("qty_wh"), py::arg("price_mct"), "Micro-euros for an energy quantity at a price in mct/kWh.");

  m.def(
      "linear_limit_price",
      [](const std::string& side, std::int64_t steps_remaining, std::int64_t trading_horizon) {
        return lemsim::linear_limit_price(side_of(side), steps_remaining, trading_horizon, lemsim::MarketParams{}).value;
      },
      py::arg("side"), py::arg("steps_remaining"), py::arg("trading_horizon"));

  m.def("clear_auction", &clear, py::arg("bids"), py::arg("asks"),
        "Clears one delivery step; bids and asks are (qty_wh, limit_mct) pairs. Agent ids number bids first.");

  m.def(
      "compute_opp",
      [](const std::vector<std::int64_t>& flow_w, double fraction) {
        const auto r = lemsim::compute_opp(flow_w, fraction);
        return py::make_tuple(r.opp_kw, r.k);
      },
      py::arg("flow_w"), py::arg("fraction") = 0.15);

  m.def(
      "generate",
      [](const fs::path& config, const fs::path& out) {
        const auto s = lemsim::cmd_generate(lemsim::load_config(config), out);
        return py::make_tuple(s.raw, s.runnable);
      },
      py::arg("config"), py::arg("out"), "Writes scenario manifests; returns (raw, runnable).");

  m.def(
      "run",
      [](const fs::path& scenario, bool lem, std::optional<std::uint64_t> seed, const fs::path& out) {
        const auto r = [&] {
          py::gil_scoped_release release;
          return lemsim::cmd_run(scenario, lem, seed, out);
        }();
        py::dict d;
        d["scenario_id"] = r.meta.scenario_id;
        d["ledger_rows"] = r.ledger.size();
        d["trades"] = r.trades.size();
        d["steps"] = r.flow_w.size();
        return d;
      },
      py::arg("scenario"), py::arg("lem") = true, py::arg("seed") = py::none(), py::arg("out"));

  m.def(
      "sweep",
      [](const fs::path& config, const fs::path& out, int jobs, bool resume) {
        const auto cfg = lemsim::load_config(config);
        const auto r = [&] {
          py::gil_scoped_release release;
          return lemsim::cmd_sweep(cfg, out, {jobs, resume});
        }();
        py::dict d;
        d["scenarios"] = r.scenarios;
        d["computed"] = r.computed;
        d["skipped"] = r.skipped;
        d["failed"] = r.failed;
        d["summary"] = r.summary;
        return d;
      },
      py::arg("config"), py::arg("out"), py::arg("jobs") = 1, py::arg("resume") = false);

  m.def(
      "metrics",
      [](const fs::path& with_dir, const fs::path& without_dir, double fraction, const fs::path& out) {
        return to_python(lemsim::cmd_metrics(with_dir, without_dir, fraction, out));
      },
      py::arg("with_dir"), py::arg("without_dir"), py::arg("fraction") = 0.15, py::arg("out"));
}
