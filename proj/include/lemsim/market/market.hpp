#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <vector>

#include "lemsim/core/params.hpp"
#include "lemsim/core/units.hpp"

namespace lemsim {

enum class Side { Bid, Ask };

struct Order {
  std::int64_t order_id{0};
  std::int64_t agent_id{0};
  Side side{Side::Bid};
  Timestep delivery_step;
  EnergyWh qty;
  PriceMct limit;
  Timestep submitted_at;
  std::int64_t sequence_no{0};

  bool operator==(const Order&) const = default;
};

struct Trade {
  Timestep delivery_step;
  Timestep clearing_step;
  std::int64_t buyer{0};
  std::int64_t seller{0};
  EnergyWh qty;
  PriceMct price;

  bool operator==(const Trade&) const = default;
};

struct ClearingResult {
  Timestep delivery_step;
  std::optional<PriceMct> clearing_price;
  std::vector<Trade> trades;
  /// Orders (or their unfilled remainder) still open after the clearing.
  std::vector<Order> residue;

  [[nodiscard]] EnergyWh volume() const;
};

/// Open limit orders, grouped by delivery step. One open order per
/// (agent, delivery step, side); re-posting replaces it.
class OrderBook {
 public:
  /// Assigns order id and sequence number. Throws DeliveryInPast when
  /// delivery_step <= now, ZeroQty when qty <= 0, UnitOutOfRange for a limit
  /// outside [0, 100000].
  const Order& post(Order order, Timestep now);

  void cancel(std::int64_t agent_id, Timestep delivery, Side side);
  void cancel_all(std::int64_t agent_id, Timestep delivery);
  /// Drops every open order for a delivery step (after its final gate).
  void close(Timestep delivery);

  /// Runs the uniform-price auction for one delivery step. Matched volume is
  /// removed from the book; the residue stays open.
  ClearingResult clear(Timestep delivery, Timestep now);

  [[nodiscard]] std::vector<Order> orders(Timestep delivery) const;
  [[nodiscard]] std::vector<Timestep> open_deliveries() const;
  [[nodiscard]] std::size_t size() const;

 private:
  std::map<std::int64_t, std::vector<Order>> by_delivery_;
  std::int64_t next_seq_{0};
  std::int64_t next_id_{0};
};

/// Uniform price for a crossing marginal pair, rounded half away from zero.
PriceMct clearing_price_rule(PriceMct marginal_bid, PriceMct marginal_ask);

ClearingResult clear_auction(OrderBook& book, Timestep delivery, Timestep now);

/// Cash flows attached to one agent and step. Quantities and amounts are
/// non-negative; "buy" amounts are paid by the agent, "sell" amounts received.
struct SettlementRecord {
  EnergyWh lem_buy_qty, lem_sell_qty;
  CashMicroEur lem_buy_cash, lem_sell_cash;
  EnergyWh wholesale_buy_qty, wholesale_sell_qty;
  CashMicroEur wholesale_buy_cash, wholesale_sell_cash;
  EnergyWh balancing_buy_qty, balancing_sell_qty;
  CashMicroEur balancing_buy_cash, balancing_sell_cash;

  SettlementRecord& operator+=(const SettlementRecord& o);
  bool operator==(const SettlementRecord&) const = default;

  /// Net energy contracted ahead of delivery (+ = bought).
  [[nodiscard]] EnergyWh contracted_net() const;
  [[nodiscard]] EnergyWh balancing_net() const;
  /// Net amount paid by the agent over all components.
  [[nodiscard]] CashMicroEur net_cost() const;
};

/// Final gate: the residual planned exchange goes to the retailer at the
/// wholesale price (purchase) or the feed-in tariff (sale).
SettlementRecord wholesale_gate(EnergyWh residual, const MarketParams& params);

/// Deviation of metered from contracted energy, priced at the balancing
/// prices with a LEM and at the retail tariffs without one.
SettlementRecord settle_balancing(EnergyWh metered, EnergyWh contracted, const MarketParams& params, bool lem_enabled);

}  // namespace lemsim
