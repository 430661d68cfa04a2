#include "lemsim/market/market.hpp"

#include <algorithm>

#include <fmt/format.h>

#include "lemsim/core/error.hpp"

namespace lemsim {

EnergyWh ClearingResult::volume() const {
  EnergyWh v;
  for (const auto& t : trades) v += t.qty;
  return v;
}

const Order& OrderBook::post(Order order, Timestep now) {
  if (order.delivery_step <= now) {
    throw Error(ErrorCode::DeliveryInPast,
                fmt::format("delivery step {} is not after {}", order.delivery_step.index, now.index));
  }
  if (order.qty.value <= 0) throw Error(ErrorCode::ZeroQty, "order quantity must be > 0");
  if (order.limit.value < 0 || order.limit.value > 100000) {
    throw Error(ErrorCode::UnitOutOfRange, fmt::format("limit {} outside [0, 100000]", order.limit.value));
  }
  order.submitted_at = now;
  order.sequence_no = next_seq_++;
  order.order_id = next_id_++;
  auto& slot = by_delivery_[order.delivery_step.index];
  for (auto& o : slot) {
    if (o.agent_id == order.agent_id && o.side == order.side) {
      o = order;
      return o;
    }
  }
  slot.push_back(order);
  return slot.back();
}

void OrderBook::cancel(std::int64_t agent_id, Timestep delivery, Side side) {
  auto it = by_delivery_.find(delivery.index);
  if (it == by_delivery_.end()) return;
  std::erase_if(it->second, [&](const Order& o) { return o.agent_id == agent_id && o.side == side; });
  if (it->second.empty()) by_delivery_.erase(it);
}

void OrderBook::cancel_all(std::int64_t agent_id, Timestep delivery) {
  auto it = by_delivery_.find(delivery.index);
  if (it == by_delivery_.end()) return;
  std::erase_if(it->second, [&](const Order& o) { return o.agent_id == agent_id; });
  if (it->second.empty()) by_delivery_.erase(it);
}

void OrderBook::close(Timestep delivery) { by_delivery_.erase(delivery.index); }

std::vector<Order> OrderBook::orders(Timestep delivery) const {
  auto it = by_delivery_.find(delivery.index);
  return it == by_delivery_.end() ? std::vector<Order>{} : it->second;
}

std::vector<Timestep> OrderBook::open_deliveries() const {
  std::vector<Timestep> out;
  out.reserve(by_delivery_.size());
  for (const auto& [t, _] : by_delivery_) out.emplace_back(t);
  return out;
}

std::size_t OrderBook::size() const {
  std::size_t n = 0;
  for (const auto& [_, v] : by_delivery_) n += v.size();
  return n;
}

PriceMct clearing_price_rule(PriceMct marginal_bid, PriceMct marginal_ask) {
  return PriceMct{div_round_half_away(marginal_bid.value + marginal_ask.value, 2)};
}

ClearingResult OrderBook::clear(Timestep delivery, Timestep now) {
  ClearingResult result;
  result.delivery_step = delivery;
  auto it = by_delivery_.find(delivery.index);
  if (it == by_delivery_.end()) return result;

  std::vector<Order*> bids, asks;
  for (auto& o : it->second) (o.side == Side::Bid ? bids : asks).push_back(&o);
  auto by_time = [](const Order* a, const Order* b) { return a->sequence_no < b->sequence_no; };
  std::sort(bids.begin(), bids.end(), [&](const Order* a, const Order* b) {
    return a->limit != b->limit ? a->limit > b->limit : by_time(a, b);
  });
  std::sort(asks.begin(), asks.end(), [&](const Order* a, const Order* b) {
    return a->limit != b->limit ? a->limit < b->limit : by_time(a, b);
  });

  struct Fill {
    std::int64_t buyer, seller;
    EnergyWh qty;
  };
  std::vector<Fill> fills;
  std::size_t i = 0, j = 0;
  const Order* marginal_bid = nullptr;
  const Order* marginal_ask = nullptr;
  while (i < bids.size() && j < asks.size() && bids[i]->limit >= asks[j]->limit) {
    Order& b = *bids[i];
    Order& a = *asks[j];
    const EnergyWh q = std::min(b.qty, a.qty);
    fills.push_back({b.agent_id, a.agent_id, q});
    marginal_bid = &b;
    marginal_ask = &a;
    b.qty -= q;
    a.qty -= q;
    if (b.qty.value == 0) ++i;
    if (a.qty.value == 0) ++j;
  }

  if (!fills.empty()) {
    const PriceMct price = clearing_price_rule(marginal_bid->limit, marginal_ask->limit);
    result.clearing_price = price;
    result.trades.reserve(fills.size());
    for (const auto& f : fills) result.trades.push_back(Trade{delivery, now, f.buyer, f.seller, f.qty, price});
    std::erase_if(it->second, [](const Order& o) { return o.qty.value == 0; });
  }
  result.residue = it->second;
  if (it->second.empty()) by_delivery_.erase(it);
  return result;
}

ClearingResult clear_auction(OrderBook& book, Timestep delivery, Timestep now) { return book.clear(delivery, now); }

// ---------------------------------------------------------------------------

SettlementRecord& SettlementRecord::operator+=(const SettlementRecord& o) {
  lem_buy_qty += o.lem_buy_qty;
  lem_sell_qty += o.lem_sell_qty;
  lem_buy_cash += o.lem_buy_cash;
  lem_sell_cash += o.lem_sell_cash;
  wholesale_buy_qty += o.wholesale_buy_qty;
  wholesale_sell_qty += o.wholesale_sell_qty;
  wholesale_buy_cash += o.wholesale_buy_cash;
  wholesale_sell_cash += o.wholesale_sell_cash;
  balancing_buy_qty += o.balancing_buy_qty;
  balancing_sell_qty += o.balancing_sell_qty;
  balancing_buy_cash += o.balancing_buy_cash;
  balancing_sell_cash += o.balancing_sell_cash;
  return *this;
}

EnergyWh SettlementRecord::contracted_net() const {
  return lem_buy_qty - lem_sell_qty + wholesale_buy_qty - wholesale_sell_qty;
}

EnergyWh SettlementRecord::balancing_net() const { return balancing_buy_qty - balancing_sell_qty; }

CashMicroEur SettlementRecord::net_cost() const {
  return lem_buy_cash - lem_sell_cash + wholesale_buy_cash - wholesale_sell_cash + balancing_buy_cash -
         balancing_sell_cash;
}

SettlementRecord wholesale_gate(EnergyWh residual, const MarketParams& params) {
  SettlementRecord r;
  if (residual.value > 0) {
    r.wholesale_buy_qty = residual;
    r.wholesale_buy_cash = cash(residual, params.energy_price_buy);
  } else if (residual.value < 0) {
    r.wholesale_sell_qty = -residual;
    r.wholesale_sell_cash = cash(-residual, params.feed_in_tariff);
  }
  return r;
}

SettlementRecord settle_balancing(EnergyWh metered, EnergyWh contracted, const MarketParams& params, bool lem_enabled) {
  SettlementRecord r;
  const EnergyWh d = metered - contracted;
  if (d.value > 0) {
    r.balancing_buy_qty = d;
    r.balancing_buy_cash = cash(d, lem_enabled ? params.balancing_buy : params.energy_price_buy);
  } else if (d.value < 0) {
    r.balancing_sell_qty = -d;
    r.balancing_sell_cash = cash(-d, lem_enabled ? params.balancing_sell : params.feed_in_tariff);
  }
  return r;
}

}  // namespace lemsim
