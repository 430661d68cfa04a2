#include <fmt/format.h>

#include "lemsim/core/error.hpp"
#include "lemsim/hems/hems.hpp"

namespace lemsim {

PriceMct linear_limit_price(Side side, std::int64_t steps_remaining, std::int64_t trading_horizon,
                            const MarketParams& params) {
  if (trading_horizon < 2 || steps_remaining < 1 || steps_remaining > trading_horizon) {
    throw Error(ErrorCode::UnitOutOfRange,
                fmt::format("steps remaining {} outside [1, {}]", steps_remaining, trading_horizon));
  }
  const std::int64_t cap = params.lem_price_cap.value;
  const std::int64_t floor = params.lem_price_floor.value;
  const std::int64_t den = trading_horizon - 1;
  const std::int64_t num = (cap - floor) * (steps_remaining - 1);
  // Round the whole expression, not just the fraction, so halves go up.
  if (side == Side::Bid) return PriceMct{div_round_half_away(cap * den - num, den)};
  return PriceMct{div_round_half_away(floor * den + num, den)};
}

std::vector<Order> make_orders(const DispatchPlan& plan, const CommittedPosition& committed, const HemsParams& hems,
                               Timestep now, const MarketParams& params, std::int64_t agent_id) {
  std::vector<Order> out;
  const std::int64_t H = hems.trading_horizon_steps;
  for (std::int64_t s = 1; s <= H; ++s) {
    const Timestep T = now + s;
    if (!plan.covers(T)) break;
    const EnergyWh r = plan.net(T) - committed.net_traded(T);
    if (r.value == 0) continue;
    Order o;
    o.agent_id = agent_id;
    o.side = r.value > 0 ? Side::Bid : Side::Ask;
    o.delivery_step = T;
    o.qty = r.value > 0 ? r : -r;
    o.limit = linear_limit_price(o.side, s, H, params);
    o.submitted_at = now;
    out.push_back(o);
  }
  return out;
}

}  // namespace lemsim
