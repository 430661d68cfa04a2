#pragma once

#include <compare>
#include <cstdint>

#include "lemsim/core/error.hpp"

namespace lemsim {

inline constexpr std::int64_t kStepsPerHour = 4;
inline constexpr std::int64_t kStepsPerDay = 96;
inline constexpr std::int64_t kStepsPerWeek = 672;
inline constexpr std::int64_t kWeeksPerYear = 52;

namespace checked {

inline std::int64_t add(std::int64_t a, std::int64_t b) {
  std::int64_t r;
  if (__builtin_add_overflow(a, b, &r)) throw Error(ErrorCode::Overflow, "integer addition overflow");
  return r;
}

inline std::int64_t sub(std::int64_t a, std::int64_t b) {
  std::int64_t r;
  if (__builtin_sub_overflow(a, b, &r)) throw Error(ErrorCode::Overflow, "integer subtraction overflow");
  return r;
}

inline std::int64_t mul(std::int64_t a, std::int64_t b) {
  std::int64_t r;
  if (__builtin_mul_overflow(a, b, &r)) throw Error(ErrorCode::Overflow, "integer multiplication overflow");
  return r;
}

}  // namespace checked

/// Integer division rounding half away from zero. `den` must be positive.
constexpr std::int64_t div_round_half_away(std::int64_t num, std::int64_t den) noexcept {
  return num >= 0 ? (num + den / 2) / den : -((-num + den / 2) / den);
}

/// Rounds a double half away from zero to the nearest integer.
std::int64_t round_half_away(double x) noexcept;

/// Number of 15-minute intervals since simulation start.
struct Timestep {
  std::int64_t index{0};

  constexpr Timestep() = default;
  constexpr explicit Timestep(std::int64_t i) : index(i) {}

  constexpr auto operator<=>(const Timestep&) const = default;
  constexpr Timestep operator+(std::int64_t n) const { return Timestep{index + n}; }
  constexpr Timestep operator-(std::int64_t n) const { return Timestep{index - n}; }
  constexpr std::int64_t operator-(Timestep o) const { return index - o.index; }
};

template <class Tag>
struct Quantity {
  std::int64_t value{0};

  constexpr Quantity() = default;
  constexpr explicit Quantity(std::int64_t v) : value(v) {}

  constexpr auto operator<=>(const Quantity&) const = default;

  Quantity operator+(Quantity o) const { return Quantity{checked::add(value, o.value)}; }
  Quantity operator-(Quantity o) const { return Quantity{checked::sub(value, o.value)}; }
  Quantity operator-() const { return Quantity{checked::sub(0, value)}; }
  Quantity& operator+=(Quantity o) { return *this = *this + o; }
  Quantity& operator-=(Quantity o) { return *this = *this - o; }
};

struct EnergyTag {};
struct PriceTag {};
struct CashTag {};

/// Signed watt-hours.
using EnergyWh = Quantity<EnergyTag>;
/// Milli-cents per kWh: 14.70 ct/kWh is 14700.
using PriceMct = Quantity<PriceTag>;
/// Signed micro-euros.
using CashMicroEur = Quantity<CashTag>;

/// Settlement amount: qty [Wh] times price [mct/kWh] is qty*price/100 micro-euros,
/// rounded half away from zero.
inline CashMicroEur cash(EnergyWh qty, PriceMct price) {
  return CashMicroEur{div_round_half_away(checked::mul(qty.value, price.value), 100)};
}

/// Converts a decimal ct/kWh figure from a config file into milli-cents.
inline PriceMct price_from_ct(double ct_per_kwh) { return PriceMct{round_half_away(ct_per_kwh * 1000.0)}; }

}  // namespace lemsim
