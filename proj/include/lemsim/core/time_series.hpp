#pragma once

#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "lemsim/core/units.hpp"

namespace lemsim {

enum class Unit {
  Wh,        // electric energy per step
  WhTh,      // thermal energy per step
  Mct,       // price
  PerMille,  // capacity factor
  CentiCop,  // heat pump coefficient of performance x100
  EvState,   // -1 away, otherwise energy consumed away (revealed on the arrival step)
  W,         // power
};

std::string_view to_string(Unit u) noexcept;
Unit unit_from_string(std::string_view s);

/// Fixed 15-minute sequence of integer quantities. Never empty.
class TimeSeries {
 public:
  TimeSeries(Timestep start, Unit unit, std::vector<std::int64_t> values);

  [[nodiscard]] Timestep start() const noexcept { return start_; }
  [[nodiscard]] Timestep end() const noexcept { return start_ + size(); }
  [[nodiscard]] Unit unit() const noexcept { return unit_; }
  [[nodiscard]] std::int64_t size() const noexcept { return static_cast<std::int64_t>(values_.size()); }
  [[nodiscard]] std::span<const std::int64_t> values() const noexcept { return values_; }

  [[nodiscard]] bool contains(Timestep t) const noexcept { return t >= start_ && t < end(); }
  /// Throws UnitOutOfRange outside [start, start+len).
  [[nodiscard]] std::int64_t at(Timestep t) const;
  [[nodiscard]] std::int64_t operator[](std::int64_t i) const noexcept { return values_[static_cast<std::size_t>(i)]; }

  [[nodiscard]] std::int64_t sum() const;

  bool operator==(const TimeSeries&) const = default;

 private:
  Timestep start_;
  Unit unit_;
  std::vector<std::int64_t> values_;
};

/// Append-only record of realized values; grows by one value per simulated step.
class History {
 public:
  History() = default;
  explicit History(Timestep start) : start_(start) {}

  void append(std::int64_t v) { values_.push_back(v); }

  [[nodiscard]] bool empty() const noexcept { return values_.empty(); }
  [[nodiscard]] Timestep start() const noexcept { return start_; }
  /// One past the last observed step.
  [[nodiscard]] Timestep end() const noexcept { return start_ + static_cast<std::int64_t>(values_.size()); }
  [[nodiscard]] bool contains(Timestep t) const noexcept { return t >= start_ && t < end(); }
  [[nodiscard]] std::int64_t at(Timestep t) const noexcept {
    return values_[static_cast<std::size_t>(t - start_)];
  }
  [[nodiscard]] std::int64_t back() const noexcept { return values_.back(); }
  [[nodiscard]] std::span<const std::int64_t> values() const noexcept { return values_; }

 private:
  Timestep start_{0};
  std::vector<std::int64_t> values_;
};

}  // namespace lemsim
