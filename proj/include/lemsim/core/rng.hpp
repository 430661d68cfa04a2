#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <string_view>

namespace lemsim {

/// Seeded random stream with platform-independent draws.
///
/// The engine (mt19937_64) and std::seed_seq are fully specified by the
/// standard; the distribution helpers below are written out because the
/// standard library distributions are implementation-defined.
class Rng {
 public:
  /// A stream is identified by a seed plus a textual purpose tag and an
  /// optional index, so independent consumers never share draws.
  Rng(std::uint64_t seed, std::string_view stream, std::uint64_t index = 0);

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform integer in [lo, hi] (inclusive), rejection-sampled.
  std::int64_t uniform_int(std::int64_t lo, std::int64_t hi);

  /// Uniform double in [0, 1).
  double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  /// Standard normal via Box-Muller (one draw per call).
  double normal();

  template <class T>
  void shuffle(std::span<T> items) {
    for (std::size_t i = items.size(); i > 1; --i) {
      auto j = static_cast<std::size_t>(uniform_int(0, static_cast<std::int64_t>(i) - 1));
      std::swap(items[i - 1], items[j]);
    }
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace lemsim
