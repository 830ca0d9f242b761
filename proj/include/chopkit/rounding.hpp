// Copyright 2026 The chopkit Authors
// SPDX-License-Identifier: Apache-2.0
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace chopkit {

/// Rounding modes, numbered as in the `rmode` convention (1..9).
enum class RoundingMode : int {
  kNearestEven = 1,
  kUp = 2,
  kDown = 3,
  kTowardZero = 4,
  kStochasticProportional = 5,
  kStochasticUniform = 6,
  kNearestTiesToZero = 7,
  kNearestTiesAway = 8,
  kToOdd = 9,
};

inline constexpr RoundingMode kAllRoundingModes[] = {
    RoundingMode::kNearestEven,
    RoundingMode::kUp,
    RoundingMode::kDown,
    RoundingMode::kTowardZero,
    RoundingMode::kStochasticProportional,
    RoundingMode::kStochasticUniform,
    RoundingMode::kNearestTiesToZero,
    RoundingMode::kNearestTiesAway,
    RoundingMode::kToOdd,
};

inline constexpr RoundingMode kDeterministicRoundingModes[] = {
    RoundingMode::kNearestEven,       RoundingMode::kUp,
    RoundingMode::kDown,              RoundingMode::kTowardZero,
    RoundingMode::kNearestTiesToZero, RoundingMode::kNearestTiesAway,
    RoundingMode::kToOdd,
};

inline RoundingMode rounding_mode_from_code(int code) {
  if (code < 1 || code > 9) {
    throw std::invalid_argument("rmode must be in 1..9, got " +
                                std::to_string(code));
  }
  return static_cast<RoundingMode>(code);
}

constexpr int code(RoundingMode m) { return static_cast<int>(m); }

constexpr bool is_stochastic(RoundingMode m) {
  return m == RoundingMode::kStochasticProportional ||
         m == RoundingMode::kStochasticUniform;
}

constexpr std::string_view name(RoundingMode m) {
  switch (m) {
    case RoundingMode::kNearestEven: return "nearest-even";
    case RoundingMode::kUp: return "up";
    case RoundingMode::kDown: return "down";
    case RoundingMode::kTowardZero: return "toward-zero";
    case RoundingMode::kStochasticProportional: return "stochastic-proportional";
    case RoundingMode::kStochasticUniform: return "stochastic-uniform";
    case RoundingMode::kNearestTiesToZero: return "nearest-ties-to-zero";
    case RoundingMode::kNearestTiesAway: return "nearest-ties-away";
    case RoundingMode::kToOdd: return "to-odd";
  }
  return "?";
}

/// Where the discarded part of a magnitude lies relative to half a quantum.
enum class Remainder { kExact, kBelowHalf, kHalf, kAboveHalf };

namespace detail {

/// Decides whether a truncated magnitude should be bumped by one quantum.
/// `truncated_odd` is the parity of the truncated magnitude, `fraction` the
/// discarded part in [0,1) (only read by stochastic-proportional), `draw`
/// a uniform [0,1) sample (only read by the stochastic modes).
inline bool increment_magnitude(bool negative, bool truncated_odd,
                                Remainder rem, double fraction,
                                RoundingMode mode, double draw) {
  if (rem == Remainder::kExact) return false;
  switch (mode) {
    case RoundingMode::kNearestEven:
      return rem == Remainder::kAboveHalf ||
             (rem == Remainder::kHalf && truncated_odd);
    case RoundingMode::kUp:
      return !negative;
    case RoundingMode::kDown:
      return negative;
    case RoundingMode::kTowardZero:
      return false;
    case RoundingMode::kStochasticProportional:
      return draw < fraction;
    case RoundingMode::kStochasticUniform:
      return draw < 0.5;
    case RoundingMode::kNearestTiesToZero:
      return rem == Remainder::kAboveHalf;
    case RoundingMode::kNearestTiesAway:
      return rem != Remainder::kBelowHalf;
    case RoundingMode::kToOdd:
      // Handled by the caller: truncate, then force the low bit.
      return false;
  }
  return false;
}

inline Remainder classify_fraction(double fraction) {
  if (fraction == 0.0) return Remainder::kExact;
  if (fraction < 0.5) return Remainder::kBelowHalf;
  if (fraction == 0.5) return Remainder::kHalf;
  return Remainder::kAboveHalf;
}

}  // namespace detail

/// Rounds a real to an integer under `mode`. `draw` must be supplied for the
/// stochastic modes. Round-to-odd truncates and sets the low bit of any
/// inexact result, so it always lands on one of the two neighbours.
inline std::int64_t round_integer(double z, RoundingMode mode,
                                  std::optional<double> draw = std::nullopt) {
  if (!std::isfinite(z) || std::fabs(z) >= 0x1p63) {
    throw std::out_of_range("round_integer: value outside int64 range");
  }
  if (is_stochastic(mode) && !draw) {
    throw std::invalid_argument("round_integer: stochastic mode needs a draw");
  }
  const bool negative = std::signbit(z);
  const double mag = std::fabs(z);
  const double whole = std::floor(mag);
  const double fraction = mag - whole;  // exact for |z| < 2^63
  auto q = static_cast<std::uint64_t>(whole);
  const Remainder rem = detail::classify_fraction(fraction);
  if (mode == RoundingMode::kToOdd) {
    if (rem != Remainder::kExact) q |= 1u;
  } else if (detail::increment_magnitude(negative, (q & 1u) != 0, rem,
                                         fraction, mode, draw.value_or(0.0))) {
    ++q;
  }
  const auto s = static_cast<std::int64_t>(q);
  return negative ? -s : s;
}

}  // namespace chopkit
