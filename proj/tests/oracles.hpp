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

// Reference implementations used by the tests. Nothing here calls the
// rounding engine: values are enumerated from bit patterns and the rounding
// rules are applied by searching the sorted value table.

#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <stdexcept>
#include <vector>

#include "chopkit/formats.hpp"
#include "chopkit/rounding.hpp"

namespace chopkit::oracle {

inline bool same_bits(double a, double b) {
  if (std::isnan(a) && std::isnan(b)) return true;
  return std::bit_cast<std::uint64_t>(a) == std::bit_cast<std::uint64_t>(b);
}

/// One non-negative representable value. `odd` is the parity of the last
/// significand bit; `infinite` marks the 2^(emax+1) sentinel that stands in
/// for +Inf when locating neighbours.
struct Entry {
  double value;
  bool odd;
  bool infinite;
};

/// All non-negative finite values of a binary format, sorted, plus the
/// infinity sentinel. Built by decoding every bit pattern from scratch.
class ValueTable {
 public:
  ValueTable(int exp_bits, int sig_bits, bool subnormal = true)
      : exp_bits_(exp_bits), sig_bits_(sig_bits), subnormal_(subnormal) {
    const int bias = (1 << (exp_bits - 1)) - 1;
    emin_ = 1 - bias;
    emax_ = bias;
    const std::uint64_t fracs = std::uint64_t{1} << sig_bits;
    const std::uint64_t top = (std::uint64_t{1} << exp_bits) - 1;
    if (fracs * top > (std::uint64_t{1} << 26)) {
      throw std::invalid_argument("ValueTable: format too wide to enumerate");
    }
    for (std::uint64_t field = 0; field < top; ++field) {
      for (std::uint64_t f = 0; f < fracs; ++f) {
        double v = 0.0;
        if (field == 0) {
          if (!subnormal && f != 0) continue;
          v = std::ldexp(double(f), emin_ - sig_bits);
        } else {
          v = std::ldexp(double(fracs + f), int(field) - bias - sig_bits);
        }
        entries_.push_back({v, (f & 1) != 0, false});
      }
    }
    entries_.push_back({std::ldexp(1.0, emax_ + 1), false, true});
  }

  int emin() const { return emin_; }
  int emax() const { return emax_; }
  bool subnormal() const { return subnormal_; }
  const std::vector<Entry>& entries() const { return entries_; }
  double x_max() const { return entries_[entries_.size() - 2].value; }
  double x_min() const { return std::ldexp(1.0, emin_); }

  /// Finite non-negative values only.
  std::vector<double> finite_values() const {
    std::vector<double> out;
    for (const auto& e : entries_) {
      if (!e.infinite) out.push_back(e.value);
    }
    return out;
  }

  struct Bracket {
    Entry lo;
    Entry hi;
    bool exact;
  };

  /// Neighbours of a magnitude a >= 0. Above the sentinel, lo is x_max and
  /// hi the sentinel.
  Bracket bracket(double a) const {
    const auto& es = entries_;
    if (a >= es.back().value) {
      return {es[es.size() - 2], es.back(), false};
    }
    auto it = std::upper_bound(es.begin(), es.end(), a,
                               [](double v, const Entry& e) { return v < e.value; });
    const Entry lo = *(it - 1);
    if (lo.value == a) return {lo, lo, true};
    Entry hi = *it;
    Entry l = lo;
    // With gradual underflow off the gap below x_min is one quantum x_min
    // wide, so on that grid 0 is even and x_min is odd.
    if (!subnormal_ && l.value == 0.0) {
      l.odd = false;
      hi.odd = true;
    }
    return {l, hi, false};
  }

  /// Applies a deterministic rounding rule from first principles.
  double round(double x, RoundingMode mode) const {
    if (std::isnan(x)) return std::numeric_limits<double>::quiet_NaN();
    if (std::isinf(x) || x == 0.0) return x;
    const bool neg = std::signbit(x);
    const double a = std::fabs(x);
    const Bracket b = bracket(a);
    Entry pick = b.lo;
    if (!b.exact) {
      const bool beyond = a >= entries_.back().value;
      const double mid = 0.5 * (b.lo.value + b.hi.value);
      const bool above = beyond || a > mid;
      const bool tie = !beyond && a == mid;
      switch (mode) {
        case RoundingMode::kNearestEven:
          pick = above ? b.hi : (tie ? (b.lo.odd ? b.hi : b.lo) : b.lo);
          break;
        case RoundingMode::kNearestTiesToZero:
          pick = above ? b.hi : b.lo;
          break;
        case RoundingMode::kNearestTiesAway:
          pick = (above || tie) ? b.hi : b.lo;
          break;
        case RoundingMode::kUp:
          pick = neg ? b.lo : b.hi;
          break;
        case RoundingMode::kDown:
          pick = neg ? b.hi : b.lo;
          break;
        case RoundingMode::kTowardZero:
          pick = b.lo;
          break;
        case RoundingMode::kToOdd:
          pick = b.lo.odd ? b.lo : b.hi;
          if (pick.infinite) pick = b.lo;
          break;
        default:
          throw std::invalid_argument("ValueTable::round: stochastic mode");
      }
    }
    const double mag =
        pick.infinite ? std::numeric_limits<double>::infinity() : pick.value;
    return neg ? -mag : mag;
  }

  /// Signed neighbours of x: {round down, round up}.
  std::pair<double, double> neighbours(double x) const {
    return {round(x, RoundingMode::kDown), round(x, RoundingMode::kUp)};
  }

 private:
  int exp_bits_;
  int sig_bits_;
  bool subnormal_;
  int emin_ = 0;
  int emax_ = 0;
  std::vector<Entry> entries_;
};

/// Nearest-neighbour search over every finite fp16 value, ties to the even
/// bit pattern, values at or beyond 65520 to infinity.
class Fp16Nearest {
 public:
  Fp16Nearest() {
    for (std::uint32_t p = 0; p < 0x7C00; ++p) {
      const std::uint32_t e = p >> 10;
      const std::uint32_t f = p & 0x3FF;
      const double v = e == 0 ? std::ldexp(double(f), -24)
                              : std::ldexp(double(1024 + f), int(e) - 25);
      values_.push_back(v);
    }
  }

  const std::vector<double>& values() const { return values_; }

  double operator()(double x) const {
    const double a = std::fabs(x);
    double r = 0.0;
    if (a >= 65520.0) {
      r = std::numeric_limits<double>::infinity();
    } else {
      auto it = std::lower_bound(values_.begin(), values_.end(), a);
      if (it == values_.end()) {
        r = values_.back();  // (65504, 65520) is nearer to 65504
      } else if (*it == a) {
        r = a;
      } else {
        const std::size_t hi = static_cast<std::size_t>(it - values_.begin());
        const std::size_t lo = hi - 1;
        const double dl = a - values_[lo];
        const double dh = values_[hi] - a;
        if (dl < dh) {
          r = values_[lo];
        } else if (dh < dl) {
          r = values_[hi];
        } else {
          r = (lo % 2 == 0) ? values_[lo] : values_[hi];
        }
      }
    }
    return std::copysign(r, x);
  }

 private:
  std::vector<double> values_;  // index == bit pattern
};

/// Random binary64 values spread over the dynamic range of a format:
/// random sign, exponent in [emin - t - 4, emax + 2], full random significand.
inline std::vector<double> spread_values(const FloatFormat& f, std::size_t n,
                                         std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::uniform_int_distribution<int> exp(f.emin - f.t - 4, f.emax + 2);
  std::vector<double> out(n);
  for (auto& x : out) {
    const std::uint64_t m = gen() >> 11;  // 53 bits
    const double sig = std::ldexp(double(m | (std::uint64_t{1} << 52)), -52);
    x = std::ldexp(sig, exp(gen));
    if (gen() & 1) x = -x;
  }
  return out;
}

/// Nearest point of the grid k * 2^-fbits, k in [lo, hi], ties to even k.
inline double fixed_nearest_even(double x, int fbits, std::int64_t lo,
                                 std::int64_t hi) {
  const auto k0 = static_cast<std::int64_t>(std::floor(std::ldexp(x, fbits)));
  std::int64_t best = std::clamp(k0, lo, hi);
  for (std::int64_t k = k0 - 1; k <= k0 + 2; ++k) {
    const std::int64_t kc = std::clamp(k, lo, hi);
    const double d = std::fabs(std::ldexp(double(kc), -fbits) - x);
    const double bd = std::fabs(std::ldexp(double(best), -fbits) - x);
    if (d < bd || (d == bd && kc % 2 == 0)) best = kc;
  }
  return std::ldexp(double(best), -fbits);
}

}  // namespace chopkit::oracle
