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

// Rounding of binary64 (or binary32) values onto a narrower floating-point
// format. Rounding works on the exact integer significand of the input, so
// no intermediate rounding happens before the target rounding.

#pragma once

#include <algorithm>
#include <atomic>
#include <bit>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <thread>
#include <type_traits>
#include <vector>

#include "chopkit/counter_rng.hpp"
#include "chopkit/formats.hpp"
#include "chopkit/rounding.hpp"

namespace chopkit {

struct ChopConfig {
  RoundingMode mode = RoundingMode::kNearestEven;
  bool subnormal = true;
  bool explim = true;
  bool flip = false;
  double p = 0.5;
  std::uint64_t seed = 0;
  std::size_t chunk_size = 1000;
  // 0 selects std::thread::hardware_concurrency().
  unsigned threads = 1;

  void validate() const {
    const int c = code(mode);
    if (c < 1 || c > 9) throw std::invalid_argument("rmode must be in 1..9");
    if (!(p >= 0.0 && p <= 1.0)) {
      throw std::invalid_argument("flip probability p must lie in [0,1]");
    }
    if (chunk_size < 1) throw std::invalid_argument("chunk_size must be >= 1");
  }
};

/// x = sign * m * 2^e with m in [1,2).
struct Decomposition {
  int sign = 1;
  int e = 0;
  double m = 1.0;
};

inline Decomposition decompose(double x) {
  int e = 0;
  const double frac = std::frexp(std::fabs(x), &e);
  return {std::signbit(x) ? -1 : 1, e - 1, frac * 2.0};
}

/// Random inputs consumed by one element: a rounding draw, a flip coin and a
/// word selecting the flipped bit. All come from one Philox block.
struct ElementDraws {
  double rounding = 0.0;
  double flip_coin = 1.0;
  std::uint32_t flip_word = 0;
};

inline ElementDraws element_draws(const Philox4x32& rng, std::uint64_t index,
                                  std::uint64_t stream) {
  const auto b = rng(index, stream);
  return {to_unit_double(b[0], b[1]), to_unit_double(b[2]), b[3]};
}

namespace detail {

/// |x| = mant * 2^lsb exactly, mant > 0.
struct ExactMagnitude {
  std::uint64_t mant = 0;
  int lsb = 0;

  int exponent() const { return lsb + std::bit_width(mant) - 1; }
};

inline ExactMagnitude exact_magnitude(double x) {
  const auto bits = std::bit_cast<std::uint64_t>(x);
  const auto biased = static_cast<int>((bits >> 52) & 0x7FF);
  const std::uint64_t frac = bits & ((std::uint64_t{1} << 52) - 1);
  if (biased == 0) return {frac, -1074};
  return {frac | (std::uint64_t{1} << 52), biased - 1075};
}

struct Rounded {
  double magnitude = 0.0;
  std::uint64_t q = 0;  // multiple of 2^quantum_exp
  bool inexact = false;
};

/// Rounds |x| to a multiple of 2^quantum_exp.
inline Rounded round_to_quantum(const ExactMagnitude& v, bool negative,
                                int quantum_exp, RoundingMode mode,
                                double draw) {
  const int shift = quantum_exp - v.lsb;
  if (shift <= 0) {
    return {std::ldexp(static_cast<double>(v.mant), v.lsb), 0, false};
  }
  std::uint64_t q = 0;
  Remainder rem = Remainder::kBelowHalf;
  double fraction = 0.0;
  if (shift >= 64) {
    // mant < 2^53 <= 2^(shift-1): strictly below half a quantum.
    fraction = std::ldexp(static_cast<double>(v.mant), -shift);
  } else {
    q = v.mant >> shift;
    const std::uint64_t dropped = v.mant & ((std::uint64_t{1} << shift) - 1);
    const std::uint64_t half = std::uint64_t{1} << (shift - 1);
    rem = dropped == 0     ? Remainder::kExact
          : dropped < half ? Remainder::kBelowHalf
          : dropped == half ? Remainder::kHalf
                           : Remainder::kAboveHalf;
    fraction = std::ldexp(static_cast<double>(dropped), -shift);
  }
  if (mode == RoundingMode::kToOdd) {
    if (rem != Remainder::kExact) q |= 1u;
  } else if (increment_magnitude(negative, (q & 1u) != 0, rem, fraction, mode,
                                 draw)) {
    ++q;
  }
  return {std::ldexp(static_cast<double>(q), quantum_exp), q,
          rem != Remainder::kExact};
}

inline double quiet_nan() { return std::numeric_limits<double>::quiet_NaN(); }
inline double inf() { return std::numeric_limits<double>::infinity(); }

/// Lowest fraction bit that a binary64 result can still hold.
inline int lowest_flippable_bit(const FloatFormat& fmt) {
  return std::max(0, fmt.t - 53);
}

}  // namespace detail

/// Toggles fraction bit `bit` (0 = least significant stored bit,
/// sig_bits-1 = most significant) of a finite nonzero value that is already
/// representable in `fmt`. The exponent is left unchanged. With `explim`
/// false the exponent is unbounded, matching chop without exponent limits.
inline double flip_bit(double x, const FloatFormat& fmt, int bit,
                       bool explim = true) {
  if (!std::isfinite(x) || x == 0.0) {
    throw std::invalid_argument("flip_bit: value must be finite and nonzero");
  }
  if (bit < detail::lowest_flippable_bit(fmt) || bit >= fmt.sig_bits) {
    throw std::out_of_range("flip_bit: bit index " + std::to_string(bit) +
                            " outside the stored fraction");
  }
  const auto v = detail::exact_magnitude(x);
  const int top = explim ? std::max(v.exponent(), fmt.emin) : v.exponent();
  const int quantum_exp = top - (fmt.t - 1);
  const int shift = quantum_exp - v.lsb;
  std::uint64_t q = 0;
  if (shift >= 0) {
    const bool fits = shift < 64 &&
                      (v.mant & ((std::uint64_t{1} << shift) - 1)) == 0;
    if (!fits) {
      throw std::invalid_argument("flip_bit: value not representable in format");
    }
    q = v.mant >> shift;
  } else {
    q = v.mant << -shift;  // only for formats wider than binary64 subnormals
  }
  q ^= std::uint64_t{1} << bit;
  return std::copysign(std::ldexp(static_cast<double>(q), quantum_exp), x);
}

/// Draws the flipped bit uniformly among the stored fraction bits.
inline double flip_bit(double x, const FloatFormat& fmt, std::uint32_t word,
                       bool explim = true) {
  const int lo = detail::lowest_flippable_bit(fmt);
  const auto span = static_cast<std::uint32_t>(fmt.sig_bits - lo);
  return flip_bit(x, fmt, lo + static_cast<int>(to_index(word, span)), explim);
}

/// Rounds one value. `draws` is only read by the stochastic modes and by
/// bit-flip injection.
inline double chop_value(double x, const FloatFormat& fmt,
                         const ChopConfig& cfg, const ElementDraws& draws) {
  if (std::isnan(x)) return detail::quiet_nan();
  if (std::isinf(x) || x == 0.0) return x;

  const bool negative = std::signbit(x);
  const auto v = detail::exact_magnitude(x);
  const int e = v.exponent();
  const RoundingMode mode = cfg.mode;

  double mag = 0.0;
  if (cfg.explim && e > fmt.emax) {
    const double x_max = format_params(fmt).x_max;
    switch (mode) {
      case RoundingMode::kUp: mag = negative ? x_max : detail::inf(); break;
      case RoundingMode::kDown: mag = negative ? detail::inf() : x_max; break;
      case RoundingMode::kTowardZero:
      case RoundingMode::kToOdd: mag = x_max; break;
      default: mag = detail::inf(); break;
    }
  } else {
    int quantum_exp = 0;
    if (!cfg.explim) {
      quantum_exp = e - (fmt.t - 1);
    } else if (e < fmt.emin && !cfg.subnormal) {
      // Candidates are 0 and x_min only.
      quantum_exp = fmt.emin;
    } else {
      quantum_exp = std::max(e, fmt.emin) - (fmt.t - 1);
    }
    mag = detail::round_to_quantum(v, negative, quantum_exp, mode,
                                   draws.rounding)
              .magnitude;
    // Rounded past x_max onto 2^(emax+1): the next value up is infinity.
    if (cfg.explim && fmt.emax < 1023 && mag >= std::ldexp(1.0, fmt.emax + 1)) {
      mag = detail::inf();
    }
  }

  if (cfg.flip && mag != 0.0 && std::isfinite(mag) &&
      draws.flip_coin < cfg.p) {
    mag = flip_bit(mag, fmt, draws.flip_word, cfg.explim);
  }
  return negative ? -mag : mag;
}

/// Rounds one value using the keyed generator at position `index`.
inline double chop_value(double x, const FloatFormat& fmt,
                         const ChopConfig& cfg, std::uint64_t index = 0,
                         std::uint64_t stream = 0) {
  const bool needs_draws = is_stochastic(cfg.mode) || cfg.flip;
  const ElementDraws d = needs_draws
                             ? element_draws(Philox4x32(cfg.seed), index, stream)
                             : ElementDraws{};
  return chop_value(x, fmt, cfg, d);
}

namespace detail {

inline unsigned resolve_threads(unsigned requested) {
  if (requested != 0) return requested;
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : hw;
}

template <typename T>
void chop_range(std::span<const T> in, std::span<T> out, std::size_t begin,
                std::size_t end, const FloatFormat& fmt, const ChopConfig& cfg,
                std::uint64_t stream) {
  const bool needs_draws = is_stochastic(cfg.mode) || cfg.flip;
  const Philox4x32 rng(cfg.seed);
  for (std::size_t i = begin; i < end; ++i) {
    const ElementDraws d =
        needs_draws ? element_draws(rng, i, stream) : ElementDraws{};
    out[i] = static_cast<T>(chop_value(static_cast<double>(in[i]), fmt, cfg, d));
  }
}

}  // namespace detail

/// Elementwise chop of `in` into `out` (which may alias `in`). Work is split
/// into `cfg.chunk_size` blocks over `cfg.threads` workers; element i always
/// uses draw counter (i, stream), so the result does not depend on either.
template <typename T>
  requires std::is_floating_point_v<T>
void chop_array(std::span<const T> in, std::span<T> out, const FloatFormat& fmt,
                const ChopConfig& cfg, std::uint64_t stream = 0) {
  cfg.validate();
  if (in.size() != out.size()) {
    throw std::invalid_argument("chop_array: input/output size mismatch");
  }
  const std::size_t n = in.size();
  const std::size_t chunks = (n + cfg.chunk_size - 1) / cfg.chunk_size;
  const auto workers = static_cast<std::size_t>(
      std::min<std::size_t>(detail::resolve_threads(cfg.threads), chunks));
  if (workers <= 1) {
    detail::chop_range(in, out, 0, n, fmt, cfg, stream);
    return;
  }
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t c = next.fetch_add(1); c < chunks; c = next.fetch_add(1)) {
      const std::size_t begin = c * cfg.chunk_size;
      const std::size_t end = std::min(n, begin + cfg.chunk_size);
      detail::chop_range(in, out, begin, end, fmt, cfg, stream);
    }
  };
  std::vector<std::jthread> pool;
  pool.reserve(workers - 1);
  for (std::size_t w = 1; w < workers; ++w) pool.emplace_back(work);
  work();
}

template <typename T>
  requires std::is_floating_point_v<T>
std::vector<T> chop_array(std::span<const T> in, const FloatFormat& fmt,
                          const ChopConfig& cfg, std::uint64_t stream = 0) {
  std::vector<T> out(in.size());
  chop_array(in, std::span<T>(out), fmt, cfg, stream);
  return out;
}

template <typename T>
  requires std::is_floating_point_v<T>
std::vector<T> chop_array(const std::vector<T>& in, const FloatFormat& fmt,
                          const ChopConfig& cfg, std::uint64_t stream = 0) {
  return chop_array(std::span<const T>(in), fmt, cfg, stream);
}

/// A format and policy bound together, callable on scalars and arrays.
class Chop {
 public:
  explicit Chop(FloatFormat fmt, ChopConfig cfg = {})
      : fmt_(fmt), cfg_(cfg), params_(format_params(fmt)) {
    cfg_.validate();
  }
  Chop(int exp_bits, int sig_bits, ChopConfig cfg = {})
      : Chop(make_format(exp_bits, sig_bits), cfg) {}

  const FloatFormat& format() const { return fmt_; }
  const ChopConfig& config() const { return cfg_; }
  const FormatParams& params() const { return params_; }

  double operator()(double x, std::uint64_t index = 0,
                    std::uint64_t stream = 0) const {
    return chop_value(x, fmt_, cfg_, index, stream);
  }

  template <typename T>
    requires std::is_floating_point_v<T>
  std::vector<T> operator()(std::span<const T> xs,
                            std::uint64_t stream = 0) const {
    return chop_array(xs, fmt_, cfg_, stream);
  }

  template <typename T>
    requires std::is_floating_point_v<T>
  std::vector<T> operator()(const std::vector<T>& xs,
                            std::uint64_t stream = 0) const {
    return chop_array(std::span<const T>(xs), fmt_, cfg_, stream);
  }

  template <typename T>
    requires std::is_floating_point_v<T>
  void apply(std::span<T> xs, std::uint64_t stream = 0) const {
    chop_array(std::span<const T>(xs), xs, fmt_, cfg_, stream);
  }

 private:
  FloatFormat fmt_;
  ChopConfig cfg_;
  FormatParams params_;
};

}  // namespace chopkit
