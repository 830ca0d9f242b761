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

// Qm.f fixed-point quantization: x -> I = round(x * 2^f), x' = I * 2^-f.

#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "chopkit/counter_rng.hpp"
#include "chopkit/formats.hpp"
#include "chopkit/rounding.hpp"

namespace chopkit {

struct FixedFormat {
  int ibits = 4;  // includes the sign bit when `is_signed`
  int fbits = 4;
  bool is_signed = true;
  bool saturate = true;

  int total_bits() const { return ibits + fbits; }

  void validate() const {
    if (ibits < 0 || fbits < 0) {
      throw std::invalid_argument("fixed format: bit counts must be >= 0");
    }
    if (total_bits() < 1 || total_bits() > 63) {
      throw std::invalid_argument("fixed format: ibits + fbits must be 1..63");
    }
  }

  std::int64_t min_stored() const {
    return is_signed ? -(std::int64_t{1} << (total_bits() - 1)) : 0;
  }
  std::int64_t max_stored() const {
    return is_signed ? (std::int64_t{1} << (total_bits() - 1)) - 1
                     : (std::int64_t{1} << total_bits()) - 1;
  }
  double quantum() const { return std::ldexp(1.0, -fbits); }
  double min_value() const { return std::ldexp(double(min_stored()), -fbits); }
  double max_value() const { return std::ldexp(double(max_stored()), -fbits); }
};

/// Parses "qM.F" (case-insensitive), e.g. "q8.8".
inline FixedFormat parse_fixed_format(std::string_view spec) {
  const std::string s = detail::to_lower(spec);
  const auto dot = s.find('.');
  if (s.size() >= 4 && s[0] == 'q' && dot != std::string::npos && dot > 1) {
    FixedFormat f;
    const char* b = s.data();
    auto r1 = std::from_chars(b + 1, b + dot, f.ibits);
    auto r2 = std::from_chars(b + dot + 1, b + s.size(), f.fbits);
    if (r1.ec == std::errc{} && r1.ptr == b + dot && r2.ec == std::errc{} &&
        r2.ptr == b + s.size()) {
      f.validate();
      return f;
    }
  }
  throw std::invalid_argument("cannot parse fixed-point format '" +
                              std::string(spec) + "'; expected qM.F");
}

namespace detail {

inline std::int64_t wrap_twos_complement(std::int64_t v, const FixedFormat& f) {
  const int n = f.total_bits();
  const std::uint64_t mask = (std::uint64_t{1} << n) - 1;
  std::uint64_t u = static_cast<std::uint64_t>(v) & mask;
  if (f.is_signed && (u >> (n - 1)) != 0) u |= ~mask;
  return static_cast<std::int64_t>(u);
}

}  // namespace detail

inline std::int64_t fx_quantize(double x, const FixedFormat& fmt,
                                RoundingMode mode,
                                std::optional<double> draw = std::nullopt) {
  fmt.validate();
  if (!std::isfinite(x)) {
    throw std::domain_error("fixed-point cannot encode non-finite value");
  }
  const double scaled = std::ldexp(x, fmt.fbits);
  if (std::fabs(scaled) >= 0x1p62) {
    if (!fmt.saturate) {
      throw std::domain_error("fixed-point: value too large to wrap");
    }
    return scaled < 0 ? fmt.min_stored() : fmt.max_stored();
  }
  const std::int64_t i = round_integer(scaled, mode, draw);
  if (fmt.saturate) {
    return std::clamp(i, fmt.min_stored(), fmt.max_stored());
  }
  return detail::wrap_twos_complement(i, fmt);
}

inline double fx_dequantize(std::int64_t stored, const FixedFormat& fmt) {
  return std::ldexp(static_cast<double>(stored), -fmt.fbits);
}

inline double fx_chop(double x, const FixedFormat& fmt, RoundingMode mode,
                      std::optional<double> draw = std::nullopt) {
  return fx_dequantize(fx_quantize(x, fmt, mode, draw), fmt);
}

/// Array form. Stochastic modes draw from counter (i, stream) under `seed`.
inline std::vector<double> fx_chop(std::span<const double> xs,
                                   const FixedFormat& fmt, RoundingMode mode,
                                   std::uint64_t seed = 0,
                                   std::uint64_t stream = 0) {
  std::vector<double> out(xs.size());
  const Philox4x32 rng(seed);
  for (std::size_t i = 0; i < xs.size(); ++i) {
    std::optional<double> draw;
    if (is_stochastic(mode)) {
      const auto b = rng(i, stream);
      draw = to_unit_double(b[0], b[1]);
    }
    out[i] = fx_chop(xs[i], fmt, mode, draw);
  }
  return out;
}

}  // namespace chopkit
