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

// Uniform integer quantization, symmetric or asymmetric, per tensor or per
// channel. Tensors are row-major buffers with an explicit shape.

#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <numeric>
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

struct IntQuantConfig {
  int bits = 8;
  bool symmetric = false;
  bool per_channel = false;
  std::size_t axis = 0;

  void validate() const {
    if (bits < 2 || bits > 32) {
      throw std::invalid_argument("integer quantization: bits must be 2..32");
    }
  }
};

struct IntQuantParams {
  int bits = 8;
  bool symmetric = false;
  bool per_channel = false;
  std::size_t axis = 0;
  std::vector<double> scale;             // one entry, or one per channel
  std::vector<std::int64_t> zero_point;  // same length as `scale`
  std::int64_t qmin = -128;
  std::int64_t qmax = 127;
};

/// Parses "intN[:sym|:asym][:axis=K]". A given axis turns on per-channel.
inline IntQuantConfig parse_int_config(std::string_view spec) {
  const std::string s = detail::to_lower(spec);
  auto fail = [&]() -> IntQuantConfig {
    throw std::invalid_argument("cannot parse integer format '" +
                                std::string(spec) +
                                "'; expected intN[:sym|:asym][:axis=K]");
  };
  if (s.rfind("int", 0) != 0) return fail();
  IntQuantConfig cfg;
  std::size_t pos = s.find(':');
  const std::string_view head = std::string_view(s).substr(3, pos - 3);
  auto r = std::from_chars(head.data(), head.data() + head.size(), cfg.bits);
  if (r.ec != std::errc{} || r.ptr != head.data() + head.size()) return fail();
  while (pos != std::string::npos) {
    const std::size_t next = s.find(':', pos + 1);
    const std::string_view tok =
        std::string_view(s).substr(pos + 1, next == std::string::npos
                                                ? std::string::npos
                                                : next - pos - 1);
    if (tok == "sym") {
      cfg.symmetric = true;
    } else if (tok == "asym") {
      cfg.symmetric = false;
    } else if (tok.rfind("axis=", 0) == 0) {
      const std::string_view v = tok.substr(5);
      auto ra = std::from_chars(v.data(), v.data() + v.size(), cfg.axis);
      if (ra.ec != std::errc{} || ra.ptr != v.data() + v.size()) return fail();
      cfg.per_channel = true;
    } else {
      return fail();
    }
    pos = next;
  }
  cfg.validate();
  return cfg;
}

namespace detail {

struct ChannelLayout {
  std::size_t inner = 1;
  std::size_t channels = 1;

  std::size_t channel(std::size_t flat) const {
    return (flat / inner) % channels;
  }
};

inline ChannelLayout channel_layout(std::span<const std::size_t> shape,
                                    std::size_t count, bool per_channel,
                                    std::size_t axis) {
  const std::size_t product = std::accumulate(
      shape.begin(), shape.end(), std::size_t{1}, std::multiplies<>());
  if (!shape.empty() && product != count) {
    throw std::invalid_argument("tensor shape does not match element count");
  }
  if (!per_channel) return {};
  if (axis >= shape.size() && !(shape.empty() && axis == 0)) {
    throw std::invalid_argument("per-channel axis " + std::to_string(axis) +
                                " out of range for rank " +
                                std::to_string(shape.size()));
  }
  if (shape.empty()) return {1, count};
  ChannelLayout l;
  l.channels = shape[axis];
  for (std::size_t d = axis + 1; d < shape.size(); ++d) l.inner *= shape[d];
  return l;
}

inline std::int64_t int_qmin(int bits) {
  return -(std::int64_t{1} << (bits - 1));
}
inline std::int64_t int_qmax(int bits) {
  return (std::int64_t{1} << (bits - 1)) - 1;
}

}  // namespace detail

/// Computes scale(s) and zero point(s). `shape` may be empty for a 1-D
/// tensor. Asymmetric ranges are widened to contain 0.
inline IntQuantParams iq_calibrate(std::span<const double> xs,
                                   std::span<const std::size_t> shape,
                                   const IntQuantConfig& cfg) {
  cfg.validate();
  if (xs.empty()) throw std::invalid_argument("iq_calibrate: empty tensor");
  for (double x : xs) {
    if (!std::isfinite(x)) {
      throw std::domain_error("iq_calibrate: non-finite input");
    }
  }
  const auto layout =
      detail::channel_layout(shape, xs.size(), cfg.per_channel, cfg.axis);

  IntQuantParams p;
  p.bits = cfg.bits;
  p.symmetric = cfg.symmetric;
  p.per_channel = cfg.per_channel;
  p.axis = cfg.axis;
  p.qmin = detail::int_qmin(cfg.bits);
  p.qmax = detail::int_qmax(cfg.bits);

  std::vector<double> lo(layout.channels, 0.0);
  std::vector<double> hi(layout.channels, 0.0);
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const std::size_t c = layout.channel(i);
    lo[c] = std::min(lo[c], xs[i]);
    hi[c] = std::max(hi[c], xs[i]);
  }

  p.scale.resize(layout.channels);
  p.zero_point.resize(layout.channels, 0);
  for (std::size_t c = 0; c < layout.channels; ++c) {
    if (cfg.symmetric) {
      const double omega = std::max(-lo[c], hi[c]);
      p.scale[c] = omega > 0 ? omega / double(p.qmax) : 1.0;
      continue;
    }
    if (hi[c] == lo[c]) {
      p.scale[c] = 1.0;
      continue;
    }
    const double levels = std::ldexp(1.0, cfg.bits) - 1.0;
    p.scale[c] = (hi[c] - lo[c]) / levels;
    const std::int64_t z =
        round_integer(-lo[c] / p.scale[c], RoundingMode::kNearestEven);
    p.zero_point[c] = std::clamp(z + p.qmin, p.qmin, p.qmax);
  }
  return p;
}

inline IntQuantParams iq_calibrate(std::span<const double> xs,
                                   const IntQuantConfig& cfg) {
  return iq_calibrate(xs, std::span<const std::size_t>{}, cfg);
}

/// q = clamp(R(x / scale) + z, qmin, qmax).
inline std::vector<std::int64_t> iq_quantize(
    std::span<const double> xs, std::span<const std::size_t> shape,
    const IntQuantParams& p, RoundingMode mode = RoundingMode::kNearestEven,
    std::uint64_t seed = 0) {
  const auto layout =
      detail::channel_layout(shape, xs.size(), p.per_channel, p.axis);
  if (p.scale.size() != layout.channels ||
      p.zero_point.size() != layout.channels) {
    throw std::invalid_argument("iq_quantize: parameter count mismatch");
  }
  const Philox4x32 rng(seed);
  std::vector<std::int64_t> q(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (std::isnan(xs[i])) throw std::domain_error("iq_quantize: NaN input");
    const std::size_t c = layout.channel(i);
    if (!(p.scale[c] > 0)) {
      throw std::invalid_argument("iq_quantize: scale must be positive");
    }
    const double scaled = std::clamp(xs[i] / p.scale[c], -0x1p62, 0x1p62);
    std::optional<double> draw;
    if (is_stochastic(mode)) {
      const auto b = rng(i, 0);
      draw = to_unit_double(b[0], b[1]);
    }
    const std::int64_t r = round_integer(scaled, mode, draw);
    q[i] = std::clamp(r + p.zero_point[c], p.qmin, p.qmax);
  }
  return q;
}

inline std::vector<std::int64_t> iq_quantize(
    std::span<const double> xs, const IntQuantParams& p,
    RoundingMode mode = RoundingMode::kNearestEven, std::uint64_t seed = 0) {
  return iq_quantize(xs, std::span<const std::size_t>{}, p, mode, seed);
}

/// r = (q - z) * scale.
inline std::vector<double> iq_dequantize(std::span<const std::int64_t> q,
                                         std::span<const std::size_t> shape,
                                         const IntQuantParams& p) {
  const auto layout =
      detail::channel_layout(shape, q.size(), p.per_channel, p.axis);
  std::vector<double> r(q.size());
  for (std::size_t i = 0; i < q.size(); ++i) {
    const std::size_t c = layout.channel(i);
    r[i] = static_cast<double>(q[i] - p.zero_point[c]) * p.scale[c];
  }
  return r;
}

inline std::vector<double> iq_dequantize(std::span<const std::int64_t> q,
                                         const IntQuantParams& p) {
  return iq_dequantize(q, std::span<const std::size_t>{}, p);
}

}  // namespace chopkit
