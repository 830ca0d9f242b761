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

// Binary floating-point format descriptors and their derived parameters.

#pragma once

#include <algorithm>
#include <array>
#include <cctype>
#include <charconv>
#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace chopkit {

/// A sign/exponent/significand binary format. `sig_bits` excludes the
/// implicit leading bit; `t` includes it.
struct FloatFormat {
  int exp_bits = 0;
  int sig_bits = 0;
  int emax = 0;
  int emin = 0;
  int bias = 0;
  int t = 0;

  friend bool operator==(const FloatFormat&, const FloatFormat&) = default;
};

struct FormatParams {
  double u = 0;          // unit roundoff, 2^-t
  double x_min = 0;      // smallest positive normal
  double x_max = 0;      // largest finite
  double x_sub_min = 0;  // smallest positive subnormal
};

/// Mirrors the `Customs(emax, t, exp_bits, sig_bits)` record: any subset may
/// be given; `t` stands in for `sig_bits` and `emax` overrides the bias.
struct Customs {
  std::optional<int> emax;
  std::optional<int> t;
  std::optional<int> exp_bits;
  std::optional<int> sig_bits;
};

inline FloatFormat make_format(int exp_bits, int sig_bits) {
  if (exp_bits < 2) {
    throw std::invalid_argument("exp_bits must be >= 2, got " +
                                std::to_string(exp_bits));
  }
  if (sig_bits < 1) {
    throw std::invalid_argument("sig_bits must be >= 1, got " +
                                std::to_string(sig_bits));
  }
  if (exp_bits + sig_bits + 1 > 64) {
    throw std::invalid_argument(
        "format wider than 64 bits: exp_bits + sig_bits + 1 = " +
        std::to_string(exp_bits + sig_bits + 1));
  }
  FloatFormat f;
  f.exp_bits = exp_bits;
  f.sig_bits = sig_bits;
  f.bias = (1 << (exp_bits - 1)) - 1;
  f.emax = f.bias;
  f.emin = 1 - f.bias;
  f.t = sig_bits + 1;
  return f;
}

/// Builds a format from a `Customs` record. When only `emax` and `t` are
/// known the exponent width is the smallest that holds emax.
inline FloatFormat make_format(const Customs& c) {
  std::optional<int> sig = c.sig_bits;
  if (c.t) {
    if (sig && *sig != *c.t - 1) {
      throw std::invalid_argument("Customs: t and sig_bits disagree");
    }
    sig = *c.t - 1;
  }
  if (!sig) throw std::invalid_argument("Customs: need t or sig_bits");

  int exp_bits = 0;
  if (c.exp_bits) {
    exp_bits = *c.exp_bits;
  } else if (c.emax) {
    if (*c.emax < 1) throw std::invalid_argument("Customs: emax must be >= 1");
    exp_bits = 2;
    while (((1 << (exp_bits - 1)) - 1) < *c.emax) ++exp_bits;
  } else {
    throw std::invalid_argument("Customs: need exp_bits or emax");
  }

  FloatFormat f = make_format(exp_bits, *sig);
  if (c.emax) {
    if (*c.emax < 1) throw std::invalid_argument("Customs: emax must be >= 1");
    f.emax = *c.emax;
    f.bias = *c.emax;
    f.emin = 1 - *c.emax;
  }
  return f;
}

inline FormatParams format_params(const FloatFormat& f) {
  FormatParams p;
  p.u = std::ldexp(1.0, -f.t);
  p.x_min = std::ldexp(1.0, f.emin);
  p.x_max = std::ldexp(2.0 - std::ldexp(1.0, 1 - f.t), f.emax);
  p.x_sub_min = std::ldexp(1.0, f.emin + 1 - f.t);
  return p;
}

struct NamedFormat {
  std::string_view name;
  int exp_bits;
  int sig_bits;
};

inline constexpr std::array<NamedFormat, 10> kBuiltinFormats{{
    {"e4m3", 4, 3},
    {"e5m2", 5, 2},
    {"bf16", 8, 7},
    {"fp16", 5, 10},
    {"half", 5, 10},
    {"tf32", 8, 10},
    {"fp32", 8, 23},
    {"single", 8, 23},
    {"fp64", 11, 52},
    {"double", 11, 52},
}};

namespace detail {

inline std::string to_lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  return out;
}

inline std::string builtin_names() {
  std::string names;
  for (const auto& nf : kBuiltinFormats) {
    if (!names.empty()) names += ", ";
    names += nf.name;
  }
  return names;
}

}  // namespace detail

inline FloatFormat builtin_format(std::string_view name) {
  const std::string key = detail::to_lower(name);
  for (const auto& nf : kBuiltinFormats) {
    if (nf.name == key) return make_format(nf.exp_bits, nf.sig_bits);
  }
  throw std::invalid_argument("unknown format '" + std::string(name) +
                              "'; valid names: " + detail::builtin_names());
}

/// Parses a built-in name or an "eXmY" string, case-insensitively.
inline FloatFormat parse_float_format(std::string_view spec) {
  const std::string s = detail::to_lower(spec);
  for (const auto& nf : kBuiltinFormats) {
    if (nf.name == s) return make_format(nf.exp_bits, nf.sig_bits);
  }
  if (s.size() >= 4 && s[0] == 'e') {
    const auto m = s.find('m');
    if (m != std::string::npos && m > 1 && m + 1 < s.size()) {
      int e = 0;
      int sig = 0;
      const char* b = s.data();
      auto r1 = std::from_chars(b + 1, b + m, e);
      auto r2 = std::from_chars(b + m + 1, b + s.size(), sig);
      if (r1.ec == std::errc{} && r1.ptr == b + m && r2.ec == std::errc{} &&
          r2.ptr == b + s.size()) {
        return make_format(e, sig);
      }
    }
  }
  throw std::invalid_argument("cannot parse float format '" +
                              std::string(spec) +
                              "'; expected eXmY or one of: " +
                              detail::builtin_names());
}

}  // namespace chopkit
