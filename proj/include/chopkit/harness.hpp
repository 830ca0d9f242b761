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

// Numerical demonstrations and self-checks built on the rounding engine.

#pragma once

#include <bit>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "chopkit/counter_rng.hpp"
#include "chopkit/formats.hpp"
#include "chopkit/fpchop.hpp"
#include "chopkit/mathemu.hpp"
#include "chopkit/refinement.hpp"

namespace chopkit {

/// Shortest round-trip decimal form, independent of the C locale.
inline std::string format_number(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[64];
  auto r = std::to_chars(buf, buf + sizeof(buf), x);
  return std::string(buf, r.ptr);
}

// ---------------------------------------------------------------------------
// Geometric series with and without gradual underflow.

struct SumTrace {
  std::size_t n = 0;
  double ratio = 0.0;
  double scale = 0.0;
  std::vector<double> subnormal_on;
  std::vector<double> subnormal_off;
  std::vector<double> exact;  // binary64 accumulation
  double closed_form = 0.0;   // s (1 - r^N) / (1 - r)
};

/// Sums s*r^k for k < n. Terms are formed in binary64; every addition is an
/// emulated add (operands and result rounded to `fmt`).
inline SumTrace geometric_sum_demo(const FloatFormat& fmt, std::size_t n = 1000,
                                   double ratio = 0.99, double scale = 2.5e-6,
                                   ChopConfig base = {}) {
  ChopConfig on = base;
  on.subnormal = true;
  ChopConfig off = base;
  off.subnormal = false;
  const MathEmulator with_sub(fmt, on);
  const MathEmulator flush(fmt, off);

  SumTrace tr;
  tr.n = n;
  tr.ratio = ratio;
  tr.scale = scale;
  tr.closed_form = ratio == 1.0 ? scale * static_cast<double>(n)
                                : scale * (1.0 - std::pow(ratio, double(n))) /
                                      (1.0 - ratio);
  double acc_on = 0.0;
  double acc_off = 0.0;
  double acc_exact = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    const double term = scale * std::pow(ratio, static_cast<double>(k));
    acc_on = with_sub.binary("add", acc_on, term, k);
    acc_off = flush.binary("add", acc_off, term, k);
    acc_exact += term;
    tr.subnormal_on.push_back(acc_on);
    tr.subnormal_off.push_back(acc_off);
    tr.exact.push_back(acc_exact);
  }
  return tr;
}

inline void write_csv(std::ostream& os, const SumTrace& tr) {
  os << "step,subnormal_on,subnormal_off,exact\n";
  for (std::size_t k = 0; k < tr.n; ++k) {
    os << k << ',' << format_number(tr.subnormal_on[k]) << ','
       << format_number(tr.subnormal_off[k]) << ','
       << format_number(tr.exact[k]) << '\n';
  }
}

// ---------------------------------------------------------------------------
// Exhaustive fixed-point check over every finite value of a small format.

/// Value of a finite bit pattern [sign | exponent | fraction]; nullopt for
/// the all-ones exponent field and for exponents above emax.
inline std::optional<double> decode_pattern(std::uint64_t pattern,
                                            const FloatFormat& fmt) {
  const std::uint64_t frac_mask = (std::uint64_t{1} << fmt.sig_bits) - 1;
  const std::uint64_t exp_mask = (std::uint64_t{1} << fmt.exp_bits) - 1;
  const std::uint64_t frac = pattern & frac_mask;
  const std::uint64_t field = (pattern >> fmt.sig_bits) & exp_mask;
  const bool negative = ((pattern >> (fmt.sig_bits + fmt.exp_bits)) & 1) != 0;
  if (field == exp_mask) return std::nullopt;
  double mag = 0.0;
  if (field == 0) {
    mag = std::ldexp(static_cast<double>(frac), fmt.emin - fmt.sig_bits);
  } else {
    const int e = fmt.emin + static_cast<int>(field) - 1;
    if (e > fmt.emax) return std::nullopt;
    mag = std::ldexp(static_cast<double>(frac | (frac_mask + 1)),
                     e - fmt.sig_bits);
  }
  return negative ? -mag : mag;
}

struct RoundtripReport {
  std::uint64_t finite_values = 0;
  std::uint64_t checks = 0;
  std::uint64_t mismatches = 0;
  std::optional<double> first_mismatch;
  std::optional<RoundingMode> first_mismatch_mode;
};

inline RoundtripReport exhaustive_roundtrip(
    const FloatFormat& fmt, std::span<const RoundingMode> modes =
                                kDeterministicRoundingModes,
    ChopConfig base = {}) {
  const int total = 1 + fmt.exp_bits + fmt.sig_bits;
  if (total > 16) {
    throw std::invalid_argument("exhaustive_roundtrip: format wider than 16 bits");
  }
  RoundtripReport rep;
  std::vector<double> values;
  for (std::uint64_t p = 0; p < (std::uint64_t{1} << total); ++p) {
    if (auto v = decode_pattern(p, fmt)) values.push_back(*v);
  }
  rep.finite_values = values.size();
  for (RoundingMode mode : modes) {
    ChopConfig cfg = base;
    cfg.mode = mode;
    cfg.flip = false;
    const std::vector<double> out = chop_array(values, fmt, cfg);
    for (std::size_t i = 0; i < values.size(); ++i) {
      ++rep.checks;
      if (std::bit_cast<std::uint64_t>(out[i]) !=
          std::bit_cast<std::uint64_t>(values[i])) {
        if (!rep.first_mismatch) {
          rep.first_mismatch = values[i];
          rep.first_mismatch_mode = mode;
        }
        ++rep.mismatches;
      }
    }
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Throughput.

struct BenchReport {
  std::size_t size = 0;
  unsigned threads = 1;
  int timed_runs = 0;
  bool warmup_discarded = true;
  double mean_seconds = 0.0;
  double elements_per_second = 0.0;
  std::uint64_t checksum = 0;  // FNV-1a over the output bit patterns
};

inline std::vector<double> bench_input(std::size_t size, std::uint64_t seed) {
  const Philox4x32 rng(seed);
  std::vector<double> xs(size);
  for (std::size_t i = 0; i < size; ++i) {
    const auto b = rng(i, 0x62656e6368ull);
    xs[i] = (2.0 * to_unit_double(b[0], b[1]) - 1.0) * 1e3;
  }
  return xs;
}

inline std::uint64_t checksum(std::span<const double> xs) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (double x : xs) {
    auto bits = std::bit_cast<std::uint64_t>(x);
    for (int i = 0; i < 8; ++i) {
      h ^= (bits >> (8 * i)) & 0xFF;
      h *= 0x100000001b3ull;
    }
  }
  return h;
}

/// Times `timed_runs` chops of `size` seeded values after one discarded
/// warm-up run and reports the mean.
inline BenchReport bench(std::size_t size, const FloatFormat& fmt,
                         const ChopConfig& cfg, int timed_runs = 5,
                         std::uint64_t input_seed = 1) {
  if (size < 1) throw std::invalid_argument("bench: size must be >= 1");
  if (timed_runs < 1) throw std::invalid_argument("bench: runs must be >= 1");
  const std::vector<double> in = bench_input(size, input_seed);
  std::vector<double> out(size);
  chop_array(std::span<const double>(in), std::span<double>(out), fmt, cfg);

  using clock = std::chrono::steady_clock;
  double total = 0.0;
  for (int r = 0; r < timed_runs; ++r) {
    const auto t0 = clock::now();
    chop_array(std::span<const double>(in), std::span<double>(out), fmt, cfg);
    total += std::chrono::duration<double>(clock::now() - t0).count();
  }
  BenchReport rep;
  rep.size = size;
  rep.threads = detail::resolve_threads(cfg.threads);
  rep.timed_runs = timed_runs;
  rep.mean_seconds = total / timed_runs;
  rep.elements_per_second =
      rep.mean_seconds > 0 ? double(size) / rep.mean_seconds : 0.0;
  rep.checksum = checksum(out);
  return rep;
}

}  // namespace chopkit
