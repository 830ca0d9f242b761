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

// Philox4x32-10 keyed on a 64-bit seed. Each element of an array gets its
// own counter (index, stream), so draws do not depend on how work is split.

#pragma once

#include <array>
#include <cstdint>

namespace chopkit {

class Philox4x32 {
 public:
  using Block = std::array<std::uint32_t, 4>;

  constexpr explicit Philox4x32(std::uint64_t seed)
      : key_{static_cast<std::uint32_t>(seed),
             static_cast<std::uint32_t>(seed >> 32)} {}

  constexpr Block operator()(std::uint64_t index, std::uint64_t stream) const {
    Block ctr{static_cast<std::uint32_t>(index),
              static_cast<std::uint32_t>(index >> 32),
              static_cast<std::uint32_t>(stream),
              static_cast<std::uint32_t>(stream >> 32)};
    std::array<std::uint32_t, 2> key = key_;
    for (int round = 0; round < 10; ++round) {
      ctr = single_round(ctr, key);
      key[0] += kWeyl0;
      key[1] += kWeyl1;
    }
    return ctr;
  }

 private:
  static constexpr std::uint32_t kMul0 = 0xD2511F53u;
  static constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
  static constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
  static constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

  static constexpr Block single_round(const Block& c,
                                      const std::array<std::uint32_t, 2>& k) {
    const std::uint64_t p0 = std::uint64_t{kMul0} * c[0];
    const std::uint64_t p1 = std::uint64_t{kMul1} * c[2];
    return {static_cast<std::uint32_t>(p1 >> 32) ^ c[1] ^ k[0],
            static_cast<std::uint32_t>(p1),
            static_cast<std::uint32_t>(p0 >> 32) ^ c[3] ^ k[1],
            static_cast<std::uint32_t>(p0)};
  }

  std::array<std::uint32_t, 2> key_;
};

/// Uniform [0,1) with 53 random bits from two 32-bit words.
constexpr double to_unit_double(std::uint32_t hi, std::uint32_t lo) {
  const std::uint64_t bits =
      ((std::uint64_t{hi} << 32) | lo) >> 11;
  return static_cast<double>(bits) * 0x1p-53;
}

/// Uniform [0,1) with 32 random bits.
constexpr double to_unit_double(std::uint32_t w) {
  return static_cast<double>(w) * 0x1p-32;
}

/// Unbiased-enough index in [0, n) via multiply-shift.
constexpr std::uint32_t to_index(std::uint32_t w, std::uint32_t n) {
  return static_cast<std::uint32_t>((std::uint64_t{w} * n) >> 32);
}

}  // namespace chopkit
