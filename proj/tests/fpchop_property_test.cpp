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

// Randomized properties of the rounding engine, checked against brute-force
// enumeration of the target format.

#include <algorithm>
#include <cmath>
#include <random>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "chopkit/fpchop.hpp"
#include "chopkit/harness.hpp"
#include "oracles.hpp"

namespace chopkit {
namespace {

using RM = RoundingMode;
using oracle::same_bits;
using oracle::ValueTable;

struct FormatCase {
  const char* label;
  int exp_bits;
  int sig_bits;
};

const FormatCase kFormats[] = {
    {"e3m2", 3, 2}, {"e2m1", 2, 1}, {"e4m3", 4, 3},
    {"e5m2", 5, 2}, {"fp16", 5, 10}, {"bf16", 8, 7},
};

class PropertyTest : public ::testing::TestWithParam<FormatCase> {
 protected:
  FloatFormat fmt() const {
    return make_format(GetParam().exp_bits, GetParam().sig_bits);
  }
  ValueTable table(bool subnormal = true) const {
    return ValueTable(GetParam().exp_bits, GetParam().sig_bits, subnormal);
  }
};

TEST_P(PropertyTest, DeterministicModesMatchOracle) {
  const FloatFormat f = fmt();
  for (bool subnormal : {true, false}) {
    const ValueTable t = table(subnormal);
    std::vector<double> xs = oracle::spread_values(f, 20000, 21);
    // Every representable value, every midpoint and the points next to them.
    const auto vals = t.finite_values();
    for (std::size_t i = 0; i + 1 < vals.size() && xs.size() < 200000; ++i) {
      const double mid = 0.5 * (vals[i] + vals[i + 1]);
      for (double v : {vals[i], mid, std::nextafter(mid, 0.0),
                       std::nextafter(mid, 1e300)}) {
        xs.push_back(v);
        xs.push_back(-v);
      }
    }
    for (RM mode : kDeterministicRoundingModes) {
      ChopConfig cfg;
      cfg.mode = mode;
      cfg.subnormal = subnormal;
      const auto out = chop_array(xs, f, cfg);
      for (std::size_t i = 0; i < xs.size(); ++i) {
        ASSERT_TRUE(same_bits(out[i], t.round(xs[i], mode)))
            << "x=" << xs[i] << " mode=" << name(mode)
            << " subnormal=" << subnormal << " got=" << out[i]
            << " want=" << t.round(xs[i], mode);
      }
    }
  }
}

TEST_P(PropertyTest, Faithful) {
  const FloatFormat f = fmt();
  const ValueTable t = table();
  const auto xs = oracle::spread_values(f, 100000, 22);
  for (RM mode : kAllRoundingModes) {
    ChopConfig cfg;
    cfg.mode = mode;
    cfg.seed = 3;
    const auto out = chop_array(xs, f, cfg);
    for (std::size_t i = 0; i < xs.size(); ++i) {
      const auto [lo, hi] = t.neighbours(xs[i]);
      const bool ok = same_bits(out[i], lo) || same_bits(out[i], hi);
      ASSERT_TRUE(ok) << "x=" << xs[i] << " mode=" << name(mode)
                      << " got=" << out[i] << " neighbours=" << lo << ","
                      << hi;
    }
  }
}

TEST_P(PropertyTest, MonotoneForDeterministicModes) {
  const FloatFormat f = fmt();
  auto xs = oracle::spread_values(f, 100000, 23);
  std::sort(xs.begin(), xs.end());
  for (RM mode : kDeterministicRoundingModes) {
    ChopConfig cfg;
    cfg.mode = mode;
    const auto out = chop_array(xs, f, cfg);
    for (std::size_t i = 1; i < out.size(); ++i) {
      ASSERT_LE(out[i - 1], out[i])
          << "x=" << xs[i - 1] << "," << xs[i] << " mode=" << name(mode);
    }
  }
}

TEST_P(PropertyTest, SignSymmetry) {
  const FloatFormat f = fmt();
  auto xs = oracle::spread_values(f, 100000, 24);
  std::vector<double> neg(xs.size());
  std::transform(xs.begin(), xs.end(), neg.begin(), [](double x) { return -x; });
  auto chop_with = [&](const std::vector<double>& in, RM mode) {
    ChopConfig cfg;
    cfg.mode = mode;
    return chop_array(in, f, cfg);
  };
  for (RM mode : {RM::kNearestEven, RM::kTowardZero, RM::kNearestTiesToZero,
                  RM::kNearestTiesAway, RM::kToOdd}) {
    const auto a = chop_with(xs, mode);
    const auto b = chop_with(neg, mode);
    for (std::size_t i = 0; i < xs.size(); ++i) {
      ASSERT_TRUE(same_bits(a[i], -b[i])) << "x=" << xs[i];
    }
  }
  // Directed modes mirror each other.
  const auto up = chop_with(xs, RM::kUp);
  const auto down_neg = chop_with(neg, RM::kDown);
  for (std::size_t i = 0; i < xs.size(); ++i) {
    ASSERT_TRUE(same_bits(up[i], -down_neg[i])) << "x=" << xs[i];
  }
}

TEST_P(PropertyTest, StochasticSymmetryInDistribution) {
  const FloatFormat f = fmt();
  const ValueTable t = table();
  std::mt19937_64 gen(25);
  const auto points = oracle::spread_values(f, 40, 26);
  constexpr std::size_t kDraws = 20000;
  for (RM mode : {RM::kStochasticProportional, RM::kStochasticUniform}) {
    for (double x : points) {
      const auto [lo, hi] = t.neighbours(std::fabs(x));
      if (lo == hi || std::isinf(hi)) continue;
      ChopConfig cfg;
      cfg.mode = mode;
      cfg.seed = gen();
      std::vector<double> pos(kDraws, std::fabs(x));
      std::vector<double> neg(kDraws, -std::fabs(x));
      const auto a = chop_array(pos, f, cfg);
      cfg.seed = gen();
      const auto b = chop_array(neg, f, cfg);
      const double pa =
          double(std::count(a.begin(), a.end(), hi)) / kDraws;
      const double pb =
          double(std::count(b.begin(), b.end(), -hi)) / kDraws;
      const double p = 0.5 * (pa + pb);
      const double se = std::sqrt(2 * p * (1 - p) / kDraws) + 1e-12;
      EXPECT_LE(std::fabs(pa - pb), 5 * se)
          << "x=" << x << " mode=" << name(mode);
    }
  }
}

TEST_P(PropertyTest, Idempotent) {
  const FloatFormat f = fmt();
  const auto xs = oracle::spread_values(f, 50000, 27);
  for (RM mode : kAllRoundingModes) {
    ChopConfig cfg;
    cfg.mode = mode;
    cfg.seed = 9;
    const auto once = chop_array(xs, f, cfg);
    const auto twice = chop_array(once, f, cfg);
    for (std::size_t i = 0; i < xs.size(); ++i) {
      ASSERT_TRUE(same_bits(once[i], twice[i])) << "x=" << xs[i];
    }
  }
}

TEST_P(PropertyTest, RoundToOddLandsOnOddPattern) {
  const FloatFormat f = fmt();
  const ValueTable t = table();
  const auto xs = oracle::spread_values(f, 50000, 28);
  ChopConfig cfg;
  cfg.mode = RM::kToOdd;
  const auto out = chop_array(xs, f, cfg);
  const auto& es = t.entries();
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double a = std::fabs(out[i]);
    auto it = std::lower_bound(es.begin(), es.end(), a,
                               [](const oracle::Entry& e, double v) {
                                 return e.value < v;
                               });
    ASSERT_TRUE(it != es.end() && it->value == a) << "not representable";
    if (std::fabs(xs[i]) != a) {
      EXPECT_TRUE(it->odd) << "x=" << xs[i] << " got=" << out[i];
    }
  }
}

TEST_P(PropertyTest, ExhaustiveRoundtrip) {
  const RoundtripReport r = exhaustive_roundtrip(fmt());
  EXPECT_EQ(r.mismatches, 0u);
  EXPECT_EQ(r.finite_values, 2 * table().finite_values().size());
}

INSTANTIATE_TEST_SUITE_P(
    Formats, PropertyTest, ::testing::ValuesIn(kFormats),
    [](const ::testing::TestParamInfo<FormatCase>& info) {
      return std::string(info.param.label);
    });

TEST(ChopOracleTest, Fp16NearestNeighbour) {
  const oracle::Fp16Nearest nearest;
  const FloatFormat f = builtin_format("fp16");
  std::mt19937_64 gen(31);
  std::uniform_real_distribution<double> dist(-1e5, 1e5);
  std::vector<double> xs(100000);
  for (double& x : xs) x = dist(gen);
  for (double v : nearest.values()) {
    xs.push_back(v);
    xs.push_back(-std::nextafter(v, 1e9));
  }
  xs.push_back(65519.99);
  xs.push_back(65520.0);
  const auto out = chop_array(xs, f, ChopConfig{});
  for (std::size_t i = 0; i < xs.size(); ++i) {
    ASSERT_TRUE(same_bits(out[i], nearest(xs[i]))) << "x=" << xs[i];
  }
}

TEST(ChopOracleTest, StochasticProportionalIsUnbiased) {
  const FloatFormat f = builtin_format("fp16");
  const ValueTable t(5, 10);
  std::mt19937_64 gen(32);
  std::uniform_real_distribution<double> dist(-100, 100);
  constexpr std::size_t kDraws = 20000;
  for (int k = 0; k < 20; ++k) {
    double x = dist(gen);
    const auto [lo, hi] = t.neighbours(x);
    ChopConfig cfg;
    cfg.mode = RM::kStochasticProportional;
    cfg.seed = gen();
    const auto out = chop_array(std::vector<double>(kDraws, x), f, cfg);
    double mean = 0.0;
    for (double v : out) mean += v;
    mean /= kDraws;
    const double p = (x - lo) / (hi - lo);
    const double se = (hi - lo) * std::sqrt(p * (1 - p) / kDraws);
    EXPECT_LE(std::fabs(mean - x), 4 * se) << "x=" << x;
  }
}

TEST(ChopOracleTest, StochasticUniformIsEvenSplit) {
  const FloatFormat f = builtin_format("fp16");
  const double x = 1.0 + 0.1 * std::ldexp(1.0, -10);
  ChopConfig cfg;
  cfg.mode = RM::kStochasticUniform;
  cfg.seed = 4;
  constexpr std::size_t kDraws = 40000;
  const auto out = chop_array(std::vector<double>(kDraws, x), f, cfg);
  const double up = double(std::count(out.begin(), out.end(),
                                      1.0 + std::ldexp(1.0, -10))) /
                    kDraws;
  EXPECT_NEAR(up, 0.5, 4 * std::sqrt(0.25 / kDraws));
}

}  // namespace
}  // namespace chopkit
