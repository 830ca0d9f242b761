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

// Format spec strings shared by the command-line tool:
//   float:  fp16, bf16, e5m10, ...
//   fixed:  q8.8
//   int:    int8, int8:sym, int4:asym:axis=1

#pragma once

#include <string>
#include <string_view>
#include <variant>

#include "chopkit/fixedpoint.hpp"
#include "chopkit/formats.hpp"
#include "chopkit/intquant.hpp"

namespace chopkit {

using QuantizerSpec = std::variant<FloatFormat, FixedFormat, IntQuantConfig>;

inline QuantizerSpec parse_quantizer_spec(std::string_view spec) {
  const std::string s = detail::to_lower(spec);
  if (s.rfind("int", 0) == 0) return parse_int_config(s);
  if (!s.empty() && s[0] == 'q') return parse_fixed_format(s);
  return parse_float_format(s);
}

}  // namespace chopkit
