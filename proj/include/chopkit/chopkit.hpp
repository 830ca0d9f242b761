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

#include "chopkit/array_file.hpp"
#include "chopkit/counter_rng.hpp"
#include "chopkit/fixedpoint.hpp"
#include "chopkit/formats.hpp"
#include "chopkit/fpchop.hpp"
#include "chopkit/harness.hpp"
#include "chopkit/intquant.hpp"
#include "chopkit/mathemu.hpp"
#include "chopkit/quantizer_spec.hpp"
#include "chopkit/refinement.hpp"
#include "chopkit/rounding.hpp"
