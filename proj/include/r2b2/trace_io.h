// Copyright 2026 The R2B2 Authors. All rights reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef R2B2_TRACE_IO_H_
#define R2B2_TRACE_IO_H_

#include <iosfwd>

#include <nlohmann/json.hpp>

#include "r2b2/game.h"

namespace r2b2 {

inline constexpr int kTraceFormatVersion = 1;

// JSON Lines: the first line is a header object carrying `meta` plus the
// initialization samples; every following line is one iteration:
//   {"t":..,"actions":[..],"noisy":[..],"true":[..],
//    "reasoning":[[[level,agent,action],..],..],"level0_cov_trace":[..]}
void WriteTrace(std::ostream& out, const GameTrace& trace,
                const nlohmann::ordered_json& meta);

// Inverse of WriteTrace. `meta`, when given, receives the header fields other
// than the format tag and the initialization samples.
GameTrace ReadTrace(std::istream& in, nlohmann::ordered_json* meta = nullptr);

nlohmann::ordered_json IterationToJson(const IterationRecord& rec);
IterationRecord IterationFromJson(const nlohmann::ordered_json& j);

}  // namespace r2b2

#endif  // R2B2_TRACE_IO_H_
