// Copyright 2026 The qtrace Authors
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

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>

namespace qtrace {

enum class EstimateMode {
  kExactEnumeration,   ///< exhaustive, noise-free sum; std_error is 0
  kMcExactProb,        ///< sampled circuits, exact outcome probabilities
  kMcShots,            ///< sampled circuits and sampled measurement outcomes
  kEnumerationNoisy,   ///< exhaustive sum over noisy measurements; error not tracked
  kOracle,             ///< dense reference computation
};

inline std::string_view to_string(EstimateMode m) {
  switch (m) {
    case EstimateMode::kExactEnumeration: return "exact-enumeration";
    case EstimateMode::kMcExactProb: return "mc-exact-prob";
    case EstimateMode::kMcShots: return "mc-shots";
    case EstimateMode::kEnumerationNoisy: return "enumeration-noisy";
    case EstimateMode::kOracle: return "oracle";
  }
  return "unknown";
}

inline EstimateMode estimate_mode_from_string(std::string_view s) {
  for (auto m : {EstimateMode::kExactEnumeration, EstimateMode::kMcExactProb,
                 EstimateMode::kMcShots, EstimateMode::kEnumerationNoisy, EstimateMode::kOracle})
    if (to_string(m) == s) return m;
  throw std::invalid_argument("unknown estimate mode '" + std::string(s) + "'");
}

/// A trace estimate with its standard error and provenance.
struct TraceEstimate {
  double value = 0.0;
  double std_error = 0.0;
  std::size_t samples = 0;
  EstimateMode mode = EstimateMode::kExactEnumeration;
  /// Number of probabilities clamped to [0, 1] by noise injection.
  std::size_t clamp_events = 0;
};

}  // namespace qtrace
