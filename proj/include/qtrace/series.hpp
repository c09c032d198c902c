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

#include "qtrace/estimate.hpp"
#include "qtrace/ht.hpp"

#include <cmath>
#include <cstddef>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace qtrace::series {

enum class SeriesKind { kPower, kEntropy };

/// Linear functional constant + sum_k coefficients[k] * T_k over a family of
/// trace moments T_0, T_1, ... (by default T_k = Tr{G^k}).
struct SeriesWeights {
  int order = 0;
  std::vector<double> coefficients;
  SeriesKind kind = SeriesKind::kPower;
  double constant = 0.0;
};

/// Tr{rho^m} = 2^{-m} sum_k C(m,k) (-1)^k Tr{G^k}.
inline SeriesWeights binomial_weights(int m) {
  if (m < 0) throw std::invalid_argument("order must be >= 0");
  SeriesWeights w;
  w.order = m;
  w.kind = SeriesKind::kPower;
  const double scale = std::ldexp(1.0, -m);
  for (int k = 0; k <= m; ++k)
    w.coefficients.push_back(scale * ht::binomial_coefficient(m, k) *
                             ht::layer_sign(static_cast<std::size_t>(k)));
  return w;
}

/// Truncation of rho ln rho = (I - G)/2 [ -ln 2 + ln(I - G) ] after the G^n_t
/// term of ln(I - G), taken to trace level:
///   c_0 = -ln2/2, c_1 = ln2/2 - 1/2, c_j = (1/(j-1) - 1/j)/2, c_{n_t+1} = 1/(2 n_t).
inline SeriesWeights entropy_weights(int truncation_order) {
  if (truncation_order < 1) throw std::invalid_argument("truncation order must be >= 1");
  const double ln2 = std::numbers::ln2;
  SeriesWeights w;
  w.order = truncation_order;
  w.kind = SeriesKind::kEntropy;
  w.coefficients.assign(static_cast<std::size_t>(truncation_order) + 2, 0.0);
  w.coefficients[0] = -0.5 * ln2;
  w.coefficients[1] = 0.5 * ln2 - 0.5;
  for (int j = 2; j <= truncation_order; ++j)
    w.coefficients[static_cast<std::size_t>(j)] = 0.5 * (1.0 / (j - 1) - 1.0 / j);
  w.coefficients[static_cast<std::size_t>(truncation_order) + 1] += 0.5 / truncation_order;
  return w;
}

/// Rewrites weights on Tr{G^k} as weights on Tr{G^j rho}, using
/// Tr{G^k} = dim - 2 sum_{j<k} Tr{G^j rho}. The Hadamard test measures the
/// latter family.
inline SeriesWeights to_rho_moments(const SeriesWeights& w, double dim) {
  SeriesWeights out;
  out.order = w.order;
  out.kind = w.kind;
  out.constant = w.constant;
  const std::size_t n = w.coefficients.size();
  for (double c : w.coefficients) out.constant += c * dim;
  if (n <= 1) return out;
  out.coefficients.assign(n - 1, 0.0);
  double tail = 0.0;
  for (std::size_t j = n - 1; j-- > 0;) {
    tail += w.coefficients[j + 1];
    out.coefficients[j] = -2.0 * tail;
  }
  return out;
}

/// constant + sum_k c_k T_k, errors combined in quadrature (independent T_k).
inline TraceEstimate evaluate_series(const SeriesWeights& w, std::span<const TraceEstimate> moments) {
  if (moments.size() < w.coefficients.size())
    throw std::invalid_argument("series needs moments 0.." +
                                std::to_string(w.coefficients.size() - 1) + " but only 0.." +
                                std::to_string(static_cast<long>(moments.size()) - 1) +
                                " were given; missing k = " + std::to_string(moments.size()));
  TraceEstimate out;
  out.value = w.constant;
  double var = 0.0;
  bool any = false;
  for (std::size_t k = 0; k < w.coefficients.size(); ++k) {
    const auto& m = moments[k];
    out.value += w.coefficients[k] * m.value;
    var += w.coefficients[k] * w.coefficients[k] * m.std_error * m.std_error;
    out.samples += m.samples;
    out.clamp_events += m.clamp_events;
    if (!any || m.mode != EstimateMode::kExactEnumeration) out.mode = m.mode;
    any = true;
  }
  out.std_error = std::sqrt(var);
  return out;
}

}  // namespace qtrace::series
