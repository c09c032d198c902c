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

#include "qtrace/errors.hpp"
#include "qtrace/random.hpp"

#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <stdexcept>
#include <string>

namespace qtrace {

/// Gaussian measurement-noise levels. The defaults are the levels used for
/// the HT outcome probabilities and for the GST p/g matrix entries.
struct NoiseConfig {
  double ht_sigma = 0.01;
  double gst_sigma = 0.0001;
  std::uint64_t seed = 0;

  void validate() const {
    if (!(std::isfinite(ht_sigma) && ht_sigma >= 0.0))
      throw std::invalid_argument("ht_sigma must be finite and >= 0");
    if (!(std::isfinite(gst_sigma) && gst_sigma >= 0.0))
      throw std::invalid_argument("gst_sigma must be finite and >= 0");
  }
};

struct Perturbation {
  double value;
  bool clamped;
};

/// clamp(p + N(0, sigma^2), 0, 1), reporting whether the clamp fired.
inline Perturbation perturb_probability(double p, double sigma, Rng& rng) {
  if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("probability must lie in [0, 1]");
  if (sigma == 0.0) return {p, false};
  const double x = p + std::normal_distribution<double>(0.0, sigma)(rng);
  if (x < 0.0) return {0.0, true};
  if (x > 1.0) return {1.0, true};
  return {x, false};
}

/// x + N(0, sigma^2) without clamping; used for matrix entries.
inline double perturb_entry(double x, double sigma, Rng& rng) {
  if (sigma == 0.0) return x;
  return x + std::normal_distribution<double>(0.0, sigma)(rng);
}

/// Inputs to the error-bound calculators.
struct ErrorBudget {
  int d = 1;
  double epsilon = 1e-4;   ///< truncation threshold
  double eps1 = 0.0;       ///< per-entry Gram error level
  double eps2 = 0.0;       ///< per-entry PTM error level
  double delta = 0.05;     ///< failure probability
  int n_layers = 1;

  void validate() const {
    if (d < 1) throw std::invalid_argument("d must be >= 1");
    if (!(epsilon > 0.0)) throw std::invalid_argument("epsilon must be > 0");
    if (!(eps1 >= 0.0) || !(eps2 >= 0.0)) throw std::invalid_argument("eps1/eps2 must be >= 0");
    if (!(delta > 0.0 && delta < 1.0)) throw std::invalid_argument("delta must lie in (0, 1)");
    if (n_layers < 1) throw std::invalid_argument("n_layers must be >= 1");
  }
};

/// Hoeffding sizing: the smallest N with 2 d^2 exp(-2 N eps^2) <= delta, i.e.
/// every one of the d^2 entries is within eps with probability >= 1 - delta.
inline std::uint64_t shots_for_accuracy(int d, double eps_tilde, double delta_tilde) {
  if (d < 1) throw std::invalid_argument("d must be >= 1");
  if (!(eps_tilde > 0.0 && eps_tilde < 1.0))
    throw std::invalid_argument("eps_tilde must lie in (0, 1)");
  if (!(delta_tilde > 0.0 && delta_tilde < 1.0))
    throw std::invalid_argument("delta_tilde must lie in (0, 1)");
  const double dd = static_cast<double>(d) * d;
  const double n = std::log(2.0 * dd / delta_tilde) / (2.0 * eps_tilde * eps_tilde);
  return static_cast<std::uint64_t>(std::ceil(n));
}

namespace detail {
inline double gram_denominator(int d, double eps1, double epsilon) {
  if (d < 1) throw std::invalid_argument("d must be >= 1");
  if (!(eps1 >= 0.0)) throw std::invalid_argument("eps1 must be >= 0");
  if (!(epsilon > 0.0)) throw std::invalid_argument("epsilon must be > 0");
  const double den = 1.0 - static_cast<double>(d) * d * eps1 * epsilon;
  if (!(den > 0.0))
    throw DivergentBoundError("d^2 * eps1 * epsilon >= 1; the Neumann series diverges");
  return den;
}
}  // namespace detail

/// Entrywise bound on g^{-1} - (g + dg)^{-1}: d^2 eps1 / (1 - d^2 eps1 eps).
inline double gram_inverse_error_bound(int d, double eps1, double epsilon) {
  const double den = detail::gram_denominator(d, eps1, epsilon);
  return static_cast<double>(d) * d * eps1 / den;
}

/// Bound on the error of Tr{g^{-1} R}:
/// d^4 eps1/(1 - d^2 eps1 eps) + d^2 eps2/eps + d^4 eps1 eps2/(1 - d^2 eps1 eps).
inline double sampling_error_bound(int d, double eps1, double eps2, double epsilon) {
  if (!(eps2 >= 0.0)) throw std::invalid_argument("eps2 must be >= 0");
  const double den = detail::gram_denominator(d, eps1, epsilon);
  const double d2 = static_cast<double>(d) * d;
  const double d4 = d2 * d2;
  return d4 * eps1 / den + d2 * eps2 / epsilon + d4 * eps1 * eps2 / den;
}

/// Order-of-magnitude truncation bias d * n_layers * (eps + d^2/sqrt(N))^{1/4},
/// constant factor 1. `shots` may be +infinity for noise-free measurement.
inline double truncation_error_estimate(int n_layers, int d, double epsilon, double shots) {
  if (n_layers < 0 || d < 0) throw std::invalid_argument("n_layers and d must be >= 0");
  if (!(epsilon >= 0.0)) throw std::invalid_argument("epsilon must be >= 0");
  if (!(shots > 0.0)) throw std::invalid_argument("shots must be > 0");
  const double d2 = static_cast<double>(d) * d;
  const double eps3 = std::pow(epsilon + d2 / std::sqrt(shots), 0.25);
  return static_cast<double>(d) * n_layers * eps3;
}

}  // namespace qtrace
