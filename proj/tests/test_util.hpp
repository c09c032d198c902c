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

#include "qtrace/ensemble.hpp"
#include "qtrace/random.hpp"

#include <complex>
#include <random>
#include <vector>

namespace qtrace::fixtures {

inline RotationParams random_params(Rng& rng) {
  std::uniform_real_distribution<double> ang(0.0, 2.0 * pi);
  return {ang(rng), ang(rng), ang(rng)};
}

inline StateVector random_state(int n, Rng& rng) {
  std::normal_distribution<double> g;
  std::vector<ComplexAmplitude> a(std::size_t{1} << n);
  for (auto& x : a) x = {g(rng), g(rng)};
  return StateVector(n, std::move(a)).normalized();
}

inline EnsembleSpec random_ensemble(int n, int alpha, Rng& rng) {
  std::uniform_real_distribution<double> u(0.05, 1.0);
  std::vector<EnsembleComponent> comps;
  double total = 0.0;
  for (int i = 0; i < alpha; ++i) {
    ProductGate g;
    for (int q = 0; q < n; ++q) g.factors.push_back(random_params(rng));
    comps.push_back({u(rng), g});
    total += comps.back().prob;
  }
  for (auto& c : comps) c.prob /= total;
  return EnsembleSpec(n, comps);
}

/// Four-component three-qubit model used throughout the regression tests.
inline EnsembleSpec reference_ensemble(int n = 3) {
  const double rows[4][3] = {{0.29, 0.07, 0.11}, {0.46, 0.62, 0.82}, {0.41, 0.59, 0.53}, {0.55, 0.31, 0.60}};
  const double probs[4] = {0.1, 0.2, 0.3, 0.4};
  std::vector<EnsembleComponent> comps;
  for (int i = 0; i < 4; ++i)
    comps.push_back({probs[i], ProductGate::uniform(n, RotationParams::in_pi_units(rows[i][0], rows[i][1], rows[i][2]))});
  return EnsembleSpec(n, comps);
}

}  // namespace qtrace::fixtures
