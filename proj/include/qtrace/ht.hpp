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

// Hadamard-test estimation of Tr{rho^{m+1}}.
//
// The ancilla is never simulated. For a sampled circuit with initial state
// |psi> and inserted layers W = G_{y_{k+1}} ... G_{y_2}, the ancilla reads 0
// with probability (1 + Re<psi|W|psi>)/2, and that closed form is what the
// estimators evaluate.

#include "qtrace/ensemble.hpp"
#include "qtrace/errors.hpp"
#include "qtrace/estimate.hpp"
#include "qtrace/noise_bounds.hpp"
#include "qtrace/qcore.hpp"
#include "qtrace/random.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace qtrace::ht {

inline constexpr std::uint64_t kDefaultEnumerationCap = 10'000'000;
inline constexpr std::size_t kTrialBlock = 4096;

/// One sampled Hadamard-test circuit.
struct HtSample {
  std::size_t initial_component = 0;
  std::vector<bool> layer_flags;               ///< one coin per potential layer
  std::vector<std::size_t> layer_components;   ///< one entry per true flag, circuit order

  std::size_t k() const noexcept { return layer_components.size(); }
};

/// Draws the initial component, then m fair coins, each inserting a
/// controlled-G layer with a component drawn by probability.
inline HtSample sample_circuit(const EnsembleSpec& e, int m, Rng& rng) {
  if (m < 0) throw std::invalid_argument("m must be >= 0");
  HtSample s;
  s.initial_component = sample_component(e, rng);
  s.layer_flags.reserve(static_cast<std::size_t>(m));
  for (int i = 0; i < m; ++i) {
    const bool insert = uniform01(rng) < 0.5;
    s.layer_flags.push_back(insert);
    if (insert) s.layer_components.push_back(sample_component(e, rng));
  }
  return s;
}

/// <psi_{y1}| G_{y_{k+1}} ... G_{y_2} |psi_{y1}>, layers applied in circuit order.
inline ComplexAmplitude circuit_amplitude(const EnsembleSpec& e, const HtSample& s) {
  const StateVector& psi = e.state(s.initial_component);
  StateVector x = psi;
  for (auto c : s.layer_components) x = apply_reflection(e.reflection(c), x);
  return overlap(psi, x);
}

/// P(ancilla = 0) = (1 + Re<psi|W|psi>)/2. Values outside [0, 1] beyond
/// rounding indicate a bug and throw; rounding residue is snapped back.
inline double exact_p0(const EnsembleSpec& e, const HtSample& s) {
  const double p0 = 0.5 * (1.0 + circuit_amplitude(e, s).real());
  if (!(p0 >= -1e-9 && p0 <= 1.0 + 1e-9))
    throw std::logic_error("outcome probability " + std::to_string(p0) + " outside [0, 1]");
  return std::min(1.0, std::max(0.0, p0));
}

inline double layer_sign(std::size_t k) noexcept { return (k % 2 == 0) ? 1.0 : -1.0; }

/// One measured ancilla outcome z, returned as (-1)^k (+1 if z = 0 else -1).
/// `p0` is the (possibly noise-perturbed) probability of z = 0.
inline double single_shot_from_p0(std::size_t k, double p0, Rng& rng) {
  const bool zero = uniform01(rng) < p0;
  return layer_sign(k) * (zero ? 1.0 : -1.0);
}

inline double single_shot(const EnsembleSpec& e, const HtSample& s, Rng& rng) {
  return single_shot_from_p0(s.k(), exact_p0(e, s), rng);
}

enum class McMode { kExactProb, kShots };

struct McOptions {
  std::uint64_t trials = 100'000;
  std::uint64_t shots_per_trial = 1;
  McMode mode = McMode::kShots;
  std::uint64_t seed = 0;
  double ht_sigma = 0.0;   ///< Gaussian noise on P(0); 0 disables injection
  unsigned threads = 0;    ///< 0 means default_thread_count()
};

namespace detail {

struct TrialBlock {
  Accumulator acc;
  std::size_t clamps = 0;
};

/// Runs `trials` independent trials; `draw(rng)` returns an HtSample and the
/// sign convention of its contribution.
template <typename Draw>
TraceEstimate run_trials(const EnsembleSpec& e, const McOptions& opt, Draw&& draw) {
  if (opt.trials < 1) throw std::invalid_argument("trials must be >= 1");
  if (opt.mode == McMode::kShots && opt.shots_per_trial < 1)
    throw std::invalid_argument("shots_per_trial must be >= 1");
  if (!(std::isfinite(opt.ht_sigma) && opt.ht_sigma >= 0.0))
    throw std::invalid_argument("ht_sigma must be finite and >= 0");
  const unsigned threads = opt.threads == 0 ? default_thread_count() : opt.threads;

  auto blocks = parallel_blocks<TrialBlock>(
      opt.trials, kTrialBlock, threads, [&](std::size_t begin, std::size_t end) {
        TrialBlock out;
        for (std::size_t t = begin; t < end; ++t) {
          Rng rng = make_stream(opt.seed, t);
          const auto [sample, sign] = draw(rng);
          double p0 = exact_p0(e, sample);
          if (opt.ht_sigma > 0.0) {
            const auto pert = perturb_probability(p0, opt.ht_sigma, rng);
            p0 = pert.value;
            out.clamps += pert.clamped ? 1 : 0;
          }
          double value;
          if (opt.mode == McMode::kExactProb) {
            value = sign * (2.0 * p0 - 1.0);
          } else {
            double sum = 0.0;
            for (std::uint64_t shot = 0; shot < opt.shots_per_trial; ++shot)
              sum += (uniform01(rng) < p0) ? 1.0 : -1.0;
            value = sign * sum / static_cast<double>(opt.shots_per_trial);
          }
          out.acc.add(value);
        }
        return out;
      });

  Accumulator total;
  std::size_t clamps = 0;
  for (const auto& b : blocks) {
    total.merge(b.acc);
    clamps += b.clamps;
  }
  TraceEstimate est;
  est.value = total.mean();
  est.std_error = total.std_error();
  est.samples = opt.mode == McMode::kShots ? opt.trials * opt.shots_per_trial : opt.trials;
  est.mode = opt.mode == McMode::kShots ? EstimateMode::kMcShots : EstimateMode::kMcExactProb;
  est.clamp_events = clamps;
  return est;
}

}  // namespace detail

/// Monte Carlo estimate of Tr{rho^{m+1}}. Trial t uses stream (seed, t), so
/// the result is independent of the worker count.
inline TraceEstimate estimate_power_trace_mc(const EnsembleSpec& e, int m, const McOptions& opt) {
  if (m < 0) throw std::invalid_argument("m must be >= 0");
  return detail::run_trials(e, opt, [&](Rng& rng) {
    HtSample s = sample_circuit(e, m, rng);
    const double sign = layer_sign(s.k());
    return std::pair<HtSample, double>{std::move(s), sign};
  });
}

/// Monte Carlo estimate of Tr{G^j rho}: every one of the j layers is inserted.
inline TraceEstimate estimate_g_rho_trace_mc(const EnsembleSpec& e, int j, const McOptions& opt) {
  if (j < 0) throw std::invalid_argument("j must be >= 0");
  return detail::run_trials(e, opt, [&](Rng& rng) {
    HtSample s;
    s.initial_component = sample_component(e, rng);
    s.layer_flags.assign(static_cast<std::size_t>(j), true);
    for (int i = 0; i < j; ++i) s.layer_components.push_back(sample_component(e, rng));
    return std::pair<HtSample, double>{std::move(s), 1.0};
  });
}

/// Words evaluated by an exhaustive pass to depth `depth`: sum_{k<=depth} alpha^{k+1}.
inline double enumeration_word_count(std::size_t alpha, int depth) {
  double total = 0.0;
  double term = static_cast<double>(alpha);
  for (int k = 0; k <= depth; ++k) {
    total += term;
    term *= static_cast<double>(alpha);
  }
  return total;
}

/// Exact Tr{G^k rho} for k = 0..depth by depth-first enumeration of every
/// word, sharing prefixes. Throws ResourceLimitError above `cap` words.
inline std::vector<double> enumerate_g_rho_moments(const EnsembleSpec& e, int depth,
                                                   std::uint64_t cap = kDefaultEnumerationCap,
                                                   unsigned threads = 0) {
  if (depth < 0) throw std::invalid_argument("depth must be >= 0");
  const double words = enumeration_word_count(e.size(), depth);
  if (words > static_cast<double>(cap))
    throw ResourceLimitError("enumeration needs " + std::to_string(words) +
                                 " words, above enumeration_cap " + std::to_string(cap),
                             "enumeration_cap", static_cast<double>(cap));
  if (threads == 0) threads = default_thread_count();
  const std::size_t alpha = e.size();
  const auto d = static_cast<std::size_t>(depth);

  auto per_start = parallel_blocks<std::vector<double>>(
      alpha, 1, threads, [&](std::size_t begin, std::size_t) {
        std::vector<double> moments(d + 1, 0.0);
        const StateVector& psi = e.state(begin);
        const double p_start = e.prob(begin);
        // Explicit stack: (state, weight, depth).
        struct Frame {
          StateVector x;
          double w;
          std::size_t level;
        };
        std::vector<Frame> stack;
        stack.push_back({psi, p_start, 0});
        while (!stack.empty()) {
          Frame f = std::move(stack.back());
          stack.pop_back();
          moments[f.level] += f.w * overlap(psi, f.x).real();
          if (f.level == d) continue;
          for (std::size_t c = alpha; c-- > 0;)
            stack.push_back({apply_reflection(e.reflection(c), f.x), f.w * e.prob(c), f.level + 1});
        }
        return moments;
      });

  std::vector<double> total(d + 1, 0.0);
  for (const auto& m : per_start)
    for (std::size_t k = 0; k <= d; ++k) total[k] += m[k];
  return total;
}

inline double binomial_coefficient(int m, int k) {
  if (k < 0 || k > m) return 0.0;
  double c = 1.0;
  for (int i = 1; i <= k; ++i) c = c * (m - k + i) / i;
  return c;
}

/// Exact expectation of the Hadamard-test estimator of Tr{rho^{m+1}}:
/// sum_k C(m,k)/2^m (-1)^k Tr{G^k rho}, every word enumerated.
inline TraceEstimate estimate_power_trace_enumerate(const EnsembleSpec& e, int m,
                                                    std::uint64_t cap = kDefaultEnumerationCap,
                                                    unsigned threads = 0) {
  if (m < 0) throw std::invalid_argument("m must be >= 0");
  const auto moments = enumerate_g_rho_moments(e, m, cap, threads);
  double value = 0.0;
  const double scale = std::ldexp(1.0, -m);
  for (int k = 0; k <= m; ++k)
    value += scale * binomial_coefficient(m, k) * layer_sign(static_cast<std::size_t>(k)) *
             moments[static_cast<std::size_t>(k)];
  TraceEstimate est;
  est.value = value;
  est.std_error = 0.0;
  est.samples = static_cast<std::size_t>(enumeration_word_count(e.size(), m));
  est.mode = EstimateMode::kExactEnumeration;
  return est;
}

/// Exact Tr{G^j rho} by enumeration.
inline TraceEstimate estimate_g_rho_trace_enumerate(const EnsembleSpec& e, int j,
                                                    std::uint64_t cap = kDefaultEnumerationCap,
                                                    unsigned threads = 0) {
  const auto moments = enumerate_g_rho_moments(e, j, cap, threads);
  TraceEstimate est;
  est.value = moments.back();
  est.samples = static_cast<std::size_t>(enumeration_word_count(e.size(), j));
  est.mode = EstimateMode::kExactEnumeration;
  return est;
}

}  // namespace qtrace::ht
