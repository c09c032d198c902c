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

// Subspace gate-set tomography for Tr{G^k}.
//
// A word q acts as the identity outside the span V_q of its reflection axes,
// so Tr{G_q} = Tr{w_q} + 2^n - d, where w_q is the restriction to the
// d-dimensional span. |Tr w_q|^2 is the trace of the transfer matrix of
// X -> w_q X w_q^dagger, recovered gauge-free as Tr{g^{-1} p} from the
// measured overlap matrices. Repeating on V_q (+) |phi> with w_q (+) 1 gives
// |Tr w_q + 1|^2, and the two traces together give Re[Tr w_q].

#include "qtrace/ensemble.hpp"
#include "qtrace/errors.hpp"
#include "qtrace/estimate.hpp"
#include "qtrace/ht.hpp"
#include "qtrace/noise_bounds.hpp"
#include "qtrace/qcore.hpp"
#include "qtrace/random.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace qtrace::gst {

inline constexpr double kDefaultTheta = pi / 2.0;
inline constexpr double kDefaultEpsilon = 1e-10;
inline constexpr double kConditioningFloor = 1e-8;
inline constexpr double kThetaTolerance = 1e-6;
/// |<a|b>| above this means the same physical state.
inline constexpr double kSameStateOverlap = 1.0 - 1e-12;
/// Below this overlap modulus a dressing reflection about the partner state
/// barely moves the base state, so a bridge axis is used instead.
inline constexpr double kBridgeOverlap = 1e-3;
inline constexpr double kProbeFloor = 1e-2;

/// k ~ Binomial(m, 1/2) layers, each an independent component draw.
inline Combination sample_combination(const EnsembleSpec& e, int m, Rng& rng) {
  if (m < 0) throw std::invalid_argument("m must be >= 0");
  Combination c;
  for (int i = 0; i < m; ++i) {
    if (uniform01(rng) < 0.5) {
      const auto idx = sample_component(e, rng);
      c.indices.push_back(idx);
      c.weight *= e.prob(idx);
    }
  }
  return c;
}

// ---------------------------------------------------------------------------
// Truncated subspace

struct DiscardedState {
  std::size_t component;
  StateVector state;
  double statistic;
};

struct SubspaceBasis {
  std::vector<StateVector> retained;
  std::vector<std::size_t> retained_components;
  std::vector<StateVector> orthonormal;  ///< Gram-Schmidt of `retained`, same order
  std::vector<DiscardedState> discarded;
  double epsilon = kDefaultEpsilon;

  std::size_t d() const noexcept { return retained.size(); }
  bool truncated() const noexcept { return !discarded.empty(); }
};

struct Projection {
  StateVector residual;       ///< unnormalized component orthogonal to the basis
  double residual_norm_sq;    ///< |Delta|^2
  double coeff_norm_sq;       ///< |x|^2
};

/// Splits `v` against an orthonormal set, with one re-orthogonalization pass.
inline Projection project_out(std::span<const StateVector> orthonormal, const StateVector& v) {
  std::vector<ComplexAmplitude> coeffs(orthonormal.size());
  StateVector r = v;
  for (int pass = 0; pass < 2; ++pass) {
    for (std::size_t i = 0; i < orthonormal.size(); ++i) {
      const ComplexAmplitude c = overlap(orthonormal[i], r);
      coeffs[i] += c;
      r = r.plus_scaled(-c, orthonormal[i]);
    }
  }
  double x2 = 0.0;
  for (const auto& c : coeffs) x2 += std::norm(c);
  const double r2 = r.norm_squared();
  return {std::move(r), r2, x2};
}

/// Admission statistic (|Delta|^2 / (1 + |x|^2))^2, the smallest eigenvalue
/// of the enlarged Gram matrix.
inline double admission_statistic(double residual_norm_sq, double coeff_norm_sq) {
  const double a = residual_norm_sq / (1.0 + coeff_norm_sq);
  return a * a;
}

/// Walks the distinct component indices of `q` in first-occurrence order and
/// keeps each state whose admission statistic is >= epsilon.
inline SubspaceBasis build_subspace(const EnsembleSpec& e, const Combination& q, double epsilon) {
  if (!(epsilon > 0.0 && epsilon < 1.0)) throw std::invalid_argument("epsilon must lie in (0, 1)");
  SubspaceBasis b;
  b.epsilon = epsilon;
  std::vector<bool> seen(e.size(), false);
  for (auto idx : q.indices) {
    if (idx >= e.size()) throw std::invalid_argument("combination index out of range");
    if (seen[idx]) continue;
    seen[idx] = true;
    const StateVector& psi = e.state(idx);
    auto proj = project_out(b.orthonormal, psi);
    const double stat = admission_statistic(proj.residual_norm_sq, proj.coeff_norm_sq);
    if (stat >= epsilon) {
      b.retained.push_back(psi);
      b.retained_components.push_back(idx);
      b.orthonormal.push_back(proj.residual.normalized());
    } else {
      b.discarded.push_back({idx, psi, stat});
    }
  }
  return b;
}

// ---------------------------------------------------------------------------
// Operator basis

/// One prepared state: anchor `base`, optionally dressed by a theta-phase
/// reflection about anchor `dress` (or about a bridge between the two).
struct PrepDescriptor {
  std::size_t base = 0;
  std::optional<std::size_t> dress;
  bool bridged = false;

  bool operator==(const PrepDescriptor&) const = default;
};

struct OperatorBasis {
  std::vector<StateVector> anchors;
  std::vector<PrepDescriptor> preps;
  std::vector<StateVector> states;  ///< the prepared pure states, one per descriptor
  double theta_basis = kDefaultTheta;

  std::size_t size() const noexcept { return preps.size(); }
};

inline bool is_multiple_of_pi(double theta, double tol = kThetaTolerance) {
  const double r = std::remainder(theta, pi);
  return std::abs(r) <= tol;
}

/// Builds the d anchors plus d^2 - d dressed states G_t(theta)|psi_s>, with
/// G_t(theta) = I - (1 - e^{i theta})|a><a|, a = psi_t. Near-orthogonal
/// pairs use the bridge axis a = normalize(psi_s + c psi_t), c = 1 for s < t
/// and c = i for s > t. No validation of theta: theta = pi is allowed here
/// so that its degeneracy can be inspected.
inline OperatorBasis build_operator_basis(std::span<const StateVector> anchors, double theta) {
  if (!std::isfinite(theta)) throw std::invalid_argument("theta must be finite");
  OperatorBasis ob;
  ob.anchors.assign(anchors.begin(), anchors.end());
  ob.theta_basis = theta;
  const std::size_t d = anchors.size();
  for (std::size_t s = 0; s < d; ++s) {
    ob.preps.push_back({s, std::nullopt, false});
    ob.states.push_back(anchors[s]);
  }
  const ComplexAmplitude i_unit{0.0, 1.0};
  for (std::size_t s = 0; s < d; ++s) {
    for (std::size_t t = 0; t < d; ++t) {
      if (s == t) continue;
      const bool bridged = std::abs(overlap(anchors[s], anchors[t])) < kBridgeOverlap;
      StateVector axis = anchors[t];
      if (bridged) {
        const ComplexAmplitude c = s < t ? ComplexAmplitude{1.0} : i_unit;
        axis = anchors[s].plus_scaled(c, anchors[t]).normalized();
      }
      ob.preps.push_back({s, t, bridged});
      ob.states.push_back(apply_reflection(Reflection{std::move(axis), theta}, anchors[s]));
    }
  }
  return ob;
}

/// Validated form: theta must stay away from integer multiples of pi.
inline OperatorBasis extend_operator_basis(std::span<const StateVector> anchors, double theta) {
  if (is_multiple_of_pi(theta))
    throw std::invalid_argument("theta_basis must not be an integer multiple of pi");
  return build_operator_basis(anchors, theta);
}

inline OperatorBasis extend_operator_basis(const SubspaceBasis& b, double theta) {
  return extend_operator_basis(std::span<const StateVector>(b.retained), theta);
}

// ---------------------------------------------------------------------------
// Measurement

struct Measurement {
  enum class Kind { kExact, kShots, kGaussian };
  Kind kind = Kind::kExact;
  std::uint64_t shots = 0;
  double sigma = 0.0;

  static Measurement exact() { return {}; }
  static Measurement with_shots(std::uint64_t n) { return {Kind::kShots, n, 0.0}; }
  static Measurement gaussian(double sigma) { return {Kind::kGaussian, 0, sigma}; }

  bool noisy() const noexcept {
    return kind == Kind::kShots || (kind == Kind::kGaussian && sigma > 0.0);
  }
};

/// p_rs = |<chi_r|G_q|chi_s>|^2 and g_rs = |<chi_r|chi_s>|^2.
struct GstMatrices {
  Eigen::MatrixXd p_mat;
  Eigen::MatrixXd g_mat;
  Measurement measurement;
};

namespace detail {

inline double measure_entry(double exact, const Measurement& m, Rng& rng) {
  switch (m.kind) {
    case Measurement::Kind::kExact:
      return exact;
    case Measurement::Kind::kShots: {
      const double p = std::min(1.0, std::max(0.0, exact));
      std::binomial_distribution<std::uint64_t> draw(m.shots, p);
      return static_cast<double>(draw(rng)) / static_cast<double>(m.shots);
    }
    case Measurement::Kind::kGaussian:
      return perturb_entry(exact, m.sigma, rng);
  }
  return exact;
}

}  // namespace detail

/// Exact Hilbert-Schmidt Gram matrix of the prepared states.
inline Eigen::MatrixXd gram_matrix(const OperatorBasis& ob) {
  const auto n = static_cast<Eigen::Index>(ob.size());
  Eigen::MatrixXd g(n, n);
  for (Eigen::Index r = 0; r < n; ++r) {
    g(r, r) = 1.0;
    for (Eigen::Index s = r + 1; s < n; ++s)
      g(r, s) = g(s, r) = std::norm(overlap(ob.states[r], ob.states[s]));
  }
  return g;
}

/// Measures p and g for `q` on the prepared states. Each unordered pair of g
/// is measured once and mirrored; the diagonal of g is exactly 1.
inline GstMatrices measure_matrices(const EnsembleSpec& e, const Combination& q,
                                    const OperatorBasis& ob, const Measurement& meas, Rng& rng) {
  if (meas.kind == Measurement::Kind::kShots && meas.shots < 1)
    throw std::invalid_argument("shot count must be >= 1");
  const auto layers = circuit_layers(e, q);
  const auto n = static_cast<Eigen::Index>(ob.size());
  std::vector<StateVector> images;
  images.reserve(ob.size());
  for (const auto& chi : ob.states) images.push_back(apply_reflections(layers, chi));

  GstMatrices mx;
  mx.measurement = meas;
  mx.p_mat.resize(n, n);
  for (Eigen::Index r = 0; r < n; ++r)
    for (Eigen::Index s = 0; s < n; ++s)
      mx.p_mat(r, s) =
          detail::measure_entry(std::norm(overlap(ob.states[r], images[s])), meas, rng);
  mx.g_mat = gram_matrix(ob);
  if (meas.noisy()) {
    for (Eigen::Index r = 0; r < n; ++r)
      for (Eigen::Index s = r + 1; s < n; ++s)
        mx.g_mat(r, s) = mx.g_mat(s, r) = detail::measure_entry(mx.g_mat(r, s), meas, rng);
  }
  return mx;
}

inline double min_eigenvalue(const Eigen::MatrixXd& g) {
  if (g.size() == 0) return 0.0;
  const Eigen::MatrixXd sym = 0.5 * (g + g.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sym, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

struct SolveOptions {
  double conditioning_floor = kConditioningFloor;
  bool allow_pseudo_inverse = false;
};

/// Tr{g^{-1} p} through an LDL^T solve; g is never inverted. Below the
/// conditioning floor this throws unless the pseudo-inverse fallback is on.
inline double ptm_trace(const GstMatrices& mx, const SolveOptions& opt = {}) {
  if (mx.g_mat.rows() != mx.g_mat.cols() || mx.p_mat.rows() != mx.g_mat.rows() ||
      mx.p_mat.cols() != mx.g_mat.cols())
    throw std::invalid_argument("p and g must be square and of equal size");
  if (mx.g_mat.size() == 0) return 0.0;
  const double lo = min_eigenvalue(mx.g_mat);
  if (lo < opt.conditioning_floor) {
    if (!opt.allow_pseudo_inverse) throw IllConditionedGramError(lo, opt.conditioning_floor);
    Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(mx.g_mat);
    return cod.solve(mx.p_mat).trace();
  }
  return mx.g_mat.ldlt().solve(mx.p_mat).trace();
}

// ---------------------------------------------------------------------------
// Augmentation and per-word trace

/// A unit vector orthogonal to every circuit state of `q` (truncated ones
/// included), so that G_q|phi> = |phi> exactly. Deterministic: the uniform
/// superposition is projected first, then computational basis states in
/// index order.
inline StateVector augmentation_state(const EnsembleSpec& e, const Combination& q) {
  std::vector<StateVector> ortho;
  std::vector<bool> seen(e.size(), false);
  const double same_state_residual = std::sqrt(1.0 - kSameStateOverlap * kSameStateOverlap);
  for (auto idx : q.indices) {
    if (seen[idx]) continue;
    seen[idx] = true;
    auto proj = project_out(ortho, e.state(idx));
    if (std::sqrt(proj.residual_norm_sq) > same_state_residual)
      ortho.push_back(proj.residual.normalized());
  }
  if (ortho.size() >= e.dim())
    throw DegenerateAugmentationError("circuit states span the full Hilbert space; no |phi> exists");

  const double amp = 1.0 / std::sqrt(static_cast<double>(e.dim()));
  StateVector probe(e.qubits(), std::vector<ComplexAmplitude>(e.dim(), amp), e.qubits());
  auto proj = project_out(ortho, probe);
  if (std::sqrt(proj.residual_norm_sq) >= kProbeFloor) return proj.residual.normalized();
  for (std::size_t i = 0; i < e.dim(); ++i) {
    auto p = project_out(ortho, StateVector::basis_state(e.qubits(), i));
    if (std::sqrt(p.residual_norm_sq) >= kProbeFloor) return p.residual.normalized();
  }
  throw DegenerateAugmentationError("no probe state leaves the circuit span");
}

struct AugmentedTraces {
  double tr_Rw = 0.0;            ///< estimates |Tr w|^2
  double tr_Rw_augmented = 0.0;  ///< estimates |Tr w + 1|^2
};

inline AugmentedTraces augment_and_trace(const EnsembleSpec& e, const Combination& q,
                                         const SubspaceBasis& b, double theta,
                                         const Measurement& meas, Rng& rng,
                                         const SolveOptions& solve = {}) {
  AugmentedTraces out;
  const auto ob = extend_operator_basis(b, theta);
  out.tr_Rw = ptm_trace(measure_matrices(e, q, ob, meas, rng), solve);

  std::vector<StateVector> anchors = b.retained;
  anchors.push_back(augmentation_state(e, q));
  const auto ob_aug = extend_operator_basis(anchors, theta);
  out.tr_Rw_augmented = ptm_trace(measure_matrices(e, q, ob_aug, meas, rng), solve);
  return out;
}

struct CombinationTrace {
  std::size_t d = 0;
  double tr_Rw = 0.0;
  double tr_Rw_augmented = 0.0;
  double re_tr_w = 0.0;
  double value = 0.0;  ///< 2^n - d + re_tr_w
  bool truncated = false;
};

struct GstOptions {
  double epsilon = kDefaultEpsilon;
  double theta = kDefaultTheta;
  Measurement measurement;
  SolveOptions solve;
};

/// Re[Tr{G_q}] = 2^n - d + (Tr{R_w'} - Tr{R_w} - 1)/2.
inline CombinationTrace combination_trace(const EnsembleSpec& e, const Combination& q,
                                          const GstOptions& opt, Rng& rng) {
  CombinationTrace ct;
  const double full = static_cast<double>(e.dim());
  if (q.length() == 0) {
    ct.value = full;
    return ct;
  }
  const auto b = build_subspace(e, q, opt.epsilon);
  const auto tr = augment_and_trace(e, q, b, opt.theta, opt.measurement, rng, opt.solve);
  ct.d = b.d();
  ct.tr_Rw = tr.tr_Rw;
  ct.tr_Rw_augmented = tr.tr_Rw_augmented;
  ct.re_tr_w = 0.5 * (tr.tr_Rw_augmented - tr.tr_Rw - 1.0);
  ct.value = full - static_cast<double>(ct.d) + ct.re_tr_w;
  ct.truncated = b.truncated();
  return ct;
}

// ---------------------------------------------------------------------------
// Estimators

enum class Strategy { kEnumerate, kMonteCarlo };

struct EstimatorOptions {
  Strategy strategy = Strategy::kEnumerate;
  std::uint64_t budget = 10'000;  ///< sampled words per Tr{G^k} (Monte Carlo)
  std::uint64_t enumeration_cap = ht::kDefaultEnumerationCap;
  GstOptions gst;
  std::uint64_t seed = 0;
  unsigned threads = 0;
};

inline constexpr std::size_t kWordBlock = 16;

inline Combination word_from_index(const EnsembleSpec& e, int k, std::uint64_t w) {
  std::vector<std::size_t> idx(static_cast<std::size_t>(k));
  for (int t = k - 1; t >= 0; --t) {
    idx[static_cast<std::size_t>(t)] = static_cast<std::size_t>(w % e.size());
    w /= e.size();
  }
  return Combination::from_indices(e, std::move(idx));
}

inline EstimateMode mode_for(Strategy s, const Measurement& m) {
  if (s == Strategy::kEnumerate)
    return m.noisy() ? EstimateMode::kEnumerationNoisy : EstimateMode::kExactEnumeration;
  return m.noisy() ? EstimateMode::kMcShots : EstimateMode::kMcExactProb;
}

/// Tr{G^k} = sum_q P_q Tr{G_q}, by exhaustive enumeration of the alpha^k
/// words or by sampling `budget` words. Word w uses stream (seed, w).
inline TraceEstimate estimate_g_power_trace(const EnsembleSpec& e, int k,
                                            const EstimatorOptions& opt) {
  if (k < 0) throw std::invalid_argument("k must be >= 0");
  TraceEstimate est;
  est.mode = mode_for(opt.strategy, opt.gst.measurement);
  if (k == 0) {
    est.value = static_cast<double>(e.dim());
    est.samples = 1;
    return est;
  }
  const unsigned threads = opt.threads == 0 ? default_thread_count() : opt.threads;

  if (opt.strategy == Strategy::kEnumerate) {
    const double words = std::pow(static_cast<double>(e.size()), k);
    if (words > static_cast<double>(opt.enumeration_cap))
      throw ResourceLimitError("enumeration needs " + std::to_string(words) +
                                   " words, above enumeration_cap " +
                                   std::to_string(opt.enumeration_cap),
                               "enumeration_cap", static_cast<double>(opt.enumeration_cap));
    const auto count = static_cast<std::size_t>(words);
    auto partial = parallel_blocks<double>(
        count, kWordBlock, threads, [&](std::size_t begin, std::size_t end) {
          double acc = 0.0;
          for (std::size_t w = begin; w < end; ++w) {
            Rng rng = make_stream(opt.seed, w);
            const auto q = word_from_index(e, k, w);
            acc += q.weight * combination_trace(e, q, opt.gst, rng).value;
          }
          return acc;
        });
    for (double v : partial) est.value += v;
    est.samples = count;
    return est;
  }

  if (opt.budget < 1) throw std::invalid_argument("budget must be >= 1");
  auto partial = parallel_blocks<Accumulator>(
      opt.budget, kWordBlock, threads, [&](std::size_t begin, std::size_t end) {
        Accumulator acc;
        for (std::size_t t = begin; t < end; ++t) {
          Rng rng = make_stream(opt.seed, t);
          std::vector<std::size_t> idx;
          idx.reserve(static_cast<std::size_t>(k));
          for (int i = 0; i < k; ++i) idx.push_back(sample_component(e, rng));
          const auto q = Combination::from_indices(e, std::move(idx));
          acc.add(combination_trace(e, q, opt.gst, rng).value);
        }
        return acc;
      });
  Accumulator total;
  for (const auto& a : partial) total.merge(a);
  est.value = total.mean();
  est.std_error = total.std_error();
  est.samples = total.count;
  return est;
}

/// Tr{rho^m} = 2^{-m} sum_k C(m,k) (-1)^k Tr{G^k}. Each k draws from its own
/// seed, so the per-k estimates are independent.
inline TraceEstimate estimate_power_trace(const EnsembleSpec& e, int m, const EstimatorOptions& opt) {
  if (m < 1) throw std::invalid_argument("m must be >= 1");
  TraceEstimate est;
  double var = 0.0;
  const double scale = std::ldexp(1.0, -m);
  for (int k = 0; k <= m; ++k) {
    EstimatorOptions sub = opt;
    sub.seed = derive_seed(opt.seed, static_cast<std::uint64_t>(k));
    const auto gk = estimate_g_power_trace(e, k, sub);
    const double c = scale * ht::binomial_coefficient(m, k) * ht::layer_sign(static_cast<std::size_t>(k));
    est.value += c * gk.value;
    var += c * c * gk.std_error * gk.std_error;
    est.samples += gk.samples;
    est.mode = gk.mode;
  }
  est.std_error = std::sqrt(var);
  return est;
}

}  // namespace qtrace::gst
