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
#include "qtrace/qcore.hpp"
#include "qtrace/random.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <cstddef>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

namespace qtrace {

/// Largest qubit count the dense oracle accepts (2^n x 2^n matrices).
inline constexpr int kOracleMaxQubits = 12;
inline constexpr double kProbabilityTolerance = 1e-9;
inline constexpr double kEntropyCutoff = 1e-12;

struct EnsembleComponent {
  double prob = 0.0;
  ProductGate gate;
};

/// rho = sum_i p_i |psi_i><psi_i| with |psi_i> = U_i|0...0>.
///
/// Probabilities are checked to sum to 1 within 1e-9 and then renormalized
/// exactly once here; nothing downstream renormalizes again. The prepared
/// states are cached, so copies are cheap to share between workers.
class EnsembleSpec {
 public:
  EnsembleSpec(int n, std::vector<EnsembleComponent> components,
               int max_qubits = kDefaultMaxQubits)
      : n_(n), components_(std::move(components)) {
    if (n < 1) throw std::invalid_argument("ensemble qubit count must be >= 1");
    if (n > max_qubits)
      throw std::invalid_argument("ensemble qubit count " + std::to_string(n) +
                                  " exceeds the configured cap of " +
                                  std::to_string(max_qubits));
    if (components_.empty()) throw std::invalid_argument("ensemble needs at least one component");
    double total = 0.0;
    for (std::size_t i = 0; i < components_.size(); ++i) {
      const auto& c = components_[i];
      if (!(c.prob > 0.0 && c.prob <= 1.0))
        throw std::invalid_argument("component " + std::to_string(i) +
                                    " probability must lie in (0, 1]");
      if (c.gate.qubits() != n)
        throw std::invalid_argument("component " + std::to_string(i) + " gate acts on " +
                                    std::to_string(c.gate.qubits()) + " qubits, expected " +
                                    std::to_string(n));
      total += c.prob;
    }
    if (std::abs(total - 1.0) > kProbabilityTolerance)
      throw std::invalid_argument("component probabilities sum to " + std::to_string(total) +
                                  ", expected 1");
    states_.reserve(components_.size());
    for (auto& c : components_) {
      c.prob /= total;
      states_.push_back(prepare_state(c.gate, max_qubits));
    }
    cumulative_.resize(components_.size());
    double acc = 0.0;
    for (std::size_t i = 0; i < components_.size(); ++i) {
      acc += components_[i].prob;
      cumulative_[i] = acc;
    }
  }

  int qubits() const noexcept { return n_; }
  std::size_t dim() const noexcept { return std::size_t{1} << n_; }
  std::size_t size() const noexcept { return components_.size(); }
  double prob(std::size_t i) const { return components_.at(i).prob; }
  const ProductGate& gate(std::size_t i) const { return components_.at(i).gate; }
  const StateVector& state(std::size_t i) const { return states_.at(i); }
  const std::vector<EnsembleComponent>& components() const noexcept { return components_; }
  std::span<const double> cumulative() const noexcept { return cumulative_; }

  /// G_i = I - 2|psi_i><psi_i|.
  Reflection reflection(std::size_t i) const { return Reflection{state(i), pi}; }

 private:
  int n_;
  std::vector<EnsembleComponent> components_;
  std::vector<StateVector> states_;
  std::vector<double> cumulative_;
};

/// Draws component i with probability p_i.
inline std::size_t sample_component(const EnsembleSpec& e, Rng& rng) {
  const auto cum = e.cumulative();
  if (cum.size() == 1) return 0;
  const double u = uniform01(rng) * cum.back();
  for (std::size_t i = 0; i < cum.size(); ++i)
    if (u < cum[i]) return i;
  return cum.size() - 1;
}

/// An ordered word q = (q_1, ..., q_k) of component indices with weight
/// P_q = prod_t p_{q_t}. Stands for the product G_{q_1} ... G_{q_k}.
struct Combination {
  std::vector<std::size_t> indices;
  double weight = 1.0;

  std::size_t length() const noexcept { return indices.size(); }

  static Combination from_indices(const EnsembleSpec& e, std::vector<std::size_t> idx) {
    Combination c{std::move(idx), 1.0};
    for (auto i : c.indices) {
      if (i >= e.size()) throw std::invalid_argument("combination index out of range");
      c.weight *= e.prob(i);
    }
    return c;
  }
};

/// The reflections of a word in circuit order: the last letter acts first,
/// matching G_{q_1} ... G_{q_k} |x>.
inline std::vector<Reflection> circuit_layers(const EnsembleSpec& e, const Combination& q) {
  std::vector<Reflection> layers;
  layers.reserve(q.length());
  for (auto it = q.indices.rbegin(); it != q.indices.rend(); ++it)
    layers.push_back(e.reflection(*it));
  return layers;
}

// ---------------------------------------------------------------------------
// Dense oracle. Exists for verification at desk scale only.

using DenseMatrix = Eigen::MatrixXcd;

class DensityMatrix {
 public:
  DensityMatrix(int n, DenseMatrix entries) : n_(n), m_(std::move(entries)) {}
  int qubits() const noexcept { return n_; }
  const DenseMatrix& matrix() const noexcept { return m_; }
  /// I - 2 rho.
  DenseMatrix grover_channel() const {
    return DenseMatrix::Identity(m_.rows(), m_.cols()) - 2.0 * m_;
  }
  Eigen::VectorXd eigenvalues() const {
    Eigen::SelfAdjointEigenSolver<DenseMatrix> es(m_, Eigen::EigenvaluesOnly);
    return es.eigenvalues();
  }

 private:
  int n_;
  DenseMatrix m_;
};

namespace detail {

inline void require_oracle_size(const EnsembleSpec& e) {
  if (e.qubits() > kOracleMaxQubits)
    throw ResourceLimitError("dense oracle is limited to " + std::to_string(kOracleMaxQubits) +
                                 " qubits",
                             "oracle_max_qubits", kOracleMaxQubits);
}

inline Eigen::VectorXcd to_eigen(const StateVector& s) {
  Eigen::VectorXcd v(static_cast<Eigen::Index>(s.dim()));
  for (std::size_t i = 0; i < s.dim(); ++i) v(static_cast<Eigen::Index>(i)) = s[i];
  return v;
}

inline DenseMatrix dense_reflection(const StateVector& axis, double phase) {
  const Eigen::VectorXcd a = to_eigen(axis);
  const auto d = a.size();
  return DenseMatrix::Identity(d, d) - (1.0 - std::polar(1.0, phase)) * (a * a.adjoint());
}

}  // namespace detail

inline DensityMatrix build_density_matrix(const EnsembleSpec& e) {
  detail::require_oracle_size(e);
  const auto d = static_cast<Eigen::Index>(e.dim());
  DenseMatrix rho = DenseMatrix::Zero(d, d);
  for (std::size_t i = 0; i < e.size(); ++i) {
    const Eigen::VectorXcd v = detail::to_eigen(e.state(i));
    rho += e.prob(i) * (v * v.adjoint());
  }
  return DensityMatrix(e.qubits(), std::move(rho));
}

/// Tr{rho^m} by repeated dense multiplication.
inline double exact_power_trace(const EnsembleSpec& e, int m) {
  if (m < 1) throw std::invalid_argument("power must be >= 1");
  const DenseMatrix rho = build_density_matrix(e).matrix();
  DenseMatrix acc = rho;
  for (int i = 1; i < m; ++i) acc = (acc * rho).eval();
  return acc.trace().real();
}

/// Tr{(I - 2 rho)^k} by repeated dense multiplication.
inline double exact_g_power_trace(const EnsembleSpec& e, int k) {
  if (k < 0) throw std::invalid_argument("power must be >= 0");
  const auto rho = build_density_matrix(e);
  if (k == 0) return static_cast<double>(e.dim());
  const DenseMatrix g = rho.grover_channel();
  DenseMatrix acc = g;
  for (int i = 1; i < k; ++i) acc = (acc * g).eval();
  return acc.trace().real();
}

/// Tr{(I - 2 rho)^k} as sum_j (1 - 2 lambda_j)^k.
inline double exact_g_power_trace_spectral(const EnsembleSpec& e, int k) {
  if (k < 0) throw std::invalid_argument("power must be >= 0");
  const Eigen::VectorXd lam = build_density_matrix(e).eigenvalues();
  double acc = 0.0;
  for (Eigen::Index j = 0; j < lam.size(); ++j) acc += std::pow(1.0 - 2.0 * lam(j), k);
  return acc;
}

/// Tr{G_{q_1} ... G_{q_k}}; the empty word gives Tr{I} = 2^n.
inline ComplexAmplitude exact_combination_trace(const EnsembleSpec& e, const Combination& q) {
  detail::require_oracle_size(e);
  const auto d = static_cast<Eigen::Index>(e.dim());
  DenseMatrix acc = DenseMatrix::Identity(d, d);
  for (auto i : q.indices) {
    if (i >= e.size()) throw std::invalid_argument("combination index out of range");
    acc = (acc * detail::dense_reflection(e.state(i), pi)).eval();
  }
  return acc.trace();
}

/// Tr{rho ln rho} over eigenvalues above 1e-12 (natural log).
inline double exact_entropy_trace(const EnsembleSpec& e) {
  const Eigen::VectorXd lam = build_density_matrix(e).eigenvalues();
  double acc = 0.0;
  for (Eigen::Index j = 0; j < lam.size(); ++j)
    if (lam(j) > kEntropyCutoff) acc += lam(j) * std::log(lam(j));
  return acc;
}

}  // namespace qtrace
