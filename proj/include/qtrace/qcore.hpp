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

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace qtrace {

using ComplexAmplitude = std::complex<double>;
using Matrix2 = Eigen::Matrix2cd;

inline constexpr int kDefaultMaxQubits = 20;
inline constexpr double kNormTolerance = 1e-10;
inline constexpr double kUnitarityTolerance = 1e-12;

inline constexpr double pi = std::numbers::pi;

/// Euler-style angles of the single-qubit gate U(theta, phi, lambda), in
/// radians. Values are stored as given, without reduction modulo 2*pi.
struct RotationParams {
  double theta = 0.0;
  double phi = 0.0;
  double lambda = 0.0;

  bool finite() const noexcept {
    return std::isfinite(theta) && std::isfinite(phi) && std::isfinite(lambda);
  }
  /// Angles given in units of pi, as in tabulated gate parameters.
  static RotationParams in_pi_units(double theta, double phi, double lambda) {
    return {theta * pi, phi * pi, lambda * pi};
  }
};

/// U(theta, phi, lambda) =
///   [[cos(theta/2),              -e^{i lambda} sin(theta/2)],
///    [e^{i phi} sin(theta/2),     e^{i(lambda+phi)} cos(theta/2)]]
inline Matrix2 make_single_qubit_gate(const RotationParams& p) {
  if (!p.finite()) throw std::invalid_argument("rotation parameters must be finite");
  const double c = std::cos(p.theta / 2.0);
  const double s = std::sin(p.theta / 2.0);
  const ComplexAmplitude e_lambda = std::polar(1.0, p.lambda);
  const ComplexAmplitude e_phi = std::polar(1.0, p.phi);
  Matrix2 u;
  u(0, 0) = c;
  u(0, 1) = -e_lambda * s;
  u(1, 0) = e_phi * s;
  u(1, 1) = e_lambda * e_phi * c;
  return u;
}

/// Dense pure state of n qubits; amplitude index bit (n-1-j) belongs to qubit j.
class StateVector {
 public:
  StateVector() = default;

  /// |0...0> on n qubits.
  explicit StateVector(int n, int max_qubits = kDefaultMaxQubits) : n_(n) {
    check_qubits(n, max_qubits);
    amps_.assign(std::size_t{1} << n, ComplexAmplitude{});
    amps_[0] = 1.0;
  }

  StateVector(int n, std::vector<ComplexAmplitude> amplitudes,
              int max_qubits = kDefaultMaxQubits)
      : n_(n), amps_(std::move(amplitudes)) {
    check_qubits(n, max_qubits);
    if (amps_.size() != (std::size_t{1} << n))
      throw std::invalid_argument("amplitude count must be 2^n");
    for (const auto& a : amps_)
      if (!std::isfinite(a.real()) || !std::isfinite(a.imag()))
        throw std::invalid_argument("amplitudes must be finite");
  }

  static StateVector basis_state(int n, std::size_t index) {
    StateVector s(n);
    if (index >= s.dim()) throw std::invalid_argument("basis index out of range");
    s.amps_[0] = 0.0;
    s.amps_[index] = 1.0;
    return s;
  }

  int qubits() const noexcept { return n_; }
  std::size_t dim() const noexcept { return amps_.size(); }
  std::span<const ComplexAmplitude> amplitudes() const noexcept { return amps_; }
  const ComplexAmplitude& operator[](std::size_t i) const { return amps_[i]; }

  double norm_squared() const noexcept {
    double acc = 0.0;
    for (const auto& a : amps_) acc += std::norm(a);
    return acc;
  }

  /// Returns this state scaled to unit norm; throws on a zero vector.
  StateVector normalized() const {
    const double nrm = std::sqrt(norm_squared());
    if (!(nrm > 0.0)) throw std::invalid_argument("cannot normalize a zero vector");
    StateVector out = *this;
    for (auto& a : out.amps_) a /= nrm;
    return out;
  }

  /// this + c * other, the one mutation-free axpy every update builds on.
  StateVector plus_scaled(ComplexAmplitude c, const StateVector& other) const {
    require_same_qubits(other);
    StateVector out = *this;
    for (std::size_t i = 0; i < amps_.size(); ++i) out.amps_[i] += c * other.amps_[i];
    return out;
  }

  void require_same_qubits(const StateVector& other) const {
    if (other.n_ != n_)
      throw std::invalid_argument("state dimension mismatch: " + std::to_string(n_) +
                                  " vs " + std::to_string(other.n_) + " qubits");
  }

 private:
  static void check_qubits(int n, int max_qubits) {
    if (n < 1) throw std::invalid_argument("qubit count must be >= 1");
    if (n > max_qubits)
      throw std::invalid_argument("qubit count " + std::to_string(n) +
                                  " exceeds the configured cap of " +
                                  std::to_string(max_qubits));
  }

  int n_ = 0;
  std::vector<ComplexAmplitude> amps_;
};

/// <a|b>; conjugate-linear in `a`.
inline ComplexAmplitude overlap(const StateVector& a, const StateVector& b) {
  a.require_same_qubits(b);
  ComplexAmplitude acc{};
  const auto x = a.amplitudes();
  const auto y = b.amplitudes();
  for (std::size_t i = 0; i < x.size(); ++i) acc += std::conj(x[i]) * y[i];
  return acc;
}

/// u_1 (x) u_2 (x) ... (x) u_n with one factor per qubit.
struct ProductGate {
  std::vector<RotationParams> factors;

  int qubits() const noexcept { return static_cast<int>(factors.size()); }

  /// The same single-qubit gate on every qubit.
  static ProductGate uniform(int n, const RotationParams& p) {
    if (n < 1) throw std::invalid_argument("qubit count must be >= 1");
    return ProductGate{std::vector<RotationParams>(static_cast<std::size_t>(n), p)};
  }
  static ProductGate identity(int n) { return uniform(n, RotationParams{}); }
};

/// U|0...0>. Only column 0 of each factor contributes, so the state is the
/// tensor product of those columns.
inline StateVector prepare_state(const ProductGate& g, int max_qubits = kDefaultMaxQubits) {
  const int n = g.qubits();
  StateVector zero(n, max_qubits);
  std::vector<ComplexAmplitude> amps{1.0};
  amps.reserve(zero.dim());
  for (const auto& f : g.factors) {
    const Matrix2 u = make_single_qubit_gate(f);
    std::vector<ComplexAmplitude> next(amps.size() * 2);
    for (std::size_t i = 0; i < amps.size(); ++i) {
      next[2 * i] = amps[i] * u(0, 0);
      next[2 * i + 1] = amps[i] * u(1, 0);
    }
    amps = std::move(next);
  }
  return StateVector(n, std::move(amps), max_qubits);
}

/// R = I - (1 - e^{i phase}) |axis><axis|. phase = pi gives the Grover-type
/// reflection I - 2|axis><axis|.
struct Reflection {
  StateVector axis;
  double phase = pi;

  ComplexAmplitude strength() const { return 1.0 - std::polar(1.0, phase); }
};

/// R|s> as a rank-1 update, O(2^n).
inline StateVector apply_reflection(const Reflection& r, const StateVector& s) {
  r.axis.require_same_qubits(s);
  const ComplexAmplitude c = -r.strength() * overlap(r.axis, s);
  return s.plus_scaled(c, r.axis);
}

/// Applies `layers` in order, first element acting first.
inline StateVector apply_reflections(std::span<const Reflection> layers, StateVector s) {
  for (const auto& r : layers) s = apply_reflection(r, s);
  return s;
}

}  // namespace qtrace
