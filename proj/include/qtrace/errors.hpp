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

#include <stdexcept>
#include <string>

namespace qtrace {

/// Raised when an enumeration or dimension exceeds a configured cap.
class ResourceLimitError : public std::runtime_error {
 public:
  ResourceLimitError(const std::string& what, std::string cap_name, double cap)
      : std::runtime_error(what), cap_name_(std::move(cap_name)), cap_(cap) {}

  const std::string& cap_name() const noexcept { return cap_name_; }
  double cap() const noexcept { return cap_; }

 private:
  std::string cap_name_;
  double cap_;
};

/// Base for failures of the numerical pipeline (as opposed to bad input).
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
  virtual const char* kind() const noexcept = 0;
};

/// The operator-basis Gram matrix is too close to singular to solve against.
class IllConditionedGramError : public NumericalError {
 public:
  IllConditionedGramError(double min_eigenvalue, double floor)
      : NumericalError("ill-conditioned Gram matrix: min eigenvalue " +
                       std::to_string(min_eigenvalue) + " below floor " +
                       std::to_string(floor)),
        min_eigenvalue_(min_eigenvalue),
        floor_(floor) {}

  const char* kind() const noexcept override { return "ill-conditioned-gram"; }
  double min_eigenvalue() const noexcept { return min_eigenvalue_; }
  double floor() const noexcept { return floor_; }

 private:
  double min_eigenvalue_;
  double floor_;
};

/// No state outside the circuit span exists (the circuit states span C^{2^n}).
class DegenerateAugmentationError : public NumericalError {
 public:
  explicit DegenerateAugmentationError(const std::string& what)
      : NumericalError(what) {}
  const char* kind() const noexcept override {
    return "degenerate-augmentation";
  }
};

/// An error-bound denominator is non-positive.
class DivergentBoundError : public NumericalError {
 public:
  explicit DivergentBoundError(const std::string& what) : NumericalError(what) {}
  const char* kind() const noexcept override { return "divergent-bound"; }
};

}  // namespace qtrace
