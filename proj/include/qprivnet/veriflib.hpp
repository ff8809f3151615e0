// Copyright 2026 The qprivnet authors
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

#pragma once

// Composition arithmetic for chaining a state-verification stage with a
// parameter-estimation stage. Pure functions; a result above 1 clamps with
// an explicit warning record since a distinguishing advantage cannot
// exceed 1.
namespace qpn::veriflib {

// Confidence window on resource quality: fidelity at least 1 - lambda with
// probability at least 1 - delta.
struct VerificationGuarantee {
  double lambda = 0.0;
  double delta = 0.0;

  // validates both fields in [0, 1]
  static VerificationGuarantee make(double lambda, double delta);
};

// Distinguishing-advantage level. Values above 1 clamp with the warning
// flag set; negative or non-finite values are rejected.
struct SecurityLevel {
  double epsilon = 0.0;
  bool clamped = false;

  static SecurityLevel make(double epsilon);
};

struct ComposedLevel {
  SecurityLevel total;        // (1 - delta)(epsilon + sqrt(lambda)) + delta
  SecurityLevel conditional;  // epsilon + sqrt(lambda), given verification passed
};

// Security of estimation run on a verified resource: the conditional level
// epsilon + sqrt(lambda) degrades to the unconditional total
// (1 - delta)(epsilon + sqrt(lambda)) + delta. Monotone nondecreasing in
// each argument; exact at epsilon for a perfect guarantee.
ComposedLevel verified_epsilon(const SecurityLevel& eps, const VerificationGuarantee& g);

// Security of two composed stages: the levels add, clamped to 1.
SecurityLevel sequential_epsilon(const SecurityLevel& e1, const SecurityLevel& e2);

}  // namespace qpn::veriflib
