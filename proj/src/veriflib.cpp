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

#include "qprivnet/veriflib.hpp"

#include <cmath>
#include <string>

#include "qprivnet/common.hpp"

namespace qpn::veriflib {

namespace {

void check_unit_range(double v, const char* name) {
  if (!std::isfinite(v) || v < 0.0 || v > 1.0)
    fail(Status::Invalid, std::string(name) + " must lie in [0, 1]");
}

}  // namespace

VerificationGuarantee VerificationGuarantee::make(double lambda, double delta) {
  check_unit_range(lambda, "lambda");
  check_unit_range(delta, "delta");
  return {lambda, delta};
}

SecurityLevel SecurityLevel::make(double epsilon) {
  if (!std::isfinite(epsilon) || epsilon < 0.0)
    fail(Status::Invalid, "security level must be a finite nonnegative real");
  SecurityLevel s;
  s.clamped = epsilon > 1.0;
  s.epsilon = s.clamped ? 1.0 : epsilon;
  return s;
}

ComposedLevel verified_epsilon(const SecurityLevel& eps, const VerificationGuarantee& g) {
  check_unit_range(eps.epsilon, "epsilon");
  check_unit_range(g.lambda, "lambda");
  check_unit_range(g.delta, "delta");
  const double conditional = eps.epsilon + std::sqrt(g.lambda);
  const double total = (1.0 - g.delta) * conditional + g.delta;
  return {SecurityLevel::make(total), SecurityLevel::make(conditional)};
}

SecurityLevel sequential_epsilon(const SecurityLevel& e1, const SecurityLevel& e2) {
  check_unit_range(e1.epsilon, "epsilon");
  check_unit_range(e2.epsilon, "epsilon");
  return SecurityLevel::make(e1.epsilon + e2.epsilon);
}

}  // namespace qpn::veriflib
