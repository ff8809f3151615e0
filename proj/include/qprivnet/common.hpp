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

#include <cstdint>
#include <stdexcept>
#include <string>

namespace qpn {

// Error category; mirrors the C-API status codes one-to-one.
enum class Status : int {
  Ok = 0,
  Invalid = 1,    // malformed argument or unusable input value
  Config = 2,     // configuration file or run-setup problem
  Invariant = 3,  // a numerical or structural invariant failed
  Budget = 4,     // a configured resource limit was exhausted
  Io = 5,         // file read/write failure
  Internal = 6,   // unexpected internal condition
};

struct Error : std::runtime_error {
  Status status;
  Error(Status s, const std::string& msg) : std::runtime_error(msg), status(s) {}
};

[[noreturn]] inline void fail(Status s, const std::string& msg) { throw Error(s, msg); }

// Every tolerance used by the engine, in one place. The defaults are part of
// the operation contracts; tests pin against these exact values.
struct Tolerances {
  double hermiticity = 1e-9;       // max |M - M^dagger| entry
  double trace_one = 1e-9;         // |Tr(rho) - 1|
  double psd = -1e-10;             // smallest admissible eigenvalue of a state
  double psd_metric_input = -1e-8; // rejection threshold inside metric routines
  double rank_cutoff = 1e-12;      // eigenvalues below this count as zero
  double sld_offsupport = 1e-8;    // kernel-kernel residual that flags a rank change
  double completeness = 1e-9;      // |sum K^dagger K - I|
  double projector = 1e-9;         // idempotence / resolution of identity
  double prob_sum = 1e-9;          // measurement branch probabilities vs 1
  double unit_vector = 1e-12;      // | ||a|| - 1 |
  double channel_identity = 1e-9;  // Lambda(0) vs identity
  double qfim_symmetry = 1e-8;     // QFIM symmetrization slack
  double qfim_psd = -1e-8;         // QFIM eigenvalue floor
  double basis_orthogonality = 1e-10;
  double kfit = 1e-10;             // ternary-search convergence for the alignment fit
  double search_refine = 1e-6;     // golden-section convergence for class search
  double relation = 1e-9;          // slack when comparing measured values to bounds

  static const Tolerances& global();
};

inline const Tolerances& Tolerances::global() {
  static const Tolerances t{};
  return t;
}

// Hard resource ceilings; exceeding one raises Status::Budget (searches) or
// Status::Invalid (structural limits, such as the dimension cap).
struct Limits {
  int max_dim = 4096;          // largest operator dimension (2^12)
  int max_parties = 12;        // qubit registers at protocol level
  int max_branches = 1 << 16;  // branch enumeration ceiling
  int desk_scale_n = 4;        // party count for exhaustive audits

  static const Limits& global();
};

inline const Limits& Limits::global() {
  static const Limits l{};
  return l;
}

// Shortest-width decimal with 17 significant digits; locale-independent.
// All persisted numbers go through this so identical runs produce identical
// bytes.
std::string format_double(double v);

}  // namespace qpn
