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
#include <functional>
#include <string>
#include <vector>

#include "qprivnet/acproto.hpp"

// Distinguishing-advantage experiments: exact advantage between composed
// systems by branch enumeration, Monte-Carlo advantage with confidence
// intervals, and audits that compare measured leakage against every
// computed bound. Audits report orderings; they never assert them.
namespace qpn::harness {

using acproto::ComposedSystem;
using acproto::CqEnsemble;
using acproto::FixedInputs;
using acproto::PartyPartition;
using acproto::Transcript;
using metrology::EncodingFamily;
using metrology::SearchBudget;
using qcore::DensityMatrix;

// Optimal distinguishing advantage between two classical-quantum output
// ensembles: 1/2 sum over the label union of ||p_A rho_A - p_B rho_B||_1,
// treating distinct classical records as orthogonal flags. classical_only
// discards the quantum payloads, which can only shrink the value.
double ensemble_distance(const CqEnsemble& a, const CqEnsemble& b, bool classical_only = false);

// Environment for hypothesis testing. Input callbacks mirror a protocol
// strategy; decide() maps the observable transcript to a guess. The rng
// passed to decide supports sampled measurements of held registers; a
// decision must be a deterministic function of (view, rng draws).
class Distinguisher {
 public:
  virtual ~Distinguisher() = default;
  virtual double angle_input(int party, int round) = 0;
  virtual int bit_input(int party, int round, const Transcript& view) = 0;
  virtual char decide(const Transcript& view, Rng& rng) = 0;  // 'A' or 'B'
};

// Closure-backed distinguisher for inline definitions.
class CallbackDistinguisher : public Distinguisher {
 public:
  std::function<double(int, int)> on_angle = [](int, int) { return 0.0; };
  std::function<int(int, int, const Transcript&)> on_bit = [](int, int, const Transcript&) {
    return 0;
  };
  std::function<char(const Transcript&, Rng&)> on_decide;

  double angle_input(int party, int round) override { return on_angle(party, round); }
  int bit_input(int party, int round, const Transcript& view) override {
    return on_bit(party, round, view);
  }
  char decide(const Transcript& view, Rng& rng) override { return on_decide(view, rng); }
};

enum class EstimateMode { Exact, Empirical };

struct AdvantageEstimate {
  double d_hat = 0.0;    // advantage |2p - 1| at uniform prior
  double ci_low = 0.0;   // two-sided 99% interval; zero width in exact mode
  double ci_high = 0.0;
  long trials = 0;
  long correct = 0;
  EstimateMode mode = EstimateMode::Exact;
};

// Exact advantage of the best distinguisher at fixed inputs, by full
// enumeration of both single-round output ensembles.
AdvantageEstimate exact_advantage(const ComposedSystem& sys_a, const ComposedSystem& sys_b,
                                  const FixedInputs& inputs, bool classical_only = false);

struct EstimateOptions {
  long trials = 100000;
  std::uint64_t seed = 1;
  bool clopper_pearson = false;  // exact binomial interval instead of Hoeffding
};

// Monte-Carlo advantage: per trial a uniform secret label selects the
// system, the distinguisher drives one run and guesses. Trials derive
// independent seeds from the estimate seed; a payload violation aborts the
// trial and scores as an incorrect guess.
AdvantageEstimate estimate_advantage(const ComposedSystem& sys_a, const ComposedSystem& sys_b,
                                     Distinguisher& env, const EstimateOptions& opt = {});

struct BoundRelation {
  std::string name;
  double lhs = 0.0;
  double rhs = 0.0;
  bool holds = false;  // lhs <= rhs within the relation tolerance
};

struct BoundAudit {
  double measured = 0.0;        // maximal state distance over an equivalent class
  double advantage = 0.0;       // exact protocol-vs-simulation advantage at the maximizer
  double simulation_bound = 0.0;  // leakage certified by the simulator construction
  double privacy_bound = 0.0;     // sqrt(1 - P^2) from the QFIM
  double alignment_bound = 0.0;        // n eps* / Tr(Q), finite-displacement form
  double alignment_bound_chain = 0.0;  // conservative chained variant
  metrology::ClassDistanceResult search;
  metrology::PrivacyReport privacy;
  std::vector<BoundRelation> relations;
  bool budget_exhausted = false;
};

// Numerical audit of one (state, encoding, partition) configuration: runs
// the equivalent-class distance search, evaluates the exact advantage of
// protocol versus simulation at the search maximizer, computes the
// QFIM-side bounds at zero parameters, and records every ordering relation
// with a pass flag. A recorded violation is a result, not an error.
BoundAudit audit(const DensityMatrix& rho, const EncodingFamily& enc,
                 const PartyPartition& partition, const SearchBudget& budget = {});

// One text record per audit, stable field order, machine-parseable
// key=value lines.
std::string audit_to_text(const BoundAudit& a);

}  // namespace qpn::harness
