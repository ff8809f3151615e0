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
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "qprivnet/metrology.hpp"
#include "qprivnet/rng.hpp"

// Executable protocol machinery: resources, protocol converters, filters and
// simulators, wired into composed systems that produce message transcripts
// and the quantum registers an adversary would hold.
//
// Party labels are 1..n and double as register labels of the resource state.
// A composed run is strictly sequential; the behavior state machines define a
// total message order, reproduced verbatim in the transcript.
namespace qpn::acproto {

using metrology::EncodingFamily;
using qcore::DensityMatrix;
using qcore::Matrix;

// Split of the n parties into an honest set and a dishonest set. Dishonest
// interfaces are driven directly by the environment.
struct PartyPartition {
  int n = 0;
  std::vector<int> honest;     // ascending labels
  std::vector<int> dishonest;  // ascending labels

  static PartyPartition make(int n, std::vector<int> dishonest);
  bool is_honest(int party) const;
};

// Resource behaviors. Mean resources pin the protocol dynamics (phase gate
// diag(1, e^{i theta}), X-basis readout, XOR combiner); general resources
// take the dynamics from the encoding family (local channels, computational
// readout, the family's combiner).
enum class ResourceKind { IdealMean, ConcreteR, IdealGeneral, ConcreteGeneral };

// Per-interface converter behaviors. SimDishonest instances act as one
// monolithic simulator across all dishonest interfaces.
enum class ConverterKind { None, HonestPi, FilterDiamond, SimHonest, SimDishonest };

struct SystemSpec {
  ResourceKind resource = ResourceKind::ConcreteR;
  std::vector<ConverterKind> converters;  // index mu-1 guards party mu
};

// Standard wirings.
SystemSpec honest_concrete(const PartyPartition& p, bool mean);  // HonestPi on H, D open
SystemSpec simulated_ideal(const PartyPartition& p, bool mean);  // SimHonest on H, SimDishonest on D
SystemSpec filtered_ideal(int n);                                // filters everywhere (mean)
SystemSpec bare_ideal(int n, bool mean);                         // no converters

enum class Boundary { Ext, Int };   // Ext: open to the environment; Int: converter/resource seam
enum class Direction { In, Out };   // In: toward the resource; Out: toward the environment
enum class PayloadType { Angle, Bit, Bitstring, Real, QuantumRef };

struct TranscriptMessage {
  int round = 0;  // 0: setup phase; 1..N: protocol rounds; N+1: final outputs
  int party = 0;  // 1..n
  Boundary boundary = Boundary::Ext;
  Direction direction = Direction::In;
  PayloadType type = PayloadType::Bit;
  std::string payload;  // formatted value; quantum payloads read "qreg:<id>"
  int qreg = -1;        // registry index for quantum payloads
};

// Conditional joint state held at the open dishonest interfaces after one
// round, with the sampled branch (honest outcome bits, ascending party order)
// that produced it.
struct RoundRegister {
  int round = 0;
  DensityMatrix state;
  std::string branch;
};

struct Transcript {
  int n = 0;
  int rounds = 0;
  std::vector<TranscriptMessage> messages;
  std::vector<Matrix> qregs;                 // matrices referenced by qreg ids
  std::map<int, std::string> final_outputs;  // converter outer outputs, per party
  std::vector<RoundRegister> registers;      // one entry per round when |D| > 0
  bool aborted = false;
  std::string abort_reason;
};

// Canned environment inputs: one angle per angle-taking open interface, and
// per-round bits per open dishonest interface. A bit vector may be empty
// (all zeros), hold one bit (repeated every round), or hold one bit per
// round.
struct FixedInputs {
  std::map<int, double> angles;
  std::map<int, std::vector<int>> bits;
};

// Adaptive environment. The view passed to bit_input holds only messages at
// open interfaces. Implementations must be deterministic functions of their
// arguments (plus any seed they close over) so runs reproduce.
class Strategy {
 public:
  virtual ~Strategy() = default;
  virtual double angle_input(int party, int round) = 0;
  virtual int bit_input(int party, int round, const Transcript& view) = 0;
};

class FixedStrategy : public Strategy {
 public:
  explicit FixedStrategy(FixedInputs inputs) : inputs_(std::move(inputs)) {}
  double angle_input(int party, int round) override;
  int bit_input(int party, int round, const Transcript& view) override;

 private:
  FixedInputs inputs_;
};

struct ComposedSystem {
  SystemSpec spec;
  EncodingFamily enc;
  DensityMatrix rho;
  int rounds = 1;
  std::uint64_t seed = 1;
  PartyPartition partition;  // derived from the converter assignment
};

// Validates the wiring (converter/resource compatibility, register arity)
// and freezes the run configuration. Identical configuration and seed give
// identical runs.
ComposedSystem build_system(const SystemSpec& spec, const EncodingFamily& enc,
                            const DensityMatrix& rho, int rounds, std::uint64_t seed);

struct ExecuteOptions {
  // Summary mode (false) skips the per-message log and register snapshots in
  // favor of final outputs only; intended for large round counts.
  bool record_messages = true;
  std::optional<std::uint64_t> seed;  // overrides the system seed
};

// Runs the composed system against the environment. Random tapes derive from
// the seed by labeled splitting, one stream per behavior instance ("measure"
// for resource readout, "simdis" for the dishonest simulator, "filter" for
// the filter collective, which shares one stream so every interface reports
// the same bitstring). An out-of-domain environment payload aborts the run;
// the truncated transcript records the reason.
Transcript execute(const ComposedSystem& sys, Strategy& env, const ExecuteOptions& opt = {});
Transcript execute(const ComposedSystem& sys, const FixedInputs& inputs,
                   const ExecuteOptions& opt = {});

// The distinguisher's view: messages at open interfaces only.
Transcript observable_view(const Transcript& t);

// One classical branch of the open-interface output: the canonical classical
// record, its probability, and the joint state at the open dishonest
// interfaces (absent when every interface is converted).
struct CqBranch {
  std::string label;
  double probability = 0.0;
  std::optional<DensityMatrix> state;
};
struct CqEnsemble {
  std::vector<CqBranch> branches;  // sorted by label
};

// Exact classical-quantum output ensemble by branch enumeration over honest
// outcomes and internal tapes. Defined for single-round systems; enumeration
// beyond the branch ceiling raises a budget error.
CqEnsemble cq_output(const ComposedSystem& sys, const FixedInputs& inputs, int round = 1);

struct ValidationReport {
  std::vector<std::string> violations;
  bool ok() const { return violations.empty(); }
};

// Conformance check of a fully recorded transcript against the behavior
// automata: message order and counts, payload domains, broadcast agreement
// across interfaces, and combiner consistency of the reported bitstrings.
// Reports violations; never throws.
ValidationReport validate_transcript(const Transcript& t, const ComposedSystem& sys);

// One message per line: `round, interface, direction, payload_type, payload`
// after '#' header lines; interfaces print as ext.<party> / int.<party>.
std::string transcript_to_text(const Transcript& t);
// Writes the text form, plus one qcore matrix file "<path>.q<id>" per
// referenced quantum register.
void save_transcript(const std::string& path, const Transcript& t);

}  // namespace qpn::acproto
