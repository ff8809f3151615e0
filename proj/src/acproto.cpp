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

#include "qprivnet/acproto.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

namespace qpn::acproto {

using qcore::Channel;
using qcore::Complex;
using qcore::ProjectiveMeasurement;
using qcore::Vector;

namespace {

constexpr double kTwoPi = 2.0 * M_PI;

double reduce_angle(double x) {
  double r = std::fmod(x, kTwoPi);
  if (r < 0.0) r += kTwoPi;
  // fmod can land exactly on the period for negative inputs
  if (r >= kTwoPi) r = 0.0;
  return r;
}

bool is_mean_resource(ResourceKind r) {
  return r == ResourceKind::IdealMean || r == ResourceKind::ConcreteR;
}

bool is_concrete_resource(ResourceKind r) {
  return r == ResourceKind::ConcreteR || r == ResourceKind::ConcreteGeneral;
}

Channel phase_channel(double theta) {
  Matrix u = Matrix::Zero(2, 2);
  u(0, 0) = 1.0;
  u(1, 1) = std::exp(Complex(0.0, theta));
  return Channel::unitary(u);
}

// Local dynamics at one party: the pinned phase gate for mean resources, the
// encoding family's channel otherwise.
Channel party_channel(const ComposedSystem& sys, int party, double theta) {
  if (is_mean_resource(sys.spec.resource)) return phase_channel(theta);
  return sys.enc.channel_for(party - 1, theta);
}

// Resource function over per-party inputs (index = party label).
double resource_function(const ComposedSystem& sys, const std::vector<double>& by_party) {
  const int n = sys.partition.n;
  if (is_mean_resource(sys.spec.resource)) {
    double s = 0.0;
    for (int mu = 1; mu <= n; ++mu) s += by_party[mu];
    return s / n;
  }
  const Eigen::VectorXd a = sys.enc.unit_a();
  double s = 0.0;
  for (int mu = 1; mu <= n; ++mu) s += a(mu - 1) * by_party[mu];
  return s;
}

int combiner(const ComposedSystem& sys, const std::vector<int>& by_party) {
  std::vector<int> o(by_party.begin() + 1, by_party.end());
  return sys.enc.g(o);
}

std::string bit_string(const std::vector<int>& by_party, const std::vector<int>& parties) {
  std::string s;
  s.reserve(parties.size());
  for (int mu : parties) s.push_back(static_cast<char>('0' + by_party[mu]));
  return s;
}

// Probabilities and conditional remainder states for every outcome string of
// the listed measured registers. Index packs the first measured party into
// the most significant bit. Branches below the zero-probability cutoff are
// dropped (probability stays zero).
struct BranchTable {
  std::vector<double> probs;
  std::vector<std::optional<DensityMatrix>> cond;
};

BranchTable enumerate_measured(const DensityMatrix& start, const std::vector<int>& measured,
                               bool x_basis, bool keep_states) {
  const int m = static_cast<int>(measured.size());
  if (m >= 31 || (1L << m) > Limits::global().max_branches)
    fail(Status::Budget, "branch enumeration exceeds the configured ceiling");
  const int count = 1 << m;
  BranchTable tb;
  tb.probs.assign(count, 0.0);
  tb.cond.assign(count, std::nullopt);
  const ProjectiveMeasurement meas =
      x_basis ? ProjectiveMeasurement::pauli_x() : ProjectiveMeasurement::computational(2);
  std::function<void(const std::optional<DensityMatrix>&, double, int, int)> rec =
      [&](const std::optional<DensityMatrix>& state, double p, int k, int idx) {
        if (k == m) {
          tb.probs[idx] = p;
          if (keep_states) tb.cond[idx] = state;
          return;
        }
        auto branches = qcore::projective_measure(*state, meas, {measured[k]});
        for (int b = 0; b < 2; ++b) {
          if (branches[b].zero_probability) continue;
          std::vector<int> keep;
          for (int lbl : branches[b].post_state.parties)
            if (lbl != measured[k]) keep.push_back(lbl);
          std::optional<DensityMatrix> next;
          if (!keep.empty()) next = qcore::partial_trace(branches[b].post_state, keep);
          rec(next, p * branches[b].probability, k + 1, (idx << 1) | b);
        }
      };
  std::optional<DensityMatrix> root = start;
  rec(root, 1.0, 0, 0);
  return tb;
}

// Encodes the honest parameters into the resource state and enumerates the
// honest readout (X basis for the mean resource, computational otherwise).
BranchTable concrete_table(const ComposedSystem& sys, const std::vector<double>& theta_by_party) {
  DensityMatrix cur = sys.rho;
  for (int j : sys.partition.honest)
    cur = qcore::apply_channel(cur, party_channel(sys, j, theta_by_party[j]), j);
  const bool x_basis = sys.spec.resource == ResourceKind::ConcreteR;
  return enumerate_measured(cur, sys.partition.honest, x_basis,
                            !sys.partition.dishonest.empty());
}

// The dishonest simulator's state for the mean resource: a |D|-register
// superposition carrying the honest parity h and the phase n * theta0.
DensityMatrix sim_mean_state(const std::vector<int>& dishonest, int h, double n_theta0) {
  const int d = static_cast<int>(dishonest.size());
  Vector psi = Vector::Zero(1 << d);
  psi(0) = Complex(M_SQRT1_2, 0.0);
  const Complex sign = h ? Complex(-1.0, 0.0) : Complex(1.0, 0.0);
  psi((1 << d) - 1) = sign * std::exp(Complex(0.0, n_theta0)) * M_SQRT1_2;
  return qcore::pure_state(psi, dishonest, std::vector<int>(d, 2));
}

// The general-function simulator's preparation: canonical honest angles with
// f(theta_H) = f0, the honest-encoded state, and its computational readout.
struct SimGeneralPrep {
  std::vector<double> theta_h;  // by party label
  BranchTable table;
};

SimGeneralPrep sim_general_prep(const ComposedSystem& sys, double f0) {
  const int n = sys.partition.n;
  SimGeneralPrep prep;
  prep.theta_h.assign(n + 1, 0.0);
  const Eigen::VectorXd a = sys.enc.unit_a();
  double na2 = 0.0;
  for (int j : sys.partition.honest) na2 += a(j - 1) * a(j - 1);
  if (na2 > 0.0)
    for (int j : sys.partition.honest) prep.theta_h[j] = reduce_angle(f0 * a(j - 1) / na2);
  DensityMatrix cur = sys.rho;
  for (int j : sys.partition.honest)
    cur = qcore::apply_channel(cur, sys.enc.channel_for(j - 1, prep.theta_h[j]), j);
  prep.table = enumerate_measured(cur, sys.partition.honest, false, true);
  return prep;
}

int sample_cdf(const std::vector<double>& probs, double u) {
  double c = 0.0;
  int last = 0;
  for (int k = 0; k < static_cast<int>(probs.size()); ++k) {
    if (probs[k] <= 0.0) continue;
    last = k;
    c += probs[k];
    if (u < c) return k;
  }
  return last;
}

void unpack_outcomes(int idx, const std::vector<int>& measured, std::vector<int>& by_party) {
  const int m = static_cast<int>(measured.size());
  for (int k = 0; k < m; ++k) by_party[measured[k]] = (idx >> (m - 1 - k)) & 1;
}

std::string interface_name(Boundary b, int party) {
  return (b == Boundary::Ext ? "ext." : "int.") + std::to_string(party);
}

const char* payload_name(PayloadType t) {
  switch (t) {
    case PayloadType::Angle: return "angle";
    case PayloadType::Bit: return "bit";
    case PayloadType::Bitstring: return "bitstring";
    case PayloadType::Real: return "real";
    case PayloadType::QuantumRef: return "qreg";
  }
  return "?";
}

// ---- execution ----------------------------------------------------------

class Executor {
 public:
  Executor(const ComposedSystem& sys, Strategy& env, const ExecuteOptions& opt)
      : sys_(sys),
        env_(env),
        record_(opt.record_messages),
        root_(opt.seed.value_or(sys.seed)) {
    t_.n = sys.partition.n;
    t_.rounds = sys.rounds;
  }

  Transcript run() {
    const auto& conv = sys_.spec.converters;
    if (is_concrete_resource(sys_.spec.resource)) {
      run_concrete();
    } else if (std::all_of(conv.begin(), conv.end(),
                           [](ConverterKind c) { return c == ConverterKind::None; })) {
      run_bare();
    } else if (conv[0] == ConverterKind::FilterDiamond) {
      run_filtered();
    } else {
      run_sim();
    }
    return std::move(t_);
  }

 private:
  void log(int round, int party, Boundary b, Direction d, PayloadType t, std::string payload,
           int qreg = -1) {
    if (!record_) return;
    t_.messages.push_back({round, party, b, d, t, std::move(payload), qreg});
  }

  void log_qreg(int round, int party, Boundary b, const Matrix& m) {
    if (!record_) return;
    const int id = static_cast<int>(t_.qregs.size());
    t_.qregs.push_back(m);
    log(round, party, b, Direction::Out, PayloadType::QuantumRef, "qreg:" + std::to_string(id),
        id);
  }

  void abort(const std::string& reason) {
    t_.aborted = true;
    t_.abort_reason = reason;
  }

  bool get_angle(int party, int round, double& out) {
    const double v = env_.angle_input(party, round);
    if (!std::isfinite(v) || v < 0.0 || v >= kTwoPi) {
      abort("party " + std::to_string(party) + " supplied an angle outside [0, 2pi)");
      return false;
    }
    out = v;
    return true;
  }

  bool get_bit(int party, int round, int& out) {
    const int v = env_.bit_input(party, round, observable_view(t_));
    if (v != 0 && v != 1) {
      abort("party " + std::to_string(party) + " supplied a non-bit outcome");
      return false;
    }
    out = v;
    return true;
  }

  void record_register(int round, const DensityMatrix& state, std::string branch) {
    t_.registers.push_back({round, state, std::move(branch)});
  }

  // Single exchange with the resource: parameters in, function value out.
  void run_bare() {
    const int n = sys_.partition.n;
    std::vector<double> th(n + 1, 0.0);
    for (int mu = 1; mu <= n; ++mu) {
      if (!get_angle(mu, 0, th[mu])) return;
      log(0, mu, Boundary::Ext, Direction::In, PayloadType::Angle, format_double(th[mu]));
    }
    const double f = resource_function(sys_, th);
    for (int mu = 1; mu <= n; ++mu)
      log(0, mu, Boundary::Ext, Direction::Out, PayloadType::Real, format_double(f));
    for (int mu = 1; mu <= n; ++mu) t_.final_outputs[mu] = format_double(f);
  }

  // Filters forward the parameters, learn the function value, and report a
  // bitstring with the concrete protocol's outcome statistics. One shared
  // tape keeps the reported string identical at every interface.
  void run_filtered() {
    const int n = sys_.partition.n;
    std::vector<double> th(n + 1, 0.0);
    for (int mu = 1; mu <= n; ++mu) {
      if (!get_angle(mu, 0, th[mu])) return;
      log(0, mu, Boundary::Ext, Direction::In, PayloadType::Angle, format_double(th[mu]));
    }
    for (int mu = 1; mu <= n; ++mu)
      log(0, mu, Boundary::Int, Direction::In, PayloadType::Angle, format_double(th[mu]));
    const double tbar = resource_function(sys_, th);
    for (int mu = 1; mu <= n; ++mu)
      log(0, mu, Boundary::Int, Direction::Out, PayloadType::Real, format_double(tbar));
    Rng filter = root_.child("filter");
    const double p0 = 0.5 * (1.0 + std::cos(n * tbar));
    std::string f;
    f.reserve(sys_.rounds);
    for (int i = 0; i < sys_.rounds; ++i) f.push_back(filter.bernoulli(p0) ? '0' : '1');
    for (int mu = 1; mu <= n; ++mu) {
      log(sys_.rounds + 1, mu, Boundary::Ext, Direction::Out, PayloadType::Bitstring, f);
      t_.final_outputs[mu] = f;
    }
  }

  // Honest protocol converters on H, open interfaces on D. Per round the
  // resource distributes the state, collects one outcome bit per interface
  // and broadcasts the full outcome list; the honest converters report the
  // combined bitstring at the end.
  void run_concrete() {
    const int n = sys_.partition.n;
    const auto& H = sys_.partition.honest;
    const auto& D = sys_.partition.dishonest;
    const bool mean = sys_.spec.resource == ResourceKind::ConcreteR;
    std::vector<double> theta(n + 1, 0.0);
    if (mean) {
      for (int j : H) {
        if (!get_angle(j, 0, theta[j])) return;
        log(0, j, Boundary::Ext, Direction::In, PayloadType::Angle, format_double(theta[j]));
      }
    }
    Rng measure = root_.child("measure");
    std::vector<Matrix> marginal(n + 1);
    if (record_)
      for (int mu = 1; mu <= n; ++mu) marginal[mu] = qcore::partial_trace(sys_.rho, {mu}).m;
    std::map<std::vector<double>, BranchTable> cache;
    std::string p_string;
    p_string.reserve(sys_.rounds);
    for (int i = 1; i <= sys_.rounds; ++i) {
      // general dynamics: the parameter arrives fresh every round
      if (!mean) {
        for (int j : H) {
          if (!get_angle(j, i, theta[j])) return;
          log(i, j, Boundary::Ext, Direction::In, PayloadType::Angle, format_double(theta[j]));
        }
      }
      for (int mu = 1; mu <= n; ++mu) {
        const Boundary b = sys_.partition.is_honest(mu) ? Boundary::Int : Boundary::Ext;
        log_qreg(i, mu, b, marginal[mu]);
      }
      std::vector<double> key;
      key.reserve(H.size());
      for (int j : H) key.push_back(theta[j]);
      auto it = cache.find(key);
      if (it == cache.end()) it = cache.emplace(key, concrete_table(sys_, theta)).first;
      const BranchTable& tb = it->second;
      const int o_idx = H.empty() ? 0 : sample_cdf(tb.probs, measure.uniform());
      std::vector<int> o(n + 1, 0);
      unpack_outcomes(o_idx, H, o);
      for (int mu = 1; mu <= n; ++mu) {
        const bool honest = sys_.partition.is_honest(mu);
        if (!honest && !get_bit(mu, i, o[mu])) return;
        log(i, mu, honest ? Boundary::Int : Boundary::Ext, Direction::In, PayloadType::Bit,
            std::string(1, static_cast<char>('0' + o[mu])));
      }
      if (!D.empty()) record_register(i, *tb.cond[o_idx], bit_string(o, H));
      std::vector<int> all(n);
      for (int mu = 1; mu <= n; ++mu) all[mu - 1] = mu;
      const std::string b = bit_string(o, all);
      for (int mu = 1; mu <= n; ++mu)
        log(i, mu, sys_.partition.is_honest(mu) ? Boundary::Int : Boundary::Ext, Direction::Out,
            PayloadType::Bitstring, b);
      p_string.push_back(static_cast<char>('0' + combiner(sys_, o)));
    }
    for (int j : H) {
      log(sys_.rounds + 1, j, Boundary::Ext, Direction::Out, PayloadType::Bitstring, p_string);
      t_.final_outputs[j] = p_string;
    }
  }

  // SimHonest on H, the monolithic SimDishonest on D, the ideal resource
  // inside. The resource is exercised rounds+1 times: once to move the
  // honest parameters to the dishonest simulator, then once per round to
  // signal the combined bit back to the honest side.
  void run_sim() {
    const int n = sys_.partition.n;
    const auto& H = sys_.partition.honest;
    const auto& D = sys_.partition.dishonest;
    const bool mean = sys_.spec.resource == ResourceKind::IdealMean;
    std::vector<double> theta(n + 1, 0.0);
    for (int j : H) {
      if (!get_angle(j, 0, theta[j])) return;
      log(0, j, Boundary::Ext, Direction::In, PayloadType::Angle, format_double(theta[j]));
    }
    // resource use 0: honest converters forward, the dishonest simulator
    // contributes zero, everyone learns f over the honest parameters
    std::vector<double> s_in(n + 1, 0.0);
    for (int j : H) s_in[j] = theta[j];
    for (int mu = 1; mu <= n; ++mu)
      log(0, mu, Boundary::Int, Direction::In, PayloadType::Angle, format_double(s_in[mu]));
    const double f0 = resource_function(sys_, s_in);
    for (int mu = 1; mu <= n; ++mu)
      log(0, mu, Boundary::Int, Direction::Out, PayloadType::Real, format_double(f0));
    Rng simdis = root_.child("simdis");
    SimGeneralPrep prep;
    if (!mean) prep = sim_general_prep(sys_, f0);
    std::string p_hat;
    p_hat.reserve(sys_.rounds);
    for (int i = 1; i <= sys_.rounds; ++i) {
      std::vector<int> o(n + 1, 0);
      DensityMatrix reg;
      if (mean) {
        for (int j : H) o[j] = simdis.bernoulli(0.5) ? 1 : 0;
        int h = 0;
        for (int j : H) h ^= o[j];
        reg = sim_mean_state(D, h, static_cast<double>(n) * f0);
      } else {
        const int o_idx = H.empty() ? 0 : sample_cdf(prep.table.probs, simdis.uniform());
        unpack_outcomes(o_idx, H, o);
        reg = *prep.table.cond[o_idx];
      }
      for (int mu : D) log_qreg(i, mu, Boundary::Ext, qcore::partial_trace(reg, {mu}).m);
      record_register(i, reg, bit_string(o, H));
      for (int mu : D) {
        if (!get_bit(mu, i, o[mu])) return;
        log(i, mu, Boundary::Ext, Direction::In, PayloadType::Bit,
            std::string(1, static_cast<char>('0' + o[mu])));
      }
      const int p = combiner(sys_, o);
      // resource use i: the dishonest simulator spreads p*pi over its
      // interfaces, the honest converters contribute zero
      std::vector<double> sig(n + 1, 0.0);
      for (int mu : D) sig[mu] = p * M_PI / static_cast<double>(D.size());
      for (int mu = 1; mu <= n; ++mu)
        log(i, mu, Boundary::Int, Direction::In, PayloadType::Angle, format_double(sig[mu]));
      const double fi = resource_function(sys_, sig);
      for (int mu = 1; mu <= n; ++mu)
        log(i, mu, Boundary::Int, Direction::Out, PayloadType::Real, format_double(fi));
      // a zero function value decodes as bit 0, anything else as 1
      p_hat.push_back(fi == 0.0 ? '0' : '1');
      std::vector<int> all(n);
      for (int mu = 1; mu <= n; ++mu) all[mu - 1] = mu;
      const std::string b = bit_string(o, all);
      for (int mu : D)
        log(i, mu, Boundary::Ext, Direction::Out, PayloadType::Bitstring, b);
    }
    for (int j : H) {
      log(sys_.rounds + 1, j, Boundary::Ext, Direction::Out, PayloadType::Bitstring, p_hat);
      t_.final_outputs[j] = p_hat;
    }
  }

  const ComposedSystem& sys_;
  Strategy& env_;
  bool record_;
  Rng root_;
  Transcript t_;
};

}  // namespace

// ---- partition and wiring ------------------------------------------------

PartyPartition PartyPartition::make(int n, std::vector<int> dishonest) {
  if (n < 1 || n > Limits::global().max_parties)
    fail(Status::Invalid, "party count out of range");
  std::sort(dishonest.begin(), dishonest.end());
  PartyPartition p;
  p.n = n;
  int prev = 0;
  for (int mu : dishonest) {
    if (mu < 1 || mu > n) fail(Status::Invalid, "dishonest label outside 1..n");
    if (mu == prev) fail(Status::Invalid, "duplicate dishonest label");
    prev = mu;
  }
  p.dishonest = dishonest;
  for (int mu = 1; mu <= n; ++mu)
    if (!std::binary_search(dishonest.begin(), dishonest.end(), mu)) p.honest.push_back(mu);
  return p;
}

bool PartyPartition::is_honest(int party) const {
  return std::binary_search(honest.begin(), honest.end(), party);
}

SystemSpec honest_concrete(const PartyPartition& p, bool mean) {
  SystemSpec s;
  s.resource = mean ? ResourceKind::ConcreteR : ResourceKind::ConcreteGeneral;
  s.converters.assign(p.n, ConverterKind::None);
  for (int j : p.honest) s.converters[j - 1] = ConverterKind::HonestPi;
  return s;
}

SystemSpec simulated_ideal(const PartyPartition& p, bool mean) {
  SystemSpec s;
  s.resource = mean ? ResourceKind::IdealMean : ResourceKind::IdealGeneral;
  s.converters.assign(p.n, ConverterKind::SimDishonest);
  for (int j : p.honest) s.converters[j - 1] = ConverterKind::SimHonest;
  return s;
}

SystemSpec filtered_ideal(int n) {
  SystemSpec s;
  s.resource = ResourceKind::IdealMean;
  s.converters.assign(n, ConverterKind::FilterDiamond);
  return s;
}

SystemSpec bare_ideal(int n, bool mean) {
  SystemSpec s;
  s.resource = mean ? ResourceKind::IdealMean : ResourceKind::IdealGeneral;
  s.converters.assign(n, ConverterKind::None);
  return s;
}

ComposedSystem build_system(const SystemSpec& spec, const EncodingFamily& enc,
                            const DensityMatrix& rho, int rounds, std::uint64_t seed) {
  const int n = enc.n;
  if (n < 1 || n > Limits::global().max_parties)
    fail(Status::Invalid, "party count out of range");
  if (static_cast<int>(spec.converters.size()) != n)
    fail(Status::Invalid, "converter list must assign one behavior per party");
  if (rounds < 1) fail(Status::Invalid, "round count must be positive");
  if (is_mean_resource(spec.resource) && !enc.mean_mode)
    fail(Status::Invalid, "mean resources require the mean encoding family");

  int n_none = 0, n_pi = 0, n_filter = 0, n_simh = 0, n_simd = 0;
  for (ConverterKind c : spec.converters) {
    switch (c) {
      case ConverterKind::None: ++n_none; break;
      case ConverterKind::HonestPi: ++n_pi; break;
      case ConverterKind::FilterDiamond: ++n_filter; break;
      case ConverterKind::SimHonest: ++n_simh; break;
      case ConverterKind::SimDishonest: ++n_simd; break;
    }
  }
  bool simulated = false;
  if (is_concrete_resource(spec.resource)) {
    if (n_pi + n_none != n)
      fail(Status::Invalid,
           "a concrete resource accepts only the honest protocol or open interfaces");
  } else if (n_none == n) {
    // bare resource
  } else if (n_filter == n) {
    if (spec.resource == ResourceKind::IdealGeneral)
      fail(Status::Invalid, "the filter is defined for the mean resource");
  } else if (n_simh + n_simd == n && n_simd >= 1) {
    simulated = true;
    if (spec.resource == ResourceKind::IdealGeneral && rounds != 1)
      fail(Status::Invalid, "general-function simulators are defined for a single round");
  } else {
    fail(Status::Invalid, "converter assignment does not form a recognized wiring");
  }

  if (is_concrete_resource(spec.resource) || simulated) {
    if (rho.num_parties() != n)
      fail(Status::Invalid, "resource state must hold one register per party");
    for (int mu = 1; mu <= n; ++mu) {
      if (rho.parties[mu - 1] != mu)
        fail(Status::Invalid, "resource registers must be labeled 1..n");
      if (rho.dims[mu - 1] != 2) fail(Status::Invalid, "resource registers must be qubits");
    }
  }

  std::vector<int> dishonest;
  for (int mu = 1; mu <= n; ++mu) {
    const ConverterKind c = spec.converters[mu - 1];
    const bool open_concrete = is_concrete_resource(spec.resource) && c == ConverterKind::None;
    if (open_concrete || c == ConverterKind::SimDishonest) dishonest.push_back(mu);
  }
  ComposedSystem sys{spec, enc, rho, rounds, seed, PartyPartition::make(n, dishonest)};
  return sys;
}

// ---- strategies ----------------------------------------------------------

double FixedStrategy::angle_input(int party, int round) {
  (void)round;
  auto it = inputs_.angles.find(party);
  if (it == inputs_.angles.end())
    fail(Status::Invalid, "no angle provided for party " + std::to_string(party));
  return it->second;
}

int FixedStrategy::bit_input(int party, int round, const Transcript& view) {
  (void)view;
  auto it = inputs_.bits.find(party);
  if (it == inputs_.bits.end() || it->second.empty()) return 0;
  const auto& v = it->second;
  if (v.size() == 1) return v[0];
  if (round - 1 < static_cast<int>(v.size())) return v[round - 1];
  fail(Status::Invalid, "bit list for party " + std::to_string(party) + " ends before round " +
                            std::to_string(round));
}

Transcript execute(const ComposedSystem& sys, Strategy& env, const ExecuteOptions& opt) {
  Executor ex(sys, env, opt);
  return ex.run();
}

Transcript execute(const ComposedSystem& sys, const FixedInputs& inputs,
                   const ExecuteOptions& opt) {
  FixedStrategy env(inputs);
  return execute(sys, env, opt);
}

Transcript observable_view(const Transcript& t) {
  Transcript v = t;
  v.messages.clear();
  for (const auto& m : t.messages)
    if (m.boundary == Boundary::Ext) v.messages.push_back(m);
  return v;
}

// ---- exact classical-quantum output -------------------------------------

namespace {

struct LabelParts {
  // per open interface (ascending party), the classical record shown there
  std::map<int, std::string> parts;
  std::string str() const {
    std::string s;
    for (const auto& [mu, val] : parts) {
      if (!s.empty()) s.push_back(';');
      s += std::to_string(mu) + "|" + val;
    }
    return s;
  }
};

void add_branch(std::map<std::string, CqBranch>& acc, const std::string& label, double prob,
                const std::optional<DensityMatrix>& state) {
  if (prob <= 0.0) return;
  auto it = acc.find(label);
  if (it == acc.end()) {
    CqBranch b;
    b.label = label;
    b.probability = prob;
    b.state = state;
    acc.emplace(label, std::move(b));
    return;
  }
  // weighted mixture of coinciding classical records
  if (it->second.state.has_value() != state.has_value())
    fail(Status::Internal, "inconsistent quantum payload across coinciding branches");
  if (state.has_value()) {
    Matrix m = it->second.state->m * it->second.probability + state->m * prob;
    m /= (it->second.probability + prob);
    it->second.state = DensityMatrix::make(m, state->parties, state->dims);
  }
  it->second.probability += prob;
}

double cq_angle(const FixedInputs& inputs, int party) {
  auto it = inputs.angles.find(party);
  if (it == inputs.angles.end())
    fail(Status::Invalid, "no angle provided for party " + std::to_string(party));
  const double v = it->second;
  if (!std::isfinite(v) || v < 0.0 || v >= kTwoPi)
    fail(Status::Invalid, "angle for party " + std::to_string(party) + " outside [0, 2pi)");
  return v;
}

int cq_bit(const FixedInputs& inputs, int party) {
  auto it = inputs.bits.find(party);
  if (it == inputs.bits.end() || it->second.empty()) return 0;
  const int v = it->second.front();
  if (v != 0 && v != 1)
    fail(Status::Invalid, "bit for party " + std::to_string(party) + " not in {0, 1}");
  return v;
}

}  // namespace

CqEnsemble cq_output(const ComposedSystem& sys, const FixedInputs& inputs, int round) {
  if (round != 1 || sys.rounds != 1)
    fail(Status::Invalid, "the exact output ensemble is defined for single-round systems");
  const int n = sys.partition.n;
  const auto& H = sys.partition.honest;
  const auto& D = sys.partition.dishonest;
  const auto& conv = sys.spec.converters;
  std::map<std::string, CqBranch> acc;
  std::vector<int> all(n);
  for (int mu = 1; mu <= n; ++mu) all[mu - 1] = mu;

  const bool concrete = is_concrete_resource(sys.spec.resource);
  const bool bare =
      !concrete && std::all_of(conv.begin(), conv.end(),
                               [](ConverterKind c) { return c == ConverterKind::None; });
  const bool filtered = !concrete && !bare && conv[0] == ConverterKind::FilterDiamond;

  if (bare) {
    std::vector<double> th(n + 1, 0.0);
    for (int mu = 1; mu <= n; ++mu) th[mu] = cq_angle(inputs, mu);
    const double f = resource_function(sys, th);
    LabelParts lp;
    for (int mu = 1; mu <= n; ++mu) lp.parts[mu] = format_double(f);
    add_branch(acc, lp.str(), 1.0, std::nullopt);
  } else if (filtered) {
    std::vector<double> th(n + 1, 0.0);
    for (int mu = 1; mu <= n; ++mu) th[mu] = cq_angle(inputs, mu);
    const double tbar = resource_function(sys, th);
    const double p0 = 0.5 * (1.0 + std::cos(n * tbar));
    for (int f = 0; f <= 1; ++f) {
      LabelParts lp;
      for (int mu = 1; mu <= n; ++mu) lp.parts[mu] = std::string(1, static_cast<char>('0' + f));
      add_branch(acc, lp.str(), f == 0 ? p0 : 1.0 - p0, std::nullopt);
    }
  } else if (concrete) {
    std::vector<double> theta(n + 1, 0.0);
    for (int j : H) theta[j] = cq_angle(inputs, j);
    std::vector<int> o(n + 1, 0);
    for (int mu : D) o[mu] = cq_bit(inputs, mu);
    const BranchTable tb = concrete_table(sys, theta);
    for (int idx = 0; idx < static_cast<int>(tb.probs.size()); ++idx) {
      if (tb.probs[idx] <= 0.0) continue;
      unpack_outcomes(idx, H, o);
      const std::string b = bit_string(o, all);
      const int p = combiner(sys, o);
      LabelParts lp;
      for (int j : H) lp.parts[j] = std::string(1, static_cast<char>('0' + p));
      for (int mu : D) lp.parts[mu] = b;
      add_branch(acc, lp.str(), tb.probs[idx],
                 D.empty() ? std::nullopt : tb.cond[idx]);
    }
  } else {
    // simulated ideal
    std::vector<double> theta(n + 1, 0.0);
    for (int j : H) theta[j] = cq_angle(inputs, j);
    std::vector<double> s_in(n + 1, 0.0);
    for (int j : H) s_in[j] = theta[j];
    const double f0 = resource_function(sys, s_in);
    std::vector<int> o(n + 1, 0);
    for (int mu : D) o[mu] = cq_bit(inputs, mu);
    const bool mean = sys.spec.resource == ResourceKind::IdealMean;
    const int hcount = 1 << static_cast<int>(H.size());
    if (hcount > Limits::global().max_branches)
      fail(Status::Budget, "branch enumeration exceeds the configured ceiling");
    SimGeneralPrep prep;
    if (!mean) prep = sim_general_prep(sys, f0);
    for (int idx = 0; idx < hcount; ++idx) {
      double prob;
      std::optional<DensityMatrix> state;
      unpack_outcomes(idx, H, o);
      if (mean) {
        prob = 1.0 / hcount;
        int h = 0;
        for (int j : H) h ^= o[j];
        state = sim_mean_state(D, h, static_cast<double>(n) * f0);
      } else {
        prob = prep.table.probs[idx];
        if (prob <= 0.0) continue;
        state = prep.table.cond[idx];
      }
      const int p = combiner(sys, o);
      const std::string b = bit_string(o, all);
      LabelParts lp;
      // the honest-side converter reports the decoded bit; the signal
      // f_1 = sum_D a_mu p pi / |D| decodes to 0 exactly when p = 0
      std::vector<double> sig(n + 1, 0.0);
      for (int mu : D) sig[mu] = p * M_PI / static_cast<double>(D.size());
      const double fi = resource_function(sys, sig);
      const char p_hat = fi == 0.0 ? '0' : '1';
      for (int j : H) lp.parts[j] = std::string(1, p_hat);
      for (int mu : D) lp.parts[mu] = b;
      add_branch(acc, lp.str(), prob, state);
    }
  }

  CqEnsemble out;
  for (auto& [label, branch] : acc) out.branches.push_back(std::move(branch));
  return out;
}

// ---- transcript validation ----------------------------------------------

namespace {

struct Slot {
  int round;
  int party;
  Boundary b;
  Direction d;
  PayloadType t;
};

bool operator<(const Slot& x, const Slot& y) {
  return std::tie(x.round, x.party, x.b, x.d, x.t) < std::tie(y.round, y.party, y.b, y.d, y.t);
}

bool operator==(const Slot& x, const Slot& y) {
  return std::tie(x.round, x.party, x.b, x.d, x.t) == std::tie(y.round, y.party, y.b, y.d, y.t);
}

std::string slot_name(const Slot& s) {
  std::ostringstream os;
  os << "round " << s.round << " " << interface_name(s.b, s.party) << " "
     << (s.d == Direction::In ? "in" : "out") << " " << payload_name(s.t);
  return os.str();
}

std::vector<Slot> expected_skeleton(const ComposedSystem& sys) {
  const int n = sys.partition.n;
  const auto& H = sys.partition.honest;
  const auto& D = sys.partition.dishonest;
  const auto& conv = sys.spec.converters;
  const int N = sys.rounds;
  std::vector<Slot> sk;
  auto push = [&](int round, int party, Boundary b, Direction d, PayloadType t) {
    sk.push_back({round, party, b, d, t});
  };
  if (is_concrete_resource(sys.spec.resource)) {
    const bool mean = sys.spec.resource == ResourceKind::ConcreteR;
    if (mean)
      for (int j : H) push(0, j, Boundary::Ext, Direction::In, PayloadType::Angle);
    for (int i = 1; i <= N; ++i) {
      if (!mean)
        for (int j : H) push(i, j, Boundary::Ext, Direction::In, PayloadType::Angle);
      for (int mu = 1; mu <= n; ++mu)
        push(i, mu, sys.partition.is_honest(mu) ? Boundary::Int : Boundary::Ext, Direction::Out,
             PayloadType::QuantumRef);
      for (int mu = 1; mu <= n; ++mu)
        push(i, mu, sys.partition.is_honest(mu) ? Boundary::Int : Boundary::Ext, Direction::In,
             PayloadType::Bit);
      for (int mu = 1; mu <= n; ++mu)
        push(i, mu, sys.partition.is_honest(mu) ? Boundary::Int : Boundary::Ext, Direction::Out,
             PayloadType::Bitstring);
    }
    for (int j : H) push(N + 1, j, Boundary::Ext, Direction::Out, PayloadType::Bitstring);
    return sk;
  }
  const bool bare = std::all_of(conv.begin(), conv.end(),
                                [](ConverterKind c) { return c == ConverterKind::None; });
  if (bare) {
    for (int mu = 1; mu <= n; ++mu) push(0, mu, Boundary::Ext, Direction::In, PayloadType::Angle);
    for (int mu = 1; mu <= n; ++mu) push(0, mu, Boundary::Ext, Direction::Out, PayloadType::Real);
    return sk;
  }
  if (conv[0] == ConverterKind::FilterDiamond) {
    for (int mu = 1; mu <= n; ++mu) push(0, mu, Boundary::Ext, Direction::In, PayloadType::Angle);
    for (int mu = 1; mu <= n; ++mu) push(0, mu, Boundary::Int, Direction::In, PayloadType::Angle);
    for (int mu = 1; mu <= n; ++mu) push(0, mu, Boundary::Int, Direction::Out, PayloadType::Real);
    for (int mu = 1; mu <= n; ++mu)
      push(N + 1, mu, Boundary::Ext, Direction::Out, PayloadType::Bitstring);
    return sk;
  }
  // simulated ideal
  for (int j : H) push(0, j, Boundary::Ext, Direction::In, PayloadType::Angle);
  for (int mu = 1; mu <= n; ++mu) push(0, mu, Boundary::Int, Direction::In, PayloadType::Angle);
  for (int mu = 1; mu <= n; ++mu) push(0, mu, Boundary::Int, Direction::Out, PayloadType::Real);
  for (int i = 1; i <= N; ++i) {
    for (int mu : D) push(i, mu, Boundary::Ext, Direction::Out, PayloadType::QuantumRef);
    for (int mu : D) push(i, mu, Boundary::Ext, Direction::In, PayloadType::Bit);
    for (int mu = 1; mu <= n; ++mu) push(i, mu, Boundary::Int, Direction::In, PayloadType::Angle);
    for (int mu = 1; mu <= n; ++mu) push(i, mu, Boundary::Int, Direction::Out, PayloadType::Real);
    for (int mu : D) push(i, mu, Boundary::Ext, Direction::Out, PayloadType::Bitstring);
  }
  for (int j : H) push(N + 1, j, Boundary::Ext, Direction::Out, PayloadType::Bitstring);
  return sk;
}

bool parse_finite(const std::string& s, double& out) {
  char* end = nullptr;
  out = std::strtod(s.c_str(), &end);
  return end != nullptr && *end == '\0' && std::isfinite(out);
}

}  // namespace

ValidationReport validate_transcript(const Transcript& t, const ComposedSystem& sys) {
  ValidationReport rep;
  auto note = [&](const std::string& v) { rep.violations.push_back(v); };
  std::vector<Slot> expected = expected_skeleton(sys);
  if (t.messages.empty() && !expected.empty()) {
    note("transcript carries no recorded messages");
    return rep;
  }
  std::vector<Slot> actual;
  actual.reserve(t.messages.size());
  for (const auto& m : t.messages) actual.push_back({m.round, m.party, m.boundary, m.direction, m.type});

  if (t.aborted) {
    // a truncated run must still be an order-respecting prefix
    if (actual.size() > expected.size()) {
      note("aborted transcript is longer than the behavior schedule");
    } else {
      for (std::size_t k = 0; k < actual.size(); ++k)
        if (!(actual[k] == expected[k]))
          note("message " + std::to_string(k) + ": expected " + slot_name(expected[k]) +
               ", found " + slot_name(actual[k]));
    }
  } else {
    std::map<Slot, int> want, have;
    for (const auto& s : expected) ++want[s];
    for (const auto& s : actual) ++have[s];
    bool counts_ok = true;
    for (const auto& [s, c] : want) {
      const auto it = have.find(s);
      const int got = it == have.end() ? 0 : it->second;
      if (got != c) {
        counts_ok = false;
        note(slot_name(s) + ": expected " + std::to_string(c) + " message(s), found " +
             std::to_string(got));
      }
    }
    for (const auto& [s, c] : have)
      if (want.find(s) == want.end()) {
        counts_ok = false;
        note(slot_name(s) + ": unexpected message");
        (void)c;
      }
    if (counts_ok) {
      for (std::size_t k = 0; k < actual.size(); ++k)
        if (!(actual[k] == expected[k])) {
          note("message " + std::to_string(k) + " out of order: expected " +
               slot_name(expected[k]) + ", found " + slot_name(actual[k]));
          break;
        }
    }
  }

  // payload domains
  for (std::size_t k = 0; k < t.messages.size(); ++k) {
    const auto& m = t.messages[k];
    const std::string where = "message " + std::to_string(k) + " (" +
                              interface_name(m.boundary, m.party) + ")";
    double v = 0.0;
    switch (m.type) {
      case PayloadType::Angle:
        if (!parse_finite(m.payload, v) || v < 0.0 || v >= kTwoPi)
          note(where + ": angle payload outside [0, 2pi)");
        break;
      case PayloadType::Real:
        if (!parse_finite(m.payload, v)) note(where + ": real payload not finite");
        break;
      case PayloadType::Bit:
        if (m.payload != "0" && m.payload != "1") note(where + ": bit payload not in {0, 1}");
        break;
      case PayloadType::Bitstring: {
        const bool binary =
            !m.payload.empty() && m.payload.find_first_not_of("01") == std::string::npos;
        const std::size_t len = m.round == sys.rounds + 1
                                    ? static_cast<std::size_t>(sys.rounds)
                                    : static_cast<std::size_t>(sys.partition.n);
        if (!binary)
          note(where + ": bitstring payload not over {0, 1}");
        else if (m.payload.size() != len)
          note(where + ": bitstring payload has length " + std::to_string(m.payload.size()) +
               ", expected " + std::to_string(len));
        break;
      }
      case PayloadType::QuantumRef:
        if (m.qreg < 0 || m.qreg >= static_cast<int>(t.qregs.size()))
          note(where + ": quantum payload references no stored register");
        break;
    }
  }

  if (t.aborted || !rep.violations.empty()) return rep;

  // cross-message consistency
  const bool concrete = is_concrete_resource(sys.spec.resource);
  const auto& conv = sys.spec.converters;
  const bool bare = !concrete && std::all_of(conv.begin(), conv.end(), [](ConverterKind c) {
    return c == ConverterKind::None;
  });
  const bool filtered = !concrete && !bare && conv[0] == ConverterKind::FilterDiamond;
  const bool simulated = !concrete && !bare && !filtered;

  if (bare || filtered) {
    // every interface must see the same function value and final report
    std::string real_ref, final_ref;
    for (const auto& m : t.messages) {
      if (m.direction != Direction::Out) continue;
      if (m.type == PayloadType::Real) {
        if (real_ref.empty())
          real_ref = m.payload;
        else if (m.payload != real_ref)
          note("function value differs across interfaces");
      }
      if (m.type == PayloadType::Bitstring) {
        if (final_ref.empty())
          final_ref = m.payload;
        else if (m.payload != final_ref)
          note("reported bitstrings differ across interfaces");
      }
    }
  }

  if (concrete || simulated) {
    std::vector<std::string> broadcast(sys.rounds + 1);
    std::vector<std::vector<int>> obits(sys.rounds + 1,
                                        std::vector<int>(sys.partition.n + 1, 0));
    std::vector<double> signal(sys.rounds + 1, 0.0);
    std::string p_final;
    for (const auto& m : t.messages) {
      if (m.type == PayloadType::Bit && m.direction == Direction::In)
        obits[m.round][m.party] = m.payload[0] - '0';
      if (m.type == PayloadType::Bitstring && m.round >= 1 && m.round <= sys.rounds) {
        if (broadcast[m.round].empty())
          broadcast[m.round] = m.payload;
        else if (broadcast[m.round] != m.payload)
          note("round " + std::to_string(m.round) + ": broadcast differs across interfaces");
      }
      if (m.type == PayloadType::Bitstring && m.round == sys.rounds + 1) {
        if (p_final.empty())
          p_final = m.payload;
        else if (p_final != m.payload)
          note("final reported bitstrings differ across honest interfaces");
      }
      if (simulated && m.type == PayloadType::Real && m.round >= 1) {
        double v = 0.0;
        parse_finite(m.payload, v);
        signal[m.round] = v;
      }
    }
    for (int i = 1; i <= sys.rounds; ++i) {
      if (broadcast[i].empty()) continue;
      std::vector<int> o(sys.partition.n + 1, 0);
      for (int mu = 1; mu <= sys.partition.n; ++mu) o[mu] = broadcast[i][mu - 1] - '0';
      if (concrete) {
        // the broadcast must repeat the collected bits, and the reported
        // string must combine them
        for (int mu = 1; mu <= sys.partition.n; ++mu)
          if (o[mu] != obits[i][mu]) {
            note("round " + std::to_string(i) + ": broadcast disagrees with collected bits");
            break;
          }
      }
      if (!p_final.empty() && static_cast<int>(p_final.size()) >= i) {
        const int p = combiner(sys, o);
        const int claimed = p_final[i - 1] - '0';
        if (concrete && claimed != p)
          note("round " + std::to_string(i) +
               ": reported bit does not combine the broadcast outcomes");
        if (simulated) {
          if (claimed != p)
            note("round " + std::to_string(i) +
                 ": decoded bit disagrees with the combined outcomes");
          if ((signal[i] == 0.0) != (claimed == 0))
            note("round " + std::to_string(i) + ": decoded bit disagrees with the signal value");
        }
      }
    }
  }
  return rep;
}

// ---- export --------------------------------------------------------------

std::string transcript_to_text(const Transcript& t) {
  std::ostringstream os;
  os << "# n=" << t.n << " rounds=" << t.rounds << " aborted=" << (t.aborted ? 1 : 0);
  if (t.aborted) os << " reason=" << t.abort_reason;
  os << "\n";
  for (const auto& [party, value] : t.final_outputs)
    os << "# final " << party << "=" << value << "\n";
  for (std::size_t r = 0; r < t.registers.size(); ++r)
    os << "# register round=" << t.registers[r].round << " branch=" << t.registers[r].branch
       << " file=r" << r << "\n";
  for (const auto& m : t.messages)
    os << m.round << ", " << interface_name(m.boundary, m.party) << ", "
       << (m.direction == Direction::In ? "in" : "out") << ", " << payload_name(m.type) << ", "
       << m.payload << "\n";
  return os.str();
}

void save_transcript(const std::string& path, const Transcript& t) {
  std::ofstream out(path);
  if (!out) fail(Status::Io, "cannot open " + path + " for writing");
  out << transcript_to_text(t);
  if (!out) fail(Status::Io, "write failed for " + path);
  out.close();
  for (std::size_t id = 0; id < t.qregs.size(); ++id)
    qcore::save_matrix(path + ".q" + std::to_string(id), t.qregs[id]);
  for (std::size_t r = 0; r < t.registers.size(); ++r)
    qcore::save_matrix(path + ".r" + std::to_string(r), t.registers[r].state.m);
}

}  // namespace qpn::acproto
