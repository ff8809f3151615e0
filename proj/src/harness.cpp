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

#include "qprivnet/harness.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

#include <boost/math/distributions/binomial.hpp>

namespace qpn::harness {

namespace {

constexpr double kTwoPi = 2.0 * M_PI;

double reduce_angle(double x) {
  double r = std::fmod(x, kTwoPi);
  if (r < 0.0) r += kTwoPi;
  if (r >= kTwoPi) r = 0.0;
  return r;
}

struct BranchPair {
  double pa = 0.0;
  double pb = 0.0;
  const acproto::CqBranch* a = nullptr;
  const acproto::CqBranch* b = nullptr;
};

// Adapts a Distinguisher to the protocol Strategy interface.
class StrategyAdapter : public acproto::Strategy {
 public:
  explicit StrategyAdapter(Distinguisher& d) : d_(d) {}
  double angle_input(int party, int round) override { return d_.angle_input(party, round); }
  int bit_input(int party, int round, const Transcript& view) override {
    return d_.bit_input(party, round, view);
  }

 private:
  Distinguisher& d_;
};

// Image of |2p - 1| over a probability interval.
void advantage_interval(double p_lo, double p_hi, double& lo, double& hi) {
  if (p_lo >= 0.5) {
    lo = 2.0 * p_lo - 1.0;
    hi = 2.0 * p_hi - 1.0;
  } else if (p_hi <= 0.5) {
    lo = 1.0 - 2.0 * p_hi;
    hi = 1.0 - 2.0 * p_lo;
  } else {
    lo = 0.0;
    hi = std::max(2.0 * p_hi - 1.0, 1.0 - 2.0 * p_lo);
  }
  lo = std::clamp(lo, 0.0, 1.0);
  hi = std::clamp(hi, 0.0, 1.0);
}

}  // namespace

double ensemble_distance(const CqEnsemble& a, const CqEnsemble& b, bool classical_only) {
  std::map<std::string, BranchPair> by_label;
  for (const auto& br : a.branches) {
    auto& e = by_label[br.label];
    e.pa += br.probability;
    e.a = &br;
  }
  for (const auto& br : b.branches) {
    auto& e = by_label[br.label];
    e.pb += br.probability;
    e.b = &br;
  }
  double total = 0.0;
  for (const auto& [label, e] : by_label) {
    const bool qa = !classical_only && e.a != nullptr && e.a->state.has_value();
    const bool qb = !classical_only && e.b != nullptr && e.b->state.has_value();
    if (qa && qb) {
      const auto& sa = *e.a->state;
      const auto& sb = *e.b->state;
      if (sa.parties == sb.parties && sa.dims == sb.dims) {
        total += 0.5 * qcore::trace_norm(e.pa * sa.m - e.pb * sb.m);
      } else {
        // registers of different shape are perfectly distinguishable
        total += 0.5 * (e.pa + e.pb);
      }
    } else if (qa || qb) {
      total += 0.5 * (e.pa + e.pb);
    } else {
      total += 0.5 * std::abs(e.pa - e.pb);
    }
  }
  return total;
}

AdvantageEstimate exact_advantage(const ComposedSystem& sys_a, const ComposedSystem& sys_b,
                                  const FixedInputs& inputs, bool classical_only) {
  const auto ea = acproto::cq_output(sys_a, inputs);
  const auto eb = acproto::cq_output(sys_b, inputs);
  AdvantageEstimate est;
  est.d_hat = ensemble_distance(ea, eb, classical_only);
  est.ci_low = est.d_hat;
  est.ci_high = est.d_hat;
  est.mode = EstimateMode::Exact;
  return est;
}

AdvantageEstimate estimate_advantage(const ComposedSystem& sys_a, const ComposedSystem& sys_b,
                                     Distinguisher& env, const EstimateOptions& opt) {
  if (opt.trials < 100) fail(Status::Invalid, "advantage estimation needs at least 100 trials");
  Rng root(opt.seed);
  long correct = 0;
  StrategyAdapter adapter(env);
  for (long t = 0; t < opt.trials; ++t) {
    Rng trial = root.child("trial", static_cast<std::uint64_t>(t));
    const bool use_b = trial.bernoulli(0.5);
    acproto::ExecuteOptions eo;
    eo.seed = trial.next_u64();
    const Transcript run = acproto::execute(use_b ? sys_b : sys_a, adapter, eo);
    if (run.aborted) continue;  // a violated payload forfeits the trial
    Rng decide_rng = trial.child("decide");
    const char guess = env.decide(acproto::observable_view(run), decide_rng);
    if (guess == (use_b ? 'B' : 'A')) ++correct;
  }
  AdvantageEstimate est;
  est.mode = EstimateMode::Empirical;
  est.trials = opt.trials;
  est.correct = correct;
  const double p_hat = double(correct) / double(opt.trials);
  est.d_hat = std::abs(2.0 * p_hat - 1.0);
  if (opt.clopper_pearson) {
    using boost::math::binomial_distribution;
    const double p_lo = binomial_distribution<>::find_lower_bound_on_p(
        double(opt.trials), double(correct), 0.005);
    const double p_hi = binomial_distribution<>::find_upper_bound_on_p(
        double(opt.trials), double(correct), 0.005);
    advantage_interval(p_lo, p_hi, est.ci_low, est.ci_high);
  } else {
    // two-sided 99% bound on |p_hat - p|, doubled on the advantage scale
    const double w = 2.0 * std::sqrt(std::log(2.0 / 0.01) / (2.0 * double(opt.trials)));
    est.ci_low = std::clamp(est.d_hat - w, 0.0, 1.0);
    est.ci_high = std::clamp(est.d_hat + w, 0.0, 1.0);
  }
  return est;
}

BoundAudit audit(const DensityMatrix& rho, const EncodingFamily& enc,
                 const PartyPartition& partition, const SearchBudget& budget) {
  if (partition.n != enc.n)
    fail(Status::Invalid, "partition and encoding family disagree on the party count");
  if (enc.n > Limits::global().desk_scale_n)
    fail(Status::Invalid, "audits run at desk scale only");

  BoundAudit a;
  a.search = metrology::equivalent_class_distance(rho, enc, enc.unit_a(), budget);
  a.measured = a.search.value;
  a.simulation_bound = a.measured;
  a.budget_exhausted = a.search.budget_exhausted;

  const auto report = metrology::privacy_report(rho, enc, Eigen::VectorXd::Zero(enc.n));
  a.privacy = report.privacy;
  a.privacy_bound = report.privacy.eps_bugalho;
  a.alignment_bound = report.privacy.alignment_bound;
  a.alignment_bound_chain = report.privacy.alignment_bound_chain;

  // Exact protocol-versus-simulation advantage at both ends of the
  // maximizing pair. Parameters reduce mod 2pi; the local channel families
  // in scope are periodic, so the reduction is behavior-preserving.
  const auto sys_c =
      acproto::build_system(acproto::honest_concrete(partition, false), enc, rho, 1, budget.seed);
  const auto sys_s =
      acproto::build_system(acproto::simulated_ideal(partition, false), enc, rho, 1, budget.seed);
  double best = 0.0;
  for (const Eigen::VectorXd* theta : {&a.search.theta, &a.search.theta_prime}) {
    FixedInputs in;
    for (int j : partition.honest) in.angles[j] = reduce_angle((*theta)(j - 1));
    best = std::max(best, exact_advantage(sys_c, sys_s, in).d_hat);
  }
  a.advantage = best;

  const double slack = Tolerances::global().relation;
  auto rel = [&](const std::string& name, double lhs, double rhs) {
    a.relations.push_back({name, lhs, rhs, lhs <= rhs + slack});
  };
  rel("advantage<=simulation_bound", a.advantage, a.simulation_bound);
  rel("measured<=privacy_bound", a.measured, a.privacy_bound);
  rel("measured<=alignment_bound", a.measured, a.alignment_bound);
  rel("measured<=alignment_bound_chain", a.measured, a.alignment_bound_chain);
  return a;
}

std::string audit_to_text(const BoundAudit& a) {
  std::ostringstream os;
  os << "measured=" << format_double(a.measured) << "\n"
     << "advantage=" << format_double(a.advantage) << "\n"
     << "simulation_bound=" << format_double(a.simulation_bound) << "\n"
     << "privacy_bound=" << format_double(a.privacy_bound) << "\n"
     << "alignment_bound=" << format_double(a.alignment_bound) << "\n"
     << "alignment_bound_chain=" << format_double(a.alignment_bound_chain) << "\n"
     << "privacy_measure=" << format_double(a.privacy.P) << "\n"
     << "trace_q=" << format_double(a.privacy.trace_q) << "\n"
     << "k_star=" << format_double(a.privacy.k_star) << "\n"
     << "eps_star=" << format_double(a.privacy.eps_star) << "\n"
     << "search_evals=" << a.search.evals << "\n"
     << "budget_exhausted=" << (a.budget_exhausted ? 1 : 0) << "\n";
  for (const auto& r : a.relations)
    os << "relation " << r.name << " lhs=" << format_double(r.lhs)
       << " rhs=" << format_double(r.rhs) << " holds=" << (r.holds ? 1 : 0) << "\n";
  return os.str();
}

}  // namespace qpn::harness
