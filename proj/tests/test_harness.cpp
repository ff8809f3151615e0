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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "qprivnet/harness.hpp"

using namespace qpn;
using namespace qpn::harness;
namespace qc = qpn::qcore;
namespace mt = qpn::metrology;
namespace ac = qpn::acproto;

namespace {

Status status_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.status;
  }
  return Status::Ok;
}

// Single-party protocol whose report is 0 with certainty for |+> and a fair
// coin for the maximally mixed register: a calibration pair with optimal
// advantage exactly 1/2 at zero input.
struct CalibrationPair {
  ComposedSystem a;
  ComposedSystem b;
};

CalibrationPair calibration_pair(std::uint64_t seed) {
  const auto part = ac::PartyPartition::make(1, {});
  const auto enc = mt::EncodingFamily::mean(1);
  const auto spec = ac::honest_concrete(part, true);
  return {ac::build_system(spec, enc, qc::ghz(1), 1, seed),
          ac::build_system(spec, enc, qc::maximally_mixed(2), 1, seed)};
}

std::string final_report(const ac::Transcript& view) {
  for (const auto& m : view.messages)
    if (m.round == view.rounds + 1 && m.type == ac::PayloadType::Bitstring) return m.payload;
  return "";
}

mt::EncodingFamily phase_family(int n) {
  qc::Matrix h = qc::Matrix::Zero(2, 2);
  h(1, 1) = 1.0;
  Eigen::VectorXd a = Eigen::VectorXd::Constant(n, 1.0 / std::sqrt(double(n)));
  return mt::EncodingFamily::make(std::vector<qc::Matrix>(n, h), a);
}

}  // namespace

TEST_CASE("ensemble distance separates flags and merges matching branches") {
  CqEnsemble x, y;
  x.branches.push_back({"1|0", 1.0, std::nullopt});
  y.branches.push_back({"1|1", 1.0, std::nullopt});
  CHECK(ensemble_distance(x, y) == doctest::Approx(1.0));
  CHECK(ensemble_distance(x, x) == doctest::Approx(0.0));

  CqEnsemble z;
  z.branches.push_back({"1|0", 0.5, std::nullopt});
  z.branches.push_back({"1|1", 0.5, std::nullopt});
  CHECK(ensemble_distance(x, z) == doctest::Approx(0.5));
  CHECK(ensemble_distance(z, x) == doctest::Approx(0.5));

  // equal labels with orthogonal states: fully distinguishable quantum side
  qc::Vector v0(2), v1(2);
  v0 << 1.0, 0.0;
  v1 << 0.0, 1.0;
  CqEnsemble q0, q1;
  q0.branches.push_back({"1|0", 1.0, qc::pure_state(v0)});
  q1.branches.push_back({"1|0", 1.0, qc::pure_state(v1)});
  CHECK(ensemble_distance(q0, q1) == doctest::Approx(1.0));
  CHECK(ensemble_distance(q0, q1, true) == doctest::Approx(0.0));
}

TEST_CASE("protocol and simulation are exactly indistinguishable on the entangled resource") {
  const auto part = ac::PartyPartition::make(3, {3});
  const auto enc = mt::EncodingFamily::mean(3);
  const auto rho = qc::ghz(3);
  const auto sys_c = ac::build_system(ac::honest_concrete(part, true), enc, rho, 1, 2);
  const auto sys_s = ac::build_system(ac::simulated_ideal(part, true), enc, rho, 1, 2);
  Rng rng(99);
  for (int rep = 0; rep < 8; ++rep) {
    FixedInputs in;
    in.angles[1] = rng.uniform() * 2.0 * M_PI;
    in.angles[2] = rng.uniform() * 2.0 * M_PI;
    in.bits[3] = {rng.bernoulli(0.5) ? 1 : 0};
    const auto est = exact_advantage(sys_c, sys_s, in);
    CHECK(est.d_hat <= 1e-9);
    CHECK(est.ci_low == est.d_hat);
    CHECK(est.ci_high == est.d_hat);
    CHECK(est.mode == EstimateMode::Exact);
    // symmetry of the underlying distance
    const auto rev = exact_advantage(sys_s, sys_c, in);
    CHECK(std::abs(rev.d_hat - est.d_hat) <= 1e-12);
  }
  // a system against itself is exactly indistinguishable
  FixedInputs in;
  in.angles = {{1, 0.3}, {2, 0.8}};
  CHECK(exact_advantage(sys_c, sys_c, in).d_hat == doctest::Approx(0.0));
}

TEST_CASE("restricting to classical observables never helps the distinguisher") {
  Rng rng(4242);
  for (int rep = 0; rep < 10; ++rep) {
    const int n = 2 + (rep % 2);
    const auto part = ac::PartyPartition::make(n, {n});
    const auto enc = mt::EncodingFamily::mean(n);
    const auto spec = ac::honest_concrete(part, true);
    const auto rho_a = qc::random_density(1 << n, 1 << n, rng);
    const auto rho_b = qc::random_density(1 << n, 1 << n, rng);
    const auto sys_a = ac::build_system(spec, enc, rho_a, 1, 7);
    const auto sys_b = ac::build_system(spec, enc, rho_b, 1, 7);
    FixedInputs in;
    for (int j = 1; j < n; ++j) in.angles[j] = rng.uniform() * 2.0 * M_PI;
    const double full = exact_advantage(sys_a, sys_b, in).d_hat;
    const double classical = exact_advantage(sys_a, sys_b, in, true).d_hat;
    CHECK(classical <= full + 1e-12);
  }
}

TEST_CASE("advantage estimates are calibrated against a known distribution gap") {
  const auto pair = calibration_pair(5);
  FixedInputs zero;
  zero.angles = {{1, 0.0}};
  const double exact = exact_advantage(pair.a, pair.b, zero).d_hat;
  CHECK(exact == doctest::Approx(0.5).epsilon(1e-12));

  CallbackDistinguisher env;
  env.on_decide = [](const ac::Transcript& view, Rng&) {
    return final_report(view) == "0" ? 'A' : 'B';
  };
  int covered = 0;
  const double w = 2.0 * std::sqrt(std::log(2.0 / 0.01) / (2.0 * 2000.0));
  for (int rep = 0; rep < 40; ++rep) {
    EstimateOptions opt;
    opt.trials = 2000;
    opt.seed = 100 + rep;
    const auto est = estimate_advantage(pair.a, pair.b, env, opt);
    if (est.ci_low <= exact && exact <= est.ci_high) ++covered;
    CHECK(est.ci_low <= est.d_hat);
    CHECK(est.d_hat <= est.ci_high);
    // the empirical value stays within one half-width of the exact one
    CHECK(est.d_hat <= exact + w);
  }
  CHECK(covered >= 38);
}

TEST_CASE("estimates hit the endpoints for trivial pairs") {
  // perfectly distinguishable: deterministic report 0 versus report 1
  const auto part = ac::PartyPartition::make(1, {});
  const auto enc = mt::EncodingFamily::mean(1);
  const auto spec = ac::honest_concrete(part, true);
  qc::Vector minus(2);
  minus << M_SQRT1_2, -M_SQRT1_2;
  const auto sys_plus = ac::build_system(spec, enc, qc::ghz(1), 1, 3);
  const auto sys_minus = ac::build_system(spec, enc, qc::pure_state(minus), 1, 3);
  CallbackDistinguisher env;
  env.on_decide = [](const ac::Transcript& view, Rng&) {
    return final_report(view) == "0" ? 'A' : 'B';
  };
  EstimateOptions opt;
  opt.trials = 500;
  opt.seed = 11;
  const auto est = estimate_advantage(sys_plus, sys_minus, env, opt);
  CHECK(est.d_hat == doctest::Approx(1.0));
  CHECK(est.correct == 500);

  // exact binomial interval at the boundary is tight and one-sided
  opt.clopper_pearson = true;
  const auto cp = estimate_advantage(sys_plus, sys_minus, env, opt);
  CHECK(cp.ci_high == doctest::Approx(1.0));
  CHECK(cp.ci_low > 0.97);
  CHECK(cp.ci_low <= cp.d_hat);

  // identical systems: the interval reaches down to zero advantage
  const auto same = estimate_advantage(sys_plus, sys_plus, env, opt);
  CHECK(same.ci_low == doctest::Approx(0.0));

  EstimateOptions tiny;
  tiny.trials = 50;
  CHECK(status_of([&] { estimate_advantage(sys_plus, sys_minus, env, tiny); }) ==
        Status::Invalid);
}

TEST_CASE("distinguishers that break payload domains forfeit their trials") {
  const auto pair = calibration_pair(21);
  CallbackDistinguisher env;
  env.on_angle = [](int, int) { return -3.0; };  // out of domain, every trial aborts
  env.on_decide = [](const ac::Transcript&, Rng&) { return 'A'; };
  EstimateOptions opt;
  opt.trials = 200;
  opt.seed = 5;
  const auto est = estimate_advantage(pair.a, pair.b, env, opt);
  CHECK(est.correct == 0);
  CHECK(est.d_hat == doctest::Approx(1.0));  // all-wrong is as informative as all-right
}

TEST_CASE("full-privacy configuration audits clean") {
  const auto part = ac::PartyPartition::make(3, {3});
  const auto enc = mt::EncodingFamily::mean(3);
  const auto a = audit(qc::ghz(3), enc, part);
  CHECK(a.measured <= 1e-6);
  CHECK(a.advantage <= 1e-9);
  CHECK(a.privacy_bound <= 1e-6);
  CHECK(a.privacy.P == doctest::Approx(1.0).epsilon(1e-9));
  REQUIRE(a.relations.size() == 4);
  for (const auto& r : a.relations) CHECK(r.holds);
  CHECK_FALSE(a.budget_exhausted);

  const auto text = audit_to_text(a);
  CHECK(text.find("measured=") != std::string::npos);
  CHECK(text.find("relation advantage<=simulation_bound") != std::string::npos);
}

TEST_CASE("product-state configuration exposes the bound violation honestly") {
  const auto part = ac::PartyPartition::make(2, {2});
  const auto enc = phase_family(2);
  const auto a = audit(qc::plus_product(2), enc, part);
  CHECK(a.measured == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(a.privacy_bound == doctest::Approx(std::sqrt(3.0) / 2.0).epsilon(1e-6));
  // the finite-displacement privacy bound does not cover this configuration
  bool privacy_rel_found = false;
  for (const auto& r : a.relations)
    if (r.name == "measured<=privacy_bound") {
      privacy_rel_found = true;
      CHECK_FALSE(r.holds);
    }
  CHECK(privacy_rel_found);
  // the simulation argument still covers the exact advantage
  for (const auto& r : a.relations)
    if (r.name == "advantage<=simulation_bound") CHECK(r.holds);
}

TEST_CASE("noisy-resource audit populates every field and respects the ordering") {
  const auto part = ac::PartyPartition::make(3, {3});
  const auto enc = mt::EncodingFamily::mean(3);
  const auto a = audit(qc::depolarized_ghz(3, 0.05), enc, part);
  CHECK(a.advantage <= a.measured + 1e-9);
  CHECK(a.privacy.P < 1.0);
  CHECK(a.privacy_bound > 0.0);
  CHECK(a.alignment_bound > 0.0);
  CHECK(a.alignment_bound_chain > 0.0);
  CHECK(a.privacy.trace_q > 0.0);
  CHECK(a.search.evals > 0);

  // partition/encoding size mismatch is rejected
  CHECK(status_of([&] { audit(qc::ghz(2), enc, part); }) == Status::Invalid);
  CHECK(status_of([&] {
          audit(qc::ghz(3), enc, ac::PartyPartition::make(2, {2}));
        }) == Status::Invalid);
}
