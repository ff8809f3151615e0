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

#include "qprivnet.h"

#include <cstdio>
#include <string>

#include "qprivnet/metrology.hpp"
#include "qprivnet/qcore.hpp"
#include "qprivnet/scenario.hpp"
#include "qprivnet/veriflib.hpp"

struct qpn_state {
  qpn::qcore::DensityMatrix rho;
};

namespace {

thread_local std::string g_last_error;

// Status enum values mirror qpn_status one-to-one; the cast is the contract.
template <typename F>
qpn_status guard(F&& body) {
  try {
    body();
    g_last_error.clear();
    return QPN_OK;
  } catch (const qpn::Error& e) {
    g_last_error = e.what();
    return static_cast<qpn_status>(static_cast<int>(e.status));
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return QPN_INTERNAL;
  } catch (...) {
    g_last_error = "unknown failure";
    return QPN_INTERNAL;
  }
}

void require(bool ok, const char* what) {
  if (!ok) qpn::fail(qpn::Status::Invalid, what);
}

}  // namespace

extern "C" {

const char* qpn_version(void) { return qpn::scenario::kVersion; }

const char* qpn_last_error(void) { return g_last_error.c_str(); }

qpn_status qpn_state_ghz(int n, qpn_state** out) {
  return guard([&] {
    require(out != nullptr, "out is null");
    *out = new qpn_state{qpn::qcore::ghz(n)};
  });
}

qpn_status qpn_state_plus_product(int n, qpn_state** out) {
  return guard([&] {
    require(out != nullptr, "out is null");
    *out = new qpn_state{qpn::qcore::plus_product(n)};
  });
}

qpn_status qpn_state_depolarized_ghz(int n, double p, qpn_state** out) {
  return guard([&] {
    require(out != nullptr, "out is null");
    *out = new qpn_state{qpn::qcore::depolarized_ghz(n, p)};
  });
}

qpn_status qpn_state_load(const char* path, qpn_state** out) {
  return guard([&] {
    require(out != nullptr, "out is null");
    require(path != nullptr, "path is null");
    *out = new qpn_state{qpn::qcore::load_density(path)};
  });
}

void qpn_state_free(qpn_state* s) { delete s; }

int qpn_state_dim(const qpn_state* s) { return s ? s->rho.dim() : 0; }

qpn_status qpn_state_metrics(const qpn_state* a, const qpn_state* b, double* fidelity,
                             double* trace_distance, double* bures_distance) {
  return guard([&] {
    require(a != nullptr && b != nullptr, "state handle is null");
    const auto m = qpn::qcore::state_metrics(a->rho, b->rho);
    if (fidelity) *fidelity = m.fidelity;
    if (trace_distance) *trace_distance = m.trace_distance;
    if (bures_distance) *bures_distance = m.bures_distance;
  });
}

qpn_status qpn_multi_round_bound(double eps, long long rounds, double* out) {
  return guard([&] {
    require(out != nullptr, "out is null");
    *out = qpn::metrology::multi_round_bound(eps, static_cast<long>(rounds));
  });
}

qpn_status qpn_verified_epsilon(double eps, double lambda, double delta, double* total,
                                double* conditional) {
  return guard([&] {
    require(total != nullptr || conditional != nullptr, "both outputs are null");
    const auto lvl = qpn::veriflib::verified_epsilon(
        qpn::veriflib::SecurityLevel::make(eps),
        qpn::veriflib::VerificationGuarantee::make(lambda, delta));
    if (total) *total = lvl.total.epsilon;
    if (conditional) *conditional = lvl.conditional.epsilon;
  });
}

qpn_status qpn_sequential_epsilon(double e1, double e2, double* out, int* clamped) {
  return guard([&] {
    require(out != nullptr, "out is null");
    const auto lvl = qpn::veriflib::sequential_epsilon(qpn::veriflib::SecurityLevel::make(e1),
                                                       qpn::veriflib::SecurityLevel::make(e2));
    *out = lvl.epsilon;
    if (clamped) *clamped = lvl.clamped ? 1 : 0;
  });
}

qpn_status qpn_run_scenario(const char* config_path, const qpn_run_options* opt) {
  return guard([&] {
    require(config_path != nullptr, "config_path is null");
    qpn::scenario::ParseOverrides ov;
    if (opt) {
      if (opt->verb) ov.verb = opt->verb;
      if (opt->has_seed) ov.seed = opt->seed;
      if (opt->trials >= 0) ov.trials = static_cast<long>(opt->trials);
      if (opt->out_dir) ov.out_dir = opt->out_dir;
      if (opt->strict >= 0) ov.strict = opt->strict != 0;
    }
    const auto cfg = qpn::scenario::parse_config(config_path, ov);
    const auto manifest = qpn::scenario::run_scenario(cfg);
    std::fputs(qpn::scenario::render_table(manifest).c_str(), stdout);
  });
}

}  // extern "C"
