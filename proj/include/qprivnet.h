/* Copyright 2026 The qprivnet authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

/* Stable C interface to the qprivnet engine. Every entry point returns a
 * status code; qpn_last_error() describes the most recent failure on the
 * calling thread. Handles are opaque and must be released with their free
 * function. The library never prints on failure and never aborts.
 */

#ifndef QPRIVNET_H
#define QPRIVNET_H

#ifndef QPN_API
#if defined(_WIN32)
#define QPN_API
#else
#define QPN_API __attribute__((visibility("default")))
#endif
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum qpn_status {
  QPN_OK = 0,
  QPN_INVALID = 1,   /* malformed argument or unusable input value */
  QPN_CONFIG = 2,    /* configuration file or run-setup problem */
  QPN_INVARIANT = 3, /* a numerical or structural invariant failed */
  QPN_BUDGET = 4,    /* a configured resource limit was exhausted */
  QPN_IO = 5,        /* file read/write failure */
  QPN_INTERNAL = 6   /* unexpected internal condition */
} qpn_status;

/* Library version, "major.minor.patch". */
QPN_API const char* qpn_version(void);

/* Message for the last failing call on this thread; empty after success. */
QPN_API const char* qpn_last_error(void);

/* ---- multipartite states ---------------------------------------------- */

typedef struct qpn_state qpn_state;

/* (|0...0> + |1...1>)/sqrt(2) on n qubits. */
QPN_API qpn_status qpn_state_ghz(int n, qpn_state** out);
/* |+>^n product state. */
QPN_API qpn_status qpn_state_plus_product(int n, qpn_state** out);
/* (1-p) GHZ + p I/2^n. */
QPN_API qpn_status qpn_state_depolarized_ghz(int n, double p, qpn_state** out);
/* Density matrix from a matrix text file; validated on load. */
QPN_API qpn_status qpn_state_load(const char* path, qpn_state** out);
QPN_API void qpn_state_free(qpn_state* s);

/* Hilbert-space dimension; 0 for a null handle. */
QPN_API int qpn_state_dim(const qpn_state* s);

/* Fidelity, trace distance and Bures distance between two states. Any
 * output pointer may be null to skip that value. */
QPN_API qpn_status qpn_state_metrics(const qpn_state* a, const qpn_state* b, double* fidelity,
                                     double* trace_distance, double* bures_distance);

/* ---- security arithmetic ---------------------------------------------- */

/* sqrt(1 - (1 - eps^2)^rounds). */
QPN_API qpn_status qpn_multi_round_bound(double eps, long long rounds, double* out);

/* Security of estimation on a verified resource: conditional level
 * eps + sqrt(lambda), total (1 - delta)(eps + sqrt(lambda)) + delta. */
QPN_API qpn_status qpn_verified_epsilon(double eps, double lambda, double delta, double* total,
                                        double* conditional);

/* Two sequential stages: levels add, clamped to 1 with *clamped set. */
QPN_API qpn_status qpn_sequential_epsilon(double e1, double e2, double* out, int* clamped);

/* ---- scenario runner --------------------------------------------------- */

typedef struct qpn_run_options {
  const char* verb;        /* scenario name, or NULL to take it from the config */
  int has_seed;            /* nonzero: seed below overrides the config */
  unsigned long long seed;
  long long trials;        /* negative: value from the config */
  const char* out_dir;     /* NULL: config value, then QPRIVNET_OUT_DIR, then cwd */
  int strict;              /* 0: tolerate unknown keys; negative: default (strict) */
} qpn_run_options;

/* Parses the configuration, executes the scenario, writes the result files
 * and prints the run table on stdout. opt may be NULL for all defaults. */
QPN_API qpn_status qpn_run_scenario(const char* config_path, const qpn_run_options* opt);

#ifdef __cplusplus
} /* extern "C" */
#endif

#endif /* QPRIVNET_H */
