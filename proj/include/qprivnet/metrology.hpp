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

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "qprivnet/qcore.hpp"

namespace qpn::metrology {

using qcore::Channel;
using qcore::Complex;
using qcore::DensityMatrix;
using qcore::Matrix;
using qcore::Vector;

// Parameter vector in radians. Protocol inputs live in [0, 2pi); search
// results may leave that window because reducing them modulo 2pi would break
// the linear constraint that defines an equivalence class.
using ParamPoint = Eigen::VectorXd;

// Per-party local parameter encoding. Default form: party mu applies
// conjugation by exp(-i theta_mu H_mu) with a Hermitian 2x2 generator H_mu.
// Arbitrary channel families are supported behind the channel-form interface;
// derivative-based quantities then use central finite differences.
struct EncodingFamily {
  int n = 0;
  bool has_generators = false;
  std::vector<Matrix> generators;                         // one 2x2 Hermitian per party
  std::vector<std::function<Channel(double)>> channels;   // channel form (per party)
  Eigen::VectorXd a;       // estimand direction; unit norm unless mean_mode
  bool mean_mode = false;  // a = (1/n)(1,...,1); estimand is the mean
  std::function<int(const std::vector<int>&)> g;  // outcome combiner over n bits

  // Unit-direction generator family. g defaults to XOR parity.
  static EncodingFamily make(std::vector<Matrix> generators, Eigen::VectorXd a,
                             std::function<int(const std::vector<int>&)> g = {});
  // Channel-form family (finite-difference derivatives).
  static EncodingFamily make_channels(std::vector<std::function<Channel(double)>> channels,
                                      Eigen::VectorXd a,
                                      std::function<int(const std::vector<int>&)> g = {});
  // Mean-estimation family: H_mu = |1><1|, a = (1/n)(1,...,1), XOR parity.
  static EncodingFamily mean(int n);

  // a renormalized to unit length (identity in unit mode).
  Eigen::VectorXd unit_a() const;
  Channel channel_for(int mu, double theta) const;  // mu is 0-based
};

EncodingFamily load_encoding(const std::string& path);

struct QfimMatrix {
  Eigen::MatrixXd q;  // symmetric PSD, n x n
};

struct AlignmentFit {
  double k_star = 0.0;
  double eps_star = 0.0;
};

struct AlignmentBound {
  double bound = 0.0;  // n * eps_star / trace_q
  double chain = 0.0;  // sqrt(1 - (1 - bound)^2), capped at 1
};

struct PrivacyReport {
  double P = 0.0;
  double eps_bugalho = 0.0;
  Eigen::MatrixXd eps_hassani_pairwise;
  Eigen::MatrixXd eps_hassani_commutator;
  double k_star = 0.0;
  double eps_star = 0.0;
  double alignment_bound = 0.0;
  double alignment_bound_chain = 0.0;
  double trace_q = 0.0;
};

struct DirectionBasis {
  Eigen::MatrixXd A;  // orthogonal, column 0 = a
};

struct SearchBudget {
  std::uint64_t seed = 1;
  int num_directions = 32;  // random directions orthogonal to a
  int grid_points = 64;
  double refine_tol = 1e-6;
  long max_evals = 50000;
};

struct ClassDistanceResult {
  double value = 0.0;
  ParamPoint theta;        // first point of the maximizing pair
  ParamPoint theta_prime;  // second point; a . (theta' - theta) = 0
  long evals = 0;
  bool budget_exhausted = false;
};

enum class HassaniMode { Pairwise, Commutator };

// rho(theta): every party's local channel applied to its register.
DensityMatrix encode_state(const DensityMatrix& rho, const EncodingFamily& enc,
                           const ParamPoint& theta);

// d rho(theta) / d theta_mu (mu 0-based). Generator form uses the commutator
// -i [H_mu, rho(theta)]; channel form a central finite difference. When
// validate is set the generator result is cross-checked against a finite
// difference with step 1e-5 at relative tolerance 1e-3.
Matrix state_derivative(const DensityMatrix& rho, const EncodingFamily& enc,
                        const ParamPoint& theta, int mu, bool validate = true);

// Quantum Fisher information matrix at theta via per-parameter SLDs.
QfimMatrix qfim(const DensityMatrix& rho, const EncodingFamily& enc, const ParamPoint& theta);

// Independent oracle for rank-1 states under generator encodings:
// Q = 4 (Re<H_mu H_nu> - <H_mu><H_nu>) in the encoded state.
QfimMatrix qfim_pure_covariance(const DensityMatrix& psi, const EncodingFamily& enc,
                                const ParamPoint& theta);

// Fisher information of an outcome distribution over a scalar parameter,
// derivative by central difference with step 1e-6.
double classical_fisher(const std::function<std::vector<double>(double)>& dist, double theta);

// a^T Q a / Tr(Q), clamped to [0, 1] after a 1e-10 tolerance check.
double privacy_measure(const QfimMatrix& q, const Eigen::VectorXd& a);

// sqrt(1 - P^2).
double bugalho_epsilon(double P);

// Entry (mu, nu): trace-norm distance between parameter responses, either
// ||d_mu rho - d_nu rho||_1 or ||[H_mu - H_nu, rho(theta)]||_1.
Eigen::MatrixXd hassani_epsilon(const DensityMatrix& rho, const EncodingFamily& enc,
                                const ParamPoint& theta, HassaniMode mode);

// Minimize max_{mu,nu} |Q_{mu nu} - k a_mu a_nu| over k (ternary search on
// [-2 Tr(Q)/min a^2, +2 Tr(Q)/min a^2] to width 1e-10).
AlignmentFit qfim_alignment_fit(const QfimMatrix& q, const Eigen::VectorXd& a);

// n * eps_star / Tr(Q), plus the chained variant sqrt(1 - (1 - x)^2).
AlignmentBound alignment_bound(int n, double eps_star, double trace_q);

// Orthogonal basis with first column a: Gram-Schmidt over (a, e1, e2, ...),
// dropping near-dependent candidates; generated columns have their first
// nonzero component positive. Deterministic.
DirectionBasis complete_basis(const Eigen::VectorXd& a);

// B^T Q B.
QfimMatrix reparametrize_qfim(const QfimMatrix& q, const Eigen::MatrixXd& B);

// Lower-bound estimate of max T(rho(theta), rho(theta')) subject to
// a . (theta' - theta) = 0, by multi-start line search: random directions
// orthogonal to a plus all pairwise coordinate-difference directions, each
// scanned on a grid over [0, 2pi sqrt(n)) and refined by golden section.
ClassDistanceResult equivalent_class_distance(const DensityMatrix& rho, const EncodingFamily& enc,
                                              const Eigen::VectorXd& a,
                                              const SearchBudget& budget = {});

// sqrt(1 - (1 - eps^2)^N).
double multi_round_bound(double eps, long rounds);

// Full privacy analysis at theta for generator-form encodings.
struct QfimReport {
  QfimMatrix q;
  PrivacyReport privacy;
};
QfimReport privacy_report(const DensityMatrix& rho, const EncodingFamily& enc,
                          const ParamPoint& theta);

}  // namespace qpn::metrology
