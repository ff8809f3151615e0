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

#include <Eigen/Dense>
#include <complex>
#include <string>
#include <vector>

#include "qprivnet/common.hpp"
#include "qprivnet/rng.hpp"

namespace qpn::qcore {

using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;
using Complex = std::complex<double>;

// Multipartite density operator. parties[0] is the MOST significant tensor
// factor: for qubits, basis index I has party k's bit at position
// (num_parties - 1 - k) counted from the least significant bit. All register
// bookkeeping in the engine goes through this metadata; nothing else encodes
// ordering.
struct DensityMatrix {
  Matrix m;
  std::vector<int> parties;  // labels, tensor order
  std::vector<int> dims;     // local dimension per party, same order

  int dim() const { return static_cast<int>(m.rows()); }
  int num_parties() const { return static_cast<int>(parties.size()); }
  // Position of a label in the tensor order; throws Invalid if absent.
  int party_index(int label) const;

  // Validates hermiticity, unit trace and positivity before accepting the
  // matrix. `parties`/`dims` default to qubit registers labeled 1..k when the
  // dimension is a power of two, else to a single register labeled 1.
  static DensityMatrix make(Matrix m, std::vector<int> parties, std::vector<int> dims,
                            const Tolerances& tol = Tolerances::global());
  static DensityMatrix make(Matrix m, const Tolerances& tol = Tolerances::global());
};

// CPTP map given by Kraus operators (all the same shape).
struct Channel {
  std::vector<Matrix> kraus;

  static Channel make(std::vector<Matrix> kraus, const Tolerances& tol = Tolerances::global());
  static Channel unitary(const Matrix& u);
  // Single-qubit depolarizing channel with error weight p in [0, 1].
  static Channel depolarizing(double p);
};

// Complete set of orthogonal projectors, one per outcome label.
struct ProjectiveMeasurement {
  std::vector<std::string> labels;
  std::vector<Matrix> projectors;

  static ProjectiveMeasurement make(std::vector<std::string> labels, std::vector<Matrix> projectors,
                                    const Tolerances& tol = Tolerances::global());
  static ProjectiveMeasurement computational(int dim);
  // Single-qubit X basis; outcomes "+" and "-".
  static ProjectiveMeasurement pauli_x();
};

struct MeasurementBranch {
  std::string outcome;
  double probability = 0.0;
  DensityMatrix post_state;
  // True when the branch probability vanished; post_state is then the
  // normalized projector (a valid placeholder state), not a conditional state.
  bool zero_probability = false;
};

struct Metrics {
  double fidelity = 0.0;
  double trace_distance = 0.0;
  double bures_distance = 0.0;
};

struct EigenSystem {
  Eigen::VectorXd values;  // ascending
  Matrix vectors;          // columns, orthonormal
};

// ---- construction helpers ----------------------------------------------

// (|0...0> + |1...1>)/sqrt(2) on n qubits.
DensityMatrix ghz(int n);
// |+>^(x)n product state.
DensityMatrix plus_product(int n);
// (1-p) GHZ + p I/2^n.
DensityMatrix depolarized_ghz(int n, double p);
DensityMatrix maximally_mixed(int d);
DensityMatrix pure_state(const Vector& psi);
DensityMatrix pure_state(const Vector& psi, std::vector<int> parties, std::vector<int> dims);

// ---- operations ---------------------------------------------------------

// Kronecker product; plain operator form.
Matrix tensor(const Matrix& a, const Matrix& b);
// Kronecker product with register metadata concatenated (a's parties first).
// Fails on duplicate labels or when the result would exceed the dimension cap.
DensityMatrix tensor(const DensityMatrix& a, const DensityMatrix& b);

// Reduced state on `keep` (subset of labels), original relative order kept.
DensityMatrix partial_trace(const DensityMatrix& rho, const std::vector<int>& keep);

// Lifts `op`, acting on the listed parties of `rho` (in that order), to the
// full register by tensoring identities and permuting indices.
Matrix embed(const Matrix& op, const std::vector<int>& op_parties, const DensityMatrix& rho);

// sum_K (I (x) K (x) I) rho (...)^dagger on one register.
DensityMatrix apply_channel(const DensityMatrix& rho, const Channel& ch, int target_party);

// Fidelity (Tr sqrt(sqrt(rho) sigma sqrt(rho)))^2, trace distance
// 0.5*||rho-sigma||_1, and Bures distance sqrt(2(1-sqrt(F))).
Metrics state_metrics(const DensityMatrix& rho, const DensityMatrix& sigma);

// Eigendecomposition of a Hermitian matrix, eigenvalues ascending.
EigenSystem hermitian_eigen(const Matrix& m, const Tolerances& tol = Tolerances::global());

// Sum of absolute eigenvalues for (skew-)Hermitian input, singular values
// otherwise.
double trace_norm(const Matrix& m);

// Symmetric logarithmic derivative: Hermitian L with (rho L + L rho)/2 = drho
// on the support of rho. Entries over eigenvalue pairs summing below the rank
// cutoff are zeroed; a drho component coupling kernel to kernel beyond
// tolerance raises an Invariant error (information leaves the support, the
// derivative is undefined there).
Matrix sld_solve(const DensityMatrix& rho, const Matrix& drho,
                 const Tolerances& tol = Tolerances::global());

// Measure the listed registers; branch order follows the outcome labels
// (tensor-lexicographic for multi-register computational measurements).
std::vector<MeasurementBranch> projective_measure(const DensityMatrix& rho,
                                                  const ProjectiveMeasurement& meas,
                                                  const std::vector<int>& parties);

// Optimal distinguishing advantage at uniform prior; equals the trace
// distance.
double helstrom_advantage(const DensityMatrix& rho, const DensityMatrix& sigma);

// ---- persistence --------------------------------------------------------
//
// Matrix file format: UTF-8 text. First line "dim=<d>", then one line per
// stored entry: "<row> <col> <re> <im>" with 0-based indices; omitted entries
// are zero.

void save_matrix(const std::string& path, const Matrix& m);
Matrix load_matrix(const std::string& path);
// load_matrix + DensityMatrix validation.
DensityMatrix load_density(const std::string& path, const Tolerances& tol = Tolerances::global());

// ---- randomized constructions (test and search support) -----------------

Matrix random_unitary(int d, Rng& rng);
Vector random_pure_vector(int d, Rng& rng);
DensityMatrix random_density(int d, int rank, Rng& rng);
Channel random_channel(int d, int num_kraus, Rng& rng);
Eigen::MatrixXd random_orthogonal(int n, Rng& rng);

}  // namespace qpn::qcore
