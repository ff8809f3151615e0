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

#include "qprivnet/qcore.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace qpn {

std::string format_double(double v) {
  // 17 significant digits, scientific, '.' decimal point by construction.
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::scientific, 16);
  return std::string(buf, res.ptr);
}

}  // namespace qpn

namespace qpn::qcore {

namespace {

bool is_power_of_two(int d) { return d > 0 && (d & (d - 1)) == 0; }

std::vector<int> default_parties(int dim, std::vector<int>* dims_out) {
  std::vector<int> parties, dims;
  if (dim >= 2 && is_power_of_two(dim)) {
    int k = 0;
    for (int d = dim; d > 1; d >>= 1) ++k;
    for (int i = 1; i <= k; ++i) {
      parties.push_back(i);
      dims.push_back(2);
    }
  } else {
    parties.push_back(1);
    dims.push_back(dim);
  }
  *dims_out = dims;
  return parties;
}

// Mixed-radix digits of a basis index, parties[0] most significant.
void decompose(int index, const std::vector<int>& dims, std::vector<int>* digits) {
  const int n = static_cast<int>(dims.size());
  digits->resize(n);
  for (int k = n - 1; k >= 0; --k) {
    (*digits)[k] = index % dims[k];
    index /= dims[k];
  }
}

int compose(const std::vector<int>& digits, const std::vector<int>& dims) {
  int index = 0;
  for (std::size_t k = 0; k < dims.size(); ++k) index = index * dims[k] + digits[k];
  return index;
}

double max_abs_entry(const Matrix& m) {
  return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff();
}

void check_square(const Matrix& m, const char* who) {
  if (m.rows() != m.cols() || m.rows() == 0)
    fail(Status::Invalid, std::string(who) + ": matrix must be square and nonempty");
  if (!m.allFinite()) fail(Status::Invariant, std::string(who) + ": entries must be finite");
}

void check_completeness(const std::vector<Matrix>& kraus, const Tolerances& tol) {
  const int d = static_cast<int>(kraus.front().rows());
  Matrix acc = Matrix::Zero(d, d);
  for (const Matrix& k : kraus) acc += k.adjoint() * k;
  const double dev = max_abs_entry(acc - Matrix::Identity(d, d));
  if (dev > tol.completeness)
    fail(Status::Invariant, "channel: Kraus completeness violated (deviation " +
                                format_double(dev) + ")");
}

}  // namespace

int DensityMatrix::party_index(int label) const {
  for (std::size_t i = 0; i < parties.size(); ++i)
    if (parties[i] == label) return static_cast<int>(i);
  fail(Status::Invalid, "state: no register labeled " + std::to_string(label));
}

DensityMatrix DensityMatrix::make(Matrix m, std::vector<int> parties, std::vector<int> dims,
                                  const Tolerances& tol) {
  check_square(m, "state");
  const int d = static_cast<int>(m.rows());
  if (parties.size() != dims.size())
    fail(Status::Invalid, "state: parties and dims must have equal length");
  long prod = 1;
  for (int ld : dims) {
    if (ld < 1) fail(Status::Invalid, "state: register dimensions must be positive");
    prod *= ld;
  }
  if (prod != d) fail(Status::Invalid, "state: register dimensions do not multiply to the matrix dimension");
  std::set<int> seen(parties.begin(), parties.end());
  if (seen.size() != parties.size()) fail(Status::Invalid, "state: duplicate register label");

  const double herm = max_abs_entry(m - m.adjoint());
  if (herm > tol.hermiticity)
    fail(Status::Invariant, "state: not Hermitian (deviation " + format_double(herm) + ")");
  const double tr_dev = std::abs(m.trace().real() - 1.0) + std::abs(m.trace().imag());
  if (tr_dev > tol.trace_one)
    fail(Status::Invariant, "state: trace differs from 1 by " + format_double(tr_dev));
  Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (m + m.adjoint()), Eigen::EigenvaluesOnly);
  const double min_eig = es.eigenvalues().minCoeff();
  if (min_eig < tol.psd)
    fail(Status::Invariant, "state: negative eigenvalue " + format_double(min_eig));

  DensityMatrix rho;
  rho.m = std::move(m);
  rho.parties = std::move(parties);
  rho.dims = std::move(dims);
  return rho;
}

DensityMatrix DensityMatrix::make(Matrix m, const Tolerances& tol) {
  check_square(m, "state");
  std::vector<int> dims;
  std::vector<int> parties = default_parties(static_cast<int>(m.rows()), &dims);
  return make(std::move(m), std::move(parties), std::move(dims), tol);
}

Channel Channel::make(std::vector<Matrix> kraus, const Tolerances& tol) {
  if (kraus.empty()) fail(Status::Invalid, "channel: needs at least one Kraus operator");
  for (const Matrix& k : kraus) {
    check_square(k, "channel");
    if (k.rows() != kraus.front().rows())
      fail(Status::Invalid, "channel: Kraus operators must share one shape");
  }
  check_completeness(kraus, tol);
  Channel ch;
  ch.kraus = std::move(kraus);
  return ch;
}

Channel Channel::unitary(const Matrix& u) {
  check_square(u, "channel");
  return make({u});
}

Channel Channel::depolarizing(double p) {
  if (!(p >= 0.0 && p <= 1.0)) fail(Status::Invalid, "depolarizing: weight must be in [0, 1]");
  const Complex i(0.0, 1.0);
  Matrix id = Matrix::Identity(2, 2);
  Matrix x(2, 2), y(2, 2), z(2, 2);
  x << 0, 1, 1, 0;
  y << 0, -i, i, 0;
  z << 1, 0, 0, -1;
  return make({std::sqrt(1.0 - 0.75 * p) * id, std::sqrt(0.25 * p) * x, std::sqrt(0.25 * p) * y,
               std::sqrt(0.25 * p) * z});
}

ProjectiveMeasurement ProjectiveMeasurement::make(std::vector<std::string> labels,
                                                  std::vector<Matrix> projectors,
                                                  const Tolerances& tol) {
  if (labels.size() != projectors.size() || labels.empty())
    fail(Status::Invalid, "measurement: one projector per outcome label required");
  const int d = static_cast<int>(projectors.front().rows());
  Matrix acc = Matrix::Zero(d, d);
  for (const Matrix& p : projectors) {
    check_square(p, "measurement");
    if (p.rows() != d) fail(Status::Invalid, "measurement: projector shapes differ");
    if (max_abs_entry(p - p.adjoint()) > tol.projector)
      fail(Status::Invariant, "measurement: projector not Hermitian");
    if (max_abs_entry(p * p - p) > tol.projector)
      fail(Status::Invariant, "measurement: projector not idempotent");
    acc += p;
  }
  if (max_abs_entry(acc - Matrix::Identity(d, d)) > tol.projector)
    fail(Status::Invariant, "measurement: projectors do not resolve the identity");
  ProjectiveMeasurement meas;
  meas.labels = std::move(labels);
  meas.projectors = std::move(projectors);
  return meas;
}

ProjectiveMeasurement ProjectiveMeasurement::computational(int dim) {
  std::vector<std::string> labels;
  std::vector<Matrix> projectors;
  for (int k = 0; k < dim; ++k) {
    labels.push_back(std::to_string(k));
    Matrix p = Matrix::Zero(dim, dim);
    p(k, k) = 1.0;
    projectors.push_back(std::move(p));
  }
  return make(std::move(labels), std::move(projectors));
}

ProjectiveMeasurement ProjectiveMeasurement::pauli_x() {
  Matrix plus(2, 2), minus(2, 2);
  plus << 0.5, 0.5, 0.5, 0.5;
  minus << 0.5, -0.5, -0.5, 0.5;
  return make({"+", "-"}, {plus, minus});
}

// ---- construction helpers ----------------------------------------------

DensityMatrix ghz(int n) {
  if (n < 1 || n > Limits::global().max_parties)
    fail(Status::Invalid, "ghz: party count out of range");
  const int d = 1 << n;
  Vector psi = Vector::Zero(d);
  psi(0) = 1.0 / std::sqrt(2.0);
  psi(d - 1) = 1.0 / std::sqrt(2.0);
  return pure_state(psi);
}

DensityMatrix plus_product(int n) {
  if (n < 1 || n > Limits::global().max_parties)
    fail(Status::Invalid, "plus_product: party count out of range");
  const int d = 1 << n;
  Vector psi = Vector::Constant(d, 1.0 / std::sqrt(static_cast<double>(d)));
  return pure_state(psi);
}

DensityMatrix depolarized_ghz(int n, double p) {
  if (!(p >= 0.0 && p <= 1.0)) fail(Status::Invalid, "depolarized_ghz: weight must be in [0, 1]");
  DensityMatrix g = ghz(n);
  const int d = g.dim();
  Matrix m = (1.0 - p) * g.m + (p / d) * Matrix::Identity(d, d);
  return DensityMatrix::make(std::move(m), g.parties, g.dims);
}

DensityMatrix maximally_mixed(int d) {
  if (d < 1) fail(Status::Invalid, "maximally_mixed: dimension must be positive");
  return DensityMatrix::make(Matrix::Identity(d, d) / static_cast<double>(d));
}

DensityMatrix pure_state(const Vector& psi) {
  std::vector<int> dims;
  std::vector<int> parties = default_parties(static_cast<int>(psi.size()), &dims);
  return pure_state(psi, std::move(parties), std::move(dims));
}

DensityMatrix pure_state(const Vector& psi, std::vector<int> parties, std::vector<int> dims) {
  const double norm = psi.norm();
  if (norm <= 0.0 || !psi.allFinite()) fail(Status::Invalid, "pure_state: vector must be finite and nonzero");
  Vector v = psi / norm;
  return DensityMatrix::make(v * v.adjoint(), std::move(parties), std::move(dims));
}

// ---- operations ---------------------------------------------------------

Matrix tensor(const Matrix& a, const Matrix& b) {
  const long rows = a.rows() * b.rows();
  const long cols = a.cols() * b.cols();
  if (rows > Limits::global().max_dim || cols > Limits::global().max_dim)
    fail(Status::Invalid, "tensor: dimension overflow beyond " +
                              std::to_string(Limits::global().max_dim));
  Matrix out(rows, cols);
  for (long i = 0; i < a.rows(); ++i)
    for (long j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

DensityMatrix tensor(const DensityMatrix& a, const DensityMatrix& b) {
  std::vector<int> parties = a.parties;
  for (int label : b.parties) {
    if (std::find(parties.begin(), parties.end(), label) != parties.end())
      fail(Status::Invalid, "tensor: register label " + std::to_string(label) +
                                " present on both factors");
    parties.push_back(label);
  }
  std::vector<int> dims = a.dims;
  dims.insert(dims.end(), b.dims.begin(), b.dims.end());
  return DensityMatrix::make(tensor(a.m, b.m), std::move(parties), std::move(dims));
}

DensityMatrix partial_trace(const DensityMatrix& rho, const std::vector<int>& keep) {
  if (keep.empty())
    fail(Status::Invalid, "partial_trace: keeping no register leaves only a scalar trace");
  std::vector<int> keep_pos;
  for (std::size_t i = 0; i < rho.parties.size(); ++i)
    if (std::find(keep.begin(), keep.end(), rho.parties[i]) != keep.end())
      keep_pos.push_back(static_cast<int>(i));
  if (keep_pos.size() != keep.size())
    fail(Status::Invalid, "partial_trace: keep set lists a register the state does not have");

  std::vector<int> trace_pos;
  for (std::size_t i = 0; i < rho.parties.size(); ++i)
    if (std::find(keep_pos.begin(), keep_pos.end(), static_cast<int>(i)) == keep_pos.end())
      trace_pos.push_back(static_cast<int>(i));

  std::vector<int> keep_dims, trace_dims, out_parties;
  for (int p : keep_pos) {
    keep_dims.push_back(rho.dims[p]);
    out_parties.push_back(rho.parties[p]);
  }
  for (int p : trace_pos) trace_dims.push_back(rho.dims[p]);
  int dk = 1, dt = 1;
  for (int d : keep_dims) dk *= d;
  for (int d : trace_dims) dt *= d;

  Matrix out = Matrix::Zero(dk, dk);
  std::vector<int> ka, kb, tt, full_a(rho.dims.size()), full_b(rho.dims.size());
  for (int A = 0; A < dk; ++A) {
    decompose(A, keep_dims, &ka);
    for (int B = 0; B < dk; ++B) {
      decompose(B, keep_dims, &kb);
      Complex acc = 0.0;
      for (int t = 0; t < dt; ++t) {
        decompose(t, trace_dims, &tt);
        for (std::size_t q = 0; q < keep_pos.size(); ++q) {
          full_a[keep_pos[q]] = ka[q];
          full_b[keep_pos[q]] = kb[q];
        }
        for (std::size_t q = 0; q < trace_pos.size(); ++q) {
          full_a[trace_pos[q]] = tt[q];
          full_b[trace_pos[q]] = tt[q];
        }
        acc += rho.m(compose(full_a, rho.dims), compose(full_b, rho.dims));
      }
      out(A, B) = acc;
    }
  }
  return DensityMatrix::make(std::move(out), std::move(out_parties), std::move(keep_dims));
}

Matrix embed(const Matrix& op, const std::vector<int>& op_parties, const DensityMatrix& rho) {
  std::vector<int> pos, op_dims;
  for (int label : op_parties) {
    pos.push_back(rho.party_index(label));
    op_dims.push_back(rho.dims[pos.back()]);
  }
  int dop = 1;
  for (int d : op_dims) dop *= d;
  if (op.rows() != dop || op.cols() != dop)
    fail(Status::Invalid, "embed: operator dimension does not match the selected registers");

  std::vector<int> rest_pos, rest_dims;
  for (std::size_t i = 0; i < rho.parties.size(); ++i)
    if (std::find(pos.begin(), pos.end(), static_cast<int>(i)) == pos.end()) {
      rest_pos.push_back(static_cast<int>(i));
      rest_dims.push_back(rho.dims[i]);
    }
  int drest = 1;
  for (int d : rest_dims) drest *= d;

  const int d = rho.dim();
  Matrix out = Matrix::Zero(d, d);
  std::vector<int> ou, ov, rr, full_u(rho.dims.size()), full_v(rho.dims.size());
  for (int u = 0; u < dop; ++u) {
    decompose(u, op_dims, &ou);
    for (int v = 0; v < dop; ++v) {
      if (op(u, v) == Complex(0.0, 0.0)) continue;
      decompose(v, op_dims, &ov);
      for (int r = 0; r < drest; ++r) {
        decompose(r, rest_dims, &rr);
        for (std::size_t q = 0; q < pos.size(); ++q) {
          full_u[pos[q]] = ou[q];
          full_v[pos[q]] = ov[q];
        }
        for (std::size_t q = 0; q < rest_pos.size(); ++q) {
          full_u[rest_pos[q]] = rr[q];
          full_v[rest_pos[q]] = rr[q];
        }
        out(compose(full_u, rho.dims), compose(full_v, rho.dims)) = op(u, v);
      }
    }
  }
  return out;
}

DensityMatrix apply_channel(const DensityMatrix& rho, const Channel& ch, int target_party) {
  if (ch.kraus.empty()) fail(Status::Invalid, "apply_channel: empty channel");
  check_completeness(ch.kraus, Tolerances::global());
  const int idx = rho.party_index(target_party);
  if (ch.kraus.front().rows() != rho.dims[idx])
    fail(Status::Invalid, "apply_channel: Kraus dimension does not match the target register");
  Matrix out = Matrix::Zero(rho.dim(), rho.dim());
  for (const Matrix& k : ch.kraus) {
    Matrix ke = embed(k, {target_party}, rho);
    out += ke * rho.m * ke.adjoint();
  }
  return DensityMatrix::make(std::move(out), rho.parties, rho.dims);
}

EigenSystem hermitian_eigen(const Matrix& m, const Tolerances& tol) {
  check_square(m, "eigen");
  if (max_abs_entry(m - m.adjoint()) > tol.hermiticity)
    fail(Status::Invalid, "eigen: matrix is not Hermitian");
  Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (m + m.adjoint()));
  if (es.info() != Eigen::Success) fail(Status::Internal, "eigen: solver failed to converge");
  EigenSystem out;
  out.values = es.eigenvalues();
  out.vectors = es.eigenvectors();
  return out;
}

double trace_norm(const Matrix& m) {
  check_square(m, "trace_norm");
  const double herm = max_abs_entry(m - m.adjoint());
  if (herm <= 1e-9) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (m + m.adjoint()), Eigen::EigenvaluesOnly);
    return es.eigenvalues().cwiseAbs().sum();
  }
  const double skew = max_abs_entry(m + m.adjoint());
  if (skew <= 1e-9) {
    // i*M is Hermitian and shares singular values with M.
    const Matrix im = Complex(0.0, 1.0) * m;
    Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (im + im.adjoint()), Eigen::EigenvaluesOnly);
    return es.eigenvalues().cwiseAbs().sum();
  }
  Eigen::JacobiSVD<Matrix> svd(m);
  return svd.singularValues().sum();
}

Matrix sld_solve(const DensityMatrix& rho, const Matrix& drho, const Tolerances& tol) {
  check_square(drho, "sld");
  if (drho.rows() != rho.m.rows()) fail(Status::Invalid, "sld: dimension mismatch");
  if (max_abs_entry(drho - drho.adjoint()) > 1e-8)
    fail(Status::Invalid, "sld: derivative must be Hermitian");
  if (std::abs(drho.trace()) > 1e-8)
    fail(Status::Invalid, "sld: derivative must be traceless");

  EigenSystem es = hermitian_eigen(rho.m, tol);
  const int d = rho.dim();
  const Matrix D = es.vectors.adjoint() * drho * es.vectors;

  // A derivative component inside kernel x kernel means the state's rank is
  // changing; no SLD satisfies the defining equation there.
  double worst = 0.0;
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j)
      if (es.values(i) < tol.rank_cutoff && es.values(j) < tol.rank_cutoff)
        worst = std::max(worst, std::abs(D(i, j)));
  if (worst > tol.sld_offsupport)
    fail(Status::Invariant, "sld: derivative leaves the state's support (rank change, residual " +
                                format_double(worst) + ")");

  Matrix L = Matrix::Zero(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) {
      const double s = es.values(i) + es.values(j);
      L(i, j) = (s >= tol.rank_cutoff) ? 2.0 * D(i, j) / s : Complex(0.0, 0.0);
    }
  Matrix out = es.vectors * L * es.vectors.adjoint();
  return 0.5 * (out + out.adjoint());
}

namespace {

// Principal square root of a PSD matrix. Eigenvalues below a relative cutoff
// are treated as exact zeros so that rank-deficient inputs do not inject
// sqrt(machine-noise) terms into the result.
Matrix sqrt_psd(const Matrix& m, const char* who, double floor_tol) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (m + m.adjoint()));
  if (es.info() != Eigen::Success) fail(Status::Internal, "metrics: eigensolver failed");
  const Eigen::VectorXd& vals = es.eigenvalues();
  if (vals.minCoeff() < floor_tol)
    fail(Status::Invariant, std::string(who) + " has eigenvalue " + format_double(vals.minCoeff()));
  const double cutoff = std::max(vals.maxCoeff(), 0.0) * 1e-13;
  Eigen::VectorXd sq(vals.size());
  for (int i = 0; i < vals.size(); ++i) sq(i) = vals(i) > cutoff ? std::sqrt(vals(i)) : 0.0;
  return es.eigenvectors() * sq.asDiagonal() * es.eigenvectors().adjoint();
}

}  // namespace

Metrics state_metrics(const DensityMatrix& rho, const DensityMatrix& sigma) {
  if (rho.dim() != sigma.dim()) fail(Status::Invalid, "metrics: states must share one dimension");
  const Tolerances& tol = Tolerances::global();

  // sqrt(F) is the nuclear norm of sqrt(sigma) sqrt(rho). Swapping the states
  // transposes the product, so the value is symmetric by construction.
  const Matrix sqrt_rho = sqrt_psd(rho.m, "metrics: first state", tol.psd_metric_input);
  const Matrix sqrt_sigma = sqrt_psd(sigma.m, "metrics: second state", tol.psd_metric_input);
  Eigen::JacobiSVD<Matrix> svd(sqrt_sigma * sqrt_rho);
  const double root_sum = svd.singularValues().sum();

  Metrics out;
  out.fidelity = std::min(root_sum * root_sum, 1.0);
  out.trace_distance = std::min(0.5 * trace_norm(rho.m - sigma.m), 1.0);
  const double root_f = std::min(root_sum, 1.0);
  out.bures_distance = std::sqrt(std::max(2.0 * (1.0 - root_f), 0.0));
  return out;
}

std::vector<MeasurementBranch> projective_measure(const DensityMatrix& rho,
                                                  const ProjectiveMeasurement& meas,
                                                  const std::vector<int>& parties) {
  const Tolerances& tol = Tolerances::global();
  std::vector<MeasurementBranch> branches;
  double total = 0.0;
  for (std::size_t b = 0; b < meas.projectors.size(); ++b) {
    const Matrix p_full = (parties.size() == rho.parties.size() && parties == rho.parties)
                              ? meas.projectors[b]
                              : embed(meas.projectors[b], parties, rho);
    const double prob = std::clamp((p_full * rho.m).trace().real(), 0.0, 1.0);
    MeasurementBranch br;
    br.outcome = meas.labels[b];
    br.probability = prob;
    // Below this weight the conditional state is numerical noise; report the
    // branch with the projector itself as a well-formed placeholder.
    if (prob < 1e-12) {
      br.zero_probability = true;
      const double ptr = std::max(p_full.trace().real(), 1.0);
      br.post_state = DensityMatrix::make(p_full / ptr, rho.parties, rho.dims);
    } else {
      Matrix post = p_full * rho.m * p_full / prob;
      post = 0.5 * (post + post.adjoint());
      br.post_state = DensityMatrix::make(std::move(post), rho.parties, rho.dims);
    }
    total += prob;
    branches.push_back(std::move(br));
  }
  if (std::abs(total - 1.0) > tol.prob_sum)
    fail(Status::Invariant, "measurement: branch probabilities sum to " + format_double(total));
  return branches;
}

double helstrom_advantage(const DensityMatrix& rho, const DensityMatrix& sigma) {
  return state_metrics(rho, sigma).trace_distance;
}

// ---- persistence --------------------------------------------------------

void save_matrix(const std::string& path, const Matrix& m) {
  check_square(m, "save_matrix");
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(Status::Io, "save_matrix: cannot open " + path + " for writing");
  out << "dim=" << m.rows() << "\n";
  for (long r = 0; r < m.rows(); ++r)
    for (long c = 0; c < m.cols(); ++c) {
      const Complex v = m(r, c);
      if (v == Complex(0.0, 0.0)) continue;
      out << r << " " << c << " " << format_double(v.real()) << " " << format_double(v.imag())
          << "\n";
    }
  if (!out.good()) fail(Status::Io, "save_matrix: write to " + path + " failed");
}

Matrix load_matrix(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(Status::Io, "load_matrix: cannot open " + path);
  std::string line;
  long dim = -1;
  long line_no = 0;
  Matrix m;
  std::vector<std::vector<bool>> seen;
  while (std::getline(in, line)) {
    ++line_no;
    // Trim whitespace; skip blanks.
    const auto b = line.find_first_not_of(" \t\r");
    if (b == std::string::npos) continue;
    const auto e = line.find_last_not_of(" \t\r");
    std::string body = line.substr(b, e - b + 1);
    if (dim < 0) {
      if (body.rfind("dim=", 0) != 0)
        fail(Status::Io, "load_matrix: " + path + ":" + std::to_string(line_no) +
                             ": expected dim=<d> header");
      dim = std::strtol(body.c_str() + 4, nullptr, 10);
      if (dim < 1 || dim > Limits::global().max_dim)
        fail(Status::Io, "load_matrix: " + path + ": dimension out of range");
      m = Matrix::Zero(dim, dim);
      seen.assign(dim, std::vector<bool>(dim, false));
      continue;
    }
    std::istringstream ss(body);
    long r, c;
    double re, im;
    if (!(ss >> r >> c >> re >> im))
      fail(Status::Io, "load_matrix: " + path + ":" + std::to_string(line_no) +
                           ": expected <row> <col> <re> <im>");
    std::string extra;
    if (ss >> extra)
      fail(Status::Io, "load_matrix: " + path + ":" + std::to_string(line_no) + ": trailing tokens");
    if (r < 0 || r >= dim || c < 0 || c >= dim)
      fail(Status::Io, "load_matrix: " + path + ":" + std::to_string(line_no) +
                           ": index outside 0.." + std::to_string(dim - 1));
    if (seen[r][c])
      fail(Status::Io, "load_matrix: " + path + ":" + std::to_string(line_no) +
                           ": duplicate entry (" + std::to_string(r) + ", " + std::to_string(c) + ")");
    seen[r][c] = true;
    m(r, c) = Complex(re, im);
  }
  if (dim < 0) fail(Status::Io, "load_matrix: " + path + ": missing dim=<d> header");
  if (!m.allFinite()) fail(Status::Invariant, "load_matrix: " + path + ": entries must be finite");
  return m;
}

DensityMatrix load_density(const std::string& path, const Tolerances& tol) {
  return DensityMatrix::make(load_matrix(path), tol);
}

// ---- randomized constructions ------------------------------------------

namespace {

Matrix gaussian_matrix(int rows, int cols, Rng& rng) {
  Matrix g(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) g(i, j) = Complex(rng.normal(), rng.normal());
  return g;
}

}  // namespace

Matrix random_unitary(int d, Rng& rng) {
  Matrix g = gaussian_matrix(d, d, rng);
  Eigen::HouseholderQR<Matrix> qr(g);
  Matrix q = qr.householderQ();
  Matrix r = qr.matrixQR().triangularView<Eigen::Upper>();
  // Fixing the phases of R's diagonal makes the distribution Haar.
  for (int i = 0; i < d; ++i) {
    const Complex rd = r(i, i);
    const double mag = std::abs(rd);
    const Complex phase = mag > 0 ? rd / mag : Complex(1.0, 0.0);
    q.col(i) *= phase;
  }
  return q;
}

Vector random_pure_vector(int d, Rng& rng) {
  Vector v(d);
  for (int i = 0; i < d; ++i) v(i) = Complex(rng.normal(), rng.normal());
  const double n = v.norm();
  if (n <= 0.0) return random_pure_vector(d, rng);
  return v / n;
}

DensityMatrix random_density(int d, int rank, Rng& rng) {
  if (rank < 1 || rank > d) fail(Status::Invalid, "random_density: rank must be in 1..dim");
  Matrix m = Matrix::Zero(d, d);
  double total = 0.0;
  std::vector<double> w(rank);
  for (int k = 0; k < rank; ++k) {
    w[k] = -std::log(1.0 - rng.uniform());
    total += w[k];
  }
  for (int k = 0; k < rank; ++k) {
    Vector psi = random_pure_vector(d, rng);
    m += (w[k] / total) * (psi * psi.adjoint()).eval();
  }
  m = 0.5 * (m + m.adjoint());
  return DensityMatrix::make(std::move(m));
}

Channel random_channel(int d, int num_kraus, Rng& rng) {
  if (num_kraus < 1) fail(Status::Invalid, "random_channel: needs at least one Kraus operator");
  // Columns of a random isometry, cut into d-row blocks, are a Kraus set.
  Matrix g = gaussian_matrix(d * num_kraus, d, rng);
  Eigen::HouseholderQR<Matrix> qr(g);
  Matrix q = qr.householderQ() * Matrix::Identity(d * num_kraus, d);
  std::vector<Matrix> kraus;
  for (int k = 0; k < num_kraus; ++k) kraus.push_back(q.middleRows(k * d, d));
  return Channel::make(std::move(kraus));
}

Eigen::MatrixXd random_orthogonal(int n, Rng& rng) {
  Eigen::MatrixXd g(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) g(i, j) = rng.normal();
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(g);
  Eigen::MatrixXd q = qr.householderQ();
  Eigen::MatrixXd r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (int i = 0; i < n; ++i)
    if (r(i, i) < 0) q.col(i) *= -1.0;
  return q;
}

}  // namespace qpn::qcore
